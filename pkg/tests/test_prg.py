import itertools
import math

import numpy as np
import pytest

from mswitch import oracles
from mswitch.boolcore import F2Polynomial, Restriction, restrict_poly
from mswitch.dist import bits_to_int, bits_to_ints, max_parity_bias, random_seed_bits, uniform
from mswitch.prg import (
    AllStars,
    ConditionedStars,
    Params,
    ac0_plan,
    ac0_prg,
    aw_compose,
    condition_min_stars,
    default_r_hs,
    f2_plan,
    f2_prg,
    f2_simplifies,
    fool_simple_prg,
    independent_bits,
    stars_kwise,
)
from mswitch.verify import measure_bias, random_f2_tree, random_poly


def star_rates(s):
    masks = s.all_masks()
    return [float(((masks >> i) & 1).mean()) for i in range(s.v)], masks


@pytest.mark.parametrize("q,want", [(1, 0.5), (2, 0.25)])
def test_selector_star_rate_exact(q, want):
    rates, _ = star_rates(stars_kwise(6, q, q))
    assert rates == [want] * 6


def test_pairwise_independent_stars():
    q = 2
    rates, masks = star_rates(stars_kwise(5, q, 2 * q))
    for i, j in itertools.combinations(range(5), 2):
        both = float((((masks >> i) & (masks >> j)) & 1).mean())
        assert both == rates[i] * rates[j]


def test_stars_need_enough_independence():
    with pytest.raises(ValueError):
        stars_kwise(4, 3, 2)


def test_independent_bits_falls_back_to_uniform():
    assert independent_bits(4, 4).kind == "uniform"
    assert independent_bits(64, 2).kind == "kwise"


def test_conditioning_threshold_cases():
    base = stars_kwise(8, 1, 2)
    assert condition_min_stars(base, 0) is base
    with pytest.raises(ValueError):
        condition_min_stars(base, 9)
    c = condition_min_stars(base)
    assert isinstance(c, ConditionedStars) and c.threshold == 2
    assert c.failure_inflation == 4


def test_conditioned_never_small_and_accepts_often():
    s = condition_min_stars(stars_kwise(12, 2, 4))
    L = s.sample(np.random.default_rng(0), 5000)
    assert L.sum(axis=1).min() >= s.threshold
    acc = s.observed_acceptance
    assert acc >= s.p / 2 - 3 * math.sqrt(acc * (1 - acc) / s.attempts)
    small = condition_min_stars(stars_kwise(8, 1, 2))
    assert min(int(m).bit_count() for m in small.all_masks()) >= small.threshold


def test_conditioned_batch_matches_scalar():
    s = condition_min_stars(stars_kwise(10, 2, 4))
    seeds = random_seed_bits(np.random.default_rng(2), s.s, 300)
    batch = bits_to_ints(s.generate_batch(seeds))
    assert batch.tolist() == [s.generate(bits_to_int(b)) for b in seeds]


def test_all_stars_gives_single_stage():
    simple = lambda v: uniform(v)
    g = aw_compose(5, AllStars, simple)
    assert g.max_stage_count == 1
    assert g.r == 5
    assert sorted(g.generate(x) for x in range(32)) == list(range(32))


def test_one_coordinate():
    g = aw_compose(1, lambda v: stars_kwise(v, 1, 1), lambda v: uniform(v))
    out, live = g.trace(0)
    assert live[0] == 1 and out in (0, 1)


def test_stage_count_bound():
    g = aw_compose(16, lambda v: stars_kwise(v, 1, 2), lambda v: uniform(v))
    bound = math.ceil(2 * math.log(16)) + 1
    assert g.max_stage_count <= bound
    _, stages = g.trace_batch(random_seed_bits(np.random.default_rng(4), g.r, 2000))
    assert stages.max() <= bound


def test_composed_batch_matches_scalar():
    g = ac0_prg(12, 8, 2, 0.1)
    seeds = random_seed_bits(np.random.default_rng(9), g.r, 300)
    outs, stages = g.trace_batch(seeds)
    for row, b, st in zip(bits_to_ints(outs), seeds, stages):
        out, live = g.trace(bits_to_int(b))
        assert out == row and len(live) == st


def test_fool_simple_degenerate_k():
    d0 = fool_simple_prg(8, 2, 0, 0.2)
    assert d0.kind in ("kwise", "uniform")
    d1 = fool_simple_prg(8, 0, 1, 0.2)
    assert max_parity_bias(d1) <= 0.2
    with pytest.raises(ValueError):
        fool_simple_prg(8, 2, 2, 1.5)


def test_fool_simple_corpus(rng):
    d = fool_simple_prg(8, 2, 2, 0.2)
    for _ in range(10):
        assert measure_bias(random_f2_tree(rng, 8, 2, 2), d, "exact").bias <= 0.2


def test_default_r_hs():
    assert default_r_hs(2, 3, 0.5) == 1
    assert default_r_hs(1 << 20, 3, 1e-6) == 40


def test_params_overrides():
    p = Params().with_overrides({"r_hs_cap": 12})
    assert p.r_hs_cap == 12
    with pytest.raises((TypeError, ValueError)):
        Params().with_overrides({"nope": 1})


def test_ac0_plan_star_rate_is_product():
    plan = ac0_plan(8, 2, 12, 0.05)
    assert plan.p == pytest.approx(math.prod(2.0 ** -q for q in plan.qs))


def test_f2_plan_shape():
    plan = f2_plan(16, 12, 0.05)
    assert plan.ell == 2
    assert plan.p == 2.0 ** -plan.q


def min_tree_depth(P: F2Polynomial, fixed: int, value: int, ell: int, memo: dict) -> int:
    """Fewest queries after which every leaf polynomial has degree <= ell."""
    key = (fixed, value)
    if key not in memo:
        Q = restrict_poly(P, Restriction(P.n, fixed, value))
        if Q.degree <= ell:
            memo[key] = 0
        else:
            memo[key] = 1 + min(max(min_tree_depth(P, fixed | 1 << v, value | b << v, ell, memo) for b in (0, 1))
                                for v in range(P.n) if not (fixed >> v) & 1)
    return memo[key]


def test_f2_membership_is_conservative():
    P = F2Polynomial(6, [[0, 1], [2, 3]])
    assert min_tree_depth(P, 0, 0, 1, {}) == 2
    # the proxy walks both monomials in full: CCDT depth 4
    assert min_tree_depth(P, 0, 0, 1, {}) < 3
    assert not f2_simplifies(P, Restriction.stars(6), 1, 4)
    assert f2_simplifies(P, Restriction.stars(6), 1, 5)


def test_f2_membership_is_sound(rng):
    for _ in range(15):
        P = random_poly(rng, 5, rng.randint(1, 4), 3)
        ell = rng.randint(1, 2)
        memo = {}
        for rho in itertools.islice(oracles.all_restrictions(5), 0, 243, 7):
            for t in (1, 2, 3):
                if f2_simplifies(P, rho, ell, t):
                    assert min_tree_depth(P, rho.fixed, rho.value, ell, memo) < t


def test_end_to_end_generators_are_deterministic():
    for g in (ac0_prg(12, 8, 2, 0.1), f2_prg(12, 8, 0.1)):
        seeds = random_seed_bits(np.random.default_rng(1), g.r, 50)
        a = bits_to_ints(g.generate_batch(seeds))
        b = bits_to_ints(g.generate_batch(seeds))
        assert (a == b).all()
        assert g.descriptor()["seed_bits"] == g.r
