import itertools
import math

import numpy as np
import pytest

from mswitch.dist import (
    BitstringRestrictionSpace,
    MaxAttemptsExceeded,
    bits_to_int,
    bits_to_ints,
    conditional_parity_bias,
    epsbiased,
    kwise,
    max_parity_bias,
    mix_condition,
    random_seed_bits,
    restriction_from_bits,
    sample_Rp,
    sample_Rp_batch,
    stars_from_bits,
    uniform,
    xor_sum,
)


def brute_bias(d):
    """max over nonempty S of |2 Pr[<S,out> = 1] - 1| by enumerating every seed."""
    outs = [int(o) for o in d.all_outputs()]
    worst = 0.0
    for S in range(1, 1 << d.n_out):
        ones = sum((o & S).bit_count() & 1 for o in outs)
        worst = max(worst, abs(2 * ones / len(outs) - 1))
    return worst


def test_kwise_pairs_tiny():
    d = kwise(2, 2)
    assert d.r == 2
    assert sorted(d.all_outputs().tolist()) == [0, 1, 2, 3]


@pytest.mark.parametrize("n,k", [(8, 2), (8, 1), (6, 3), (16, 2)])
def test_kwise_marginals(n, k):
    outs = kwise(n, k).all_outputs()
    for S in itertools.combinations(range(n), k):
        proj = sum(((outs >> c) & 1) << j for j, c in enumerate(S))
        assert (np.bincount(proj, minlength=1 << k) == len(outs) >> k).all()


def test_epsbiased_bounds():
    d = epsbiased(8, 0.25)
    assert d.m == 6 and d.r == 12
    b = max_parity_bias(d)
    assert b == pytest.approx(brute_bias(d))
    assert b <= 0.25
    assert max_parity_bias(epsbiased(1, 0.1)) <= 0.1


def test_epsbiased_large_field():
    # m > 32 goes through the wide multiplication path
    d = epsbiased(40, 1e-9)
    assert d.m > 32
    seeds = random_seed_bits(np.random.default_rng(0), d.r, 64)
    batch = d.generate_batch(seeds)
    for row, s in zip(batch, seeds):
        assert bits_to_ints(row[None, :])[0] == d.generate(bits_to_int(s))


def test_empty_parity_has_zero_bias():
    assert epsbiased(4, 0.3).fourier()[0] == 1 << epsbiased(4, 0.3).r


def test_xor_sum():
    d = epsbiased(6, 0.25)
    assert xor_sum([d]) is d
    assert max_parity_bias(xor_sum([d, uniform(6)])) == 0
    k = kwise(6, 2)
    assert max_parity_bias(xor_sum([d, k])) <= min(max_parity_bias(d), max_parity_bias(k)) + 1e-12


@pytest.mark.parametrize("name,d", [("kwise", kwise(11, 3)), ("eps", epsbiased(9, 0.2)),
                                    ("uniform", uniform(7)), ("sum", xor_sum([kwise(9, 2), epsbiased(9, 0.3)]))])
def test_batch_matches_scalar(name, d):
    seeds = random_seed_bits(np.random.default_rng(1), d.r, 200)
    batch = bits_to_ints(d.generate_batch(seeds))
    scalar = [d.generate(int(x)) for x in bits_to_ints(seeds)]
    assert batch.tolist() == scalar


def test_restriction_from_bits():
    space = BitstringRestrictionSpace(2, 1)
    assert str(restriction_from_bits(space, [1, 0], [0, 1])) == "*1"
    assert str(restriction_from_bits(BitstringRestrictionSpace(3, 2), [[1, 1]] * 3, [1, 0, 1])) == "***"
    assert stars_from_bits(space, [1, 0]) == {0}
    with pytest.raises(ValueError):
        restriction_from_bits(space, [1], [0, 1])


def test_decode_matches_restriction_from_bits():
    space = BitstringRestrictionSpace(3, 2)
    for z in range(1 << space.size):
        bits = [(z >> i) & 1 for i in range(space.size)]
        rho = restriction_from_bits(space, bits[:6], bits[6:])
        assert space.decode(z) == rho


@pytest.mark.parametrize("q", [1, 2, 3])
def test_star_rate_exact(q):
    space = BitstringRestrictionSpace(2, q)
    N = 1 << space.size
    for i in range(2):
        stars = sum((space.star_mask(z) >> i) & 1 for z in range(N))
        assert stars * (1 << q) == N


def test_sample_Rp():
    rng = np.random.default_rng(5)
    assert sample_Rp(5, 1.0, rng).num_stars() == 5
    assert sample_Rp(5, 0.0, rng).num_stars() == 0
    n = 10_000
    fixed, _ = sample_Rp_batch(1, 0.25, rng, n)
    star = n - int(fixed.sum())
    assert abs(star / n - 0.25) <= 3 * math.sqrt(0.25 * 0.75 / n)
    with pytest.raises(ValueError):
        sample_Rp(3, 1.5, rng)


def test_conditioning():
    d = epsbiased(8, 0.25)
    rng = np.random.default_rng(3)
    s = mix_condition(d, lambda x: True)
    assert s.sample(rng) in set(d.all_outputs().tolist())
    assert s.observed_acceptance == 1.0
    delta = max_parity_bias(d)
    cb = conditional_parity_bias(d, lambda x: x & 1 == 1, range(1, 8))
    assert cb <= 2 * delta / (1 - delta) <= 4 * delta
    with pytest.raises(MaxAttemptsExceeded):
        mix_condition(d, lambda x: False, max_attempts=50).sample(rng)
