import math
import random

import numpy as np
import pytest

from mswitch.boolcore import Cnf, CnfFamily, F2Polynomial
from mswitch.dist import epsbiased, max_parity_bias, uniform
from mswitch.verify import (
    FORMULAS,
    PseudoBits,
    SwitchingReport,
    TrueRp,
    _bound,
    check_rp_law,
    measure_bias,
    monomial_exceed_prob,
    naive_poly_failure,
    random_cnf,
    run_oracle_suite,
    run_suite,
    single_switching_failure,
    switching_failure,
    switching_family,
)
from mswitch.dist import kwise


def test_constant_function_has_no_bias():
    table = np.ones(1 << 6, dtype=bool)
    for mode in ("exact", "sampled"):
        assert measure_bias(table, epsbiased(6, 0.3), mode, trials=500).bias == 0


def test_parity_bias_within_delta():
    d = epsbiased(8, 0.25)
    parity = np.array([bin(x).count("1") & 1 for x in range(256)], dtype=bool)
    assert measure_bias(parity, d).bias <= max_parity_bias(d) / 2 + 1e-12


def test_uniform_generator_is_exact():
    f = random_cnf(random.Random(1), 7, 3, 5)
    assert measure_bias(f, uniform(7)).bias == 0


def test_sampled_is_deterministic_given_seed():
    f = random_cnf(random.Random(2), 8, 2, 4)
    a = measure_bias(f, epsbiased(8, 0.3), "sampled", 2000, seed=11)
    b = measure_bias(f, epsbiased(8, 0.3), "sampled", 2000, seed=11)
    assert a.prg_expectation == b.prg_expectation


def test_bad_mode_and_trials():
    with pytest.raises(ValueError):
        measure_bias(np.ones(4, dtype=bool), uniform(2), "rough")
    with pytest.raises(ValueError):
        measure_bias(np.ones(4, dtype=bool), uniform(2), "sampled", trials=0)
    with pytest.raises(ValueError):
        switching_failure(switching_family(0), 2, 3, TrueRp(0.1), 0)


def test_bound_arithmetic():
    assert _bound("cdt", {"p": 1 / 20, "k": 2, "t": 3}) == pytest.approx(1 / 8)
    assert _bound("ccdt", {"M": 4, "t": 4, "ell": 2, "p": 2 ** -8, "k": 2}) == pytest.approx(1 / 16)
    naive = _bound("naive", {"eps": 0.1, "S": 8, "w": 6, "k": 3, "p": 0.25})
    assert naive == pytest.approx(0.05 + 8 * 20 / 64)
    assert set(FORMULAS) == {"ccdt", "derand", "cdt", "naive"}


def test_bound_is_recomputed_from_values():
    rep = SwitchingReport("f", "s", "cdt", {"p": 0.05, "k": 2, "t": 3}, 10, 0)
    assert rep.bound == pytest.approx(1 / 8)
    rep.values["t"] = 1
    assert rep.bound == pytest.approx(0.5)


def test_t_zero_is_vacuous():
    rep = switching_failure(switching_family(1), 2, 0, TrueRp(0.01), 50)
    assert rep.rate == 1 and rep.vacuous


def test_constant_family_never_fails():
    fam = CnfFamily((Cnf(6, 0, ()), Cnf(6, 0, ())))
    assert switching_failure(fam, 1, 1, TrueRp(0.5), 200).rate == 0
    assert single_switching_failure(Cnf(6, 0, ()), 1, 0.5, 200).rate == 0


def test_exhaustive_small_rp_is_exact():
    F = Cnf.from_lists(3, [[1, 2, 3]])
    rep = single_switching_failure(F, 3, 0.5, 27)
    assert rep.exhaustive and rep.sigma == 0
    # all three variables must stay alive
    assert rep.rate == pytest.approx(0.125)


def test_single_switching_on_corpus(rng):
    for _ in range(3):
        F = random_cnf(rng, 12, 2, 6, exact_width=True)
        rep = single_switching_failure(F, 3, 1 / 20, 5000, seed=rng.randint(0, 99))
        assert rep.verdict


def test_monomial_closed_form_matches_simulation():
    w, k, p = 6, 2, 0.5
    P = F2Polynomial(6, [range(6)])
    rep = naive_poly_failure(P, p, k, 40_000, seed=3)
    want = monomial_exceed_prob(w, k, p / 2)
    assert abs(rep.rate - want) <= 4 * math.sqrt(want * (1 - want) / rep.trials)


def test_low_degree_never_fails():
    P = F2Polynomial(6, [[0, 1], [2, 3], [4]])
    assert naive_poly_failure(P, 0.5, 2, 1000).rate == 0


def test_pseudo_source_width_checked():
    with pytest.raises(ValueError):
        switching_failure(switching_family(0), 2, 3, PseudoBits(kwise(10, 2), 6), 10)


def test_rp_law():
    assert check_rp_law().passed


def test_suite_errors():
    with pytest.raises(ValueError):
        run_suite("everything")
    with pytest.raises(ValueError):
        run_suite("switching", trials=0)


def test_encdec_suite_passes():
    (c,) = run_suite("encdec")
    assert c.passed and c.line() == "PASS encode_decode"


def test_small_oracle_suite():
    checks = run_oracle_suite(0, "small")
    assert [c.name for c in checks if not c.passed] == []
