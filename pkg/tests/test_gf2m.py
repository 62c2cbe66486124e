import numpy as np
import pytest

from mswitch import gf2m


def trial_division_irreducible(f: int) -> bool:
    m = f.bit_length() - 1
    for g in range(2, 1 << (m // 2 + 1)):
        if gf2m.poly_mod(f, g) == 0 and g.bit_length() - 1 >= 1:
            return False
    return True


@pytest.mark.parametrize("m", range(1, gf2m.MAX_M + 1))
def test_modulus_irreducible(m):
    f = gf2m.modulus(m)
    assert f.bit_length() - 1 == m
    assert gf2m.is_irreducible(f)


@pytest.mark.parametrize("m", range(1, 17))
def test_rabin_matches_trial_division(m):
    assert trial_division_irreducible(gf2m.modulus(m))
    reducible = gf2m.modulus(m) ^ 1 if m > 1 else 0b100
    assert gf2m.is_irreducible(reducible) == trial_division_irreducible(reducible)


@pytest.mark.parametrize("m", [3, 8, 13])
def test_nonzero_elements_satisfy_fermat(m):
    one = 1
    for a in range(1, 1 << m):
        assert gf2m.power(a, (1 << m) - 1, m) == one


@pytest.mark.parametrize("m", [5, 16, 33, 64])
def test_vector_mul_matches_scalar(m):
    rng = np.random.default_rng(m)
    hi = (1 << min(m, 63)) - 1
    a = rng.integers(0, hi, size=200, dtype=np.int64, endpoint=True)
    b = rng.integers(0, hi, size=200, dtype=np.int64, endpoint=True)
    if m == 64:
        a = a.astype(np.uint64)
        b = b.astype(np.uint64)
    got = gf2m.mul_array(a, b, m)
    assert [int(x) for x in got] == [gf2m.mul(int(x), int(y), m) for x, y in zip(a, b)]


def test_mul_is_commutative_and_distributive():
    m = 7
    for a in range(0, 128, 9):
        for b in range(0, 128, 11):
            assert gf2m.mul(a, b, m) == gf2m.mul(b, a, m)
            assert gf2m.mul(a, b ^ 5, m) == gf2m.mul(a, b, m) ^ gf2m.mul(a, 5, m)
