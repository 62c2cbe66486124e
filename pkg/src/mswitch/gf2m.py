"""Arithmetic in GF(2^m) for 1 <= m <= 64, scalar and numpy-vectorised.

Field elements are ints whose bit j is the coefficient of x^j.  The modulus
for each m is a fixed low-weight irreducible polynomial; the test-suite
re-checks every entry with Rabin's irreducibility test.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

MAX_M = 64

# Exponents of the nonzero terms of the modulus, leading term first.
_MODULI = {
    1: (1, 0),
    2: (2, 1, 0), 3: (3, 1, 0), 4: (4, 1, 0), 5: (5, 2, 0), 6: (6, 1, 0),
    7: (7, 1, 0), 8: (8, 4, 3, 1, 0), 9: (9, 4, 0), 10: (10, 3, 0),
    11: (11, 2, 0), 12: (12, 3, 0), 13: (13, 4, 3, 1, 0), 14: (14, 5, 0),
    15: (15, 1, 0), 16: (16, 5, 3, 1, 0), 17: (17, 3, 0), 18: (18, 7, 0),
    19: (19, 5, 2, 1, 0), 20: (20, 3, 0), 21: (21, 2, 0), 22: (22, 1, 0),
    23: (23, 5, 0), 24: (24, 4, 3, 1, 0), 25: (25, 3, 0),
    26: (26, 4, 3, 1, 0), 27: (27, 5, 2, 1, 0), 28: (28, 1, 0),
    29: (29, 2, 0), 30: (30, 1, 0), 31: (31, 3, 0), 32: (32, 7, 3, 2, 0),
    33: (33, 10, 0), 34: (34, 7, 0), 35: (35, 2, 0), 36: (36, 9, 0),
    37: (37, 6, 4, 1, 0), 38: (38, 6, 5, 1, 0), 39: (39, 4, 0),
    40: (40, 5, 4, 3, 0), 41: (41, 3, 0), 42: (42, 7, 0),
    43: (43, 6, 4, 3, 0), 44: (44, 5, 0), 45: (45, 4, 3, 1, 0),
    46: (46, 1, 0), 47: (47, 5, 0), 48: (48, 5, 3, 2, 0), 49: (49, 9, 0),
    50: (50, 4, 3, 2, 0), 51: (51, 6, 3, 1, 0), 52: (52, 3, 0),
    53: (53, 6, 2, 1, 0), 54: (54, 9, 0), 55: (55, 7, 0),
    56: (56, 7, 4, 2, 0), 57: (57, 4, 0), 58: (58, 19, 0),
    59: (59, 7, 4, 2, 0), 60: (60, 1, 0), 61: (61, 5, 2, 1, 0),
    62: (62, 29, 0), 63: (63, 1, 0), 64: (64, 4, 3, 1, 0),
}


def modulus(m: int) -> int:
    if not 1 <= m <= MAX_M:
        raise ValueError(f"GF(2^m) supported for 1 <= m <= {MAX_M}, got m={m}")
    f = 0
    for e in _MODULI[m]:
        f |= 1 << e
    return f


def mul(a: int, b: int, m: int) -> int:
    f = modulus(m)
    top = 1 << m
    r = 0
    while b:
        if b & 1:
            r ^= a
        b >>= 1
        a <<= 1
        if a & top:
            a ^= f
    return r


def power(a: int, e: int, m: int) -> int:
    r = 1
    while e:
        if e & 1:
            r = mul(r, a, m)
        a = mul(a, a, m)
        e >>= 1
    return r


# ---- polynomial helpers over GF(2) (ints as coefficient vectors) -------------

def poly_mod(a: int, f: int) -> int:
    df = f.bit_length() - 1
    while a and a.bit_length() - 1 >= df:
        a ^= f << (a.bit_length() - 1 - df)
    return a


def poly_gcd(a: int, b: int) -> int:
    while b:
        a, b = b, poly_mod(a, b)
    return a


def _prime_factors(m: int) -> list[int]:
    out, d = [], 2
    while d * d <= m:
        if m % d == 0:
            out.append(d)
            while m % d == 0:
                m //= d
        d += 1
    if m > 1:
        out.append(m)
    return out


def is_irreducible(f: int) -> bool:
    """Rabin's test for a GF(2) polynomial given as a coefficient bitmask."""
    m = f.bit_length() - 1
    if m < 1:
        return False

    def mulmod(a, b):
        r = 0
        while b:
            if b & 1:
                r ^= a
            b >>= 1
            a <<= 1
            if (a >> m) & 1:
                a ^= f
        return r

    def x_pow_2k(k):
        x = 2 if m > 1 else poly_mod(2, f)
        for _ in range(k):
            x = mulmod(x, x)
        return x

    if x_pow_2k(m) != poly_mod(2, f):
        return False
    for p in _prime_factors(m):
        if poly_gcd(f, x_pow_2k(m // p) ^ poly_mod(2, f)) != 1:
            return False
    return True


# ---- vectorised arithmetic ---------------------------------------------------

@lru_cache(maxsize=None)
def mul_table(m: int) -> np.ndarray:
    """Full multiplication table for m <= 8."""
    if m > 8:
        raise ValueError("mul_table only for m <= 8")
    q = 1 << m
    t = np.zeros((q, q), dtype=np.uint8)
    for a in range(q):
        for b in range(q):
            t[a, b] = mul(a, b, m)
    return t


@lru_cache(maxsize=None)
def log_tables(m: int) -> tuple[np.ndarray, np.ndarray]:
    """(log, exp) tables w.r.t. a primitive element, for m <= 16."""
    if m > 16:
        raise ValueError("log tables only for m <= 16")
    order = (1 << m) - 1
    factors = _prime_factors(order) if order > 1 else []
    g = 2 if m > 1 else 1
    while any(power(g, order // p, m) == 1 for p in factors):
        g += 1
    exp = np.zeros(2 * order + 1, dtype=np.int64)
    log = np.zeros(1 << m, dtype=np.int64)
    x = 1
    for i in range(order):
        exp[i] = x
        log[x] = i
        x = mul(x, g, m)
    exp[order:2 * order] = exp[:order]
    return log, exp


def mul_array(a: np.ndarray, b: np.ndarray, m: int) -> np.ndarray:
    """Elementwise product of broadcastable integer arrays."""
    a = np.asarray(a)
    b = np.asarray(b)
    if m <= 8:
        return mul_table(m)[a.astype(np.intp), b.astype(np.intp)].astype(np.int64)
    if m <= 16:
        log, exp = log_tables(m)
        a = a.astype(np.int64)
        b = b.astype(np.int64)
        r = exp[log[a] + log[b]]
        return np.where((a == 0) | (b == 0), 0, r)
    # shift-and-add; uint64 holds m <= 64 since we reduce before the top bit is lost
    f = np.uint64(modulus(m) & ((1 << 64) - 1))
    topbit = np.uint64(1 << (m - 1))
    a = np.broadcast_to(np.asarray(a, dtype=np.uint64), np.broadcast(a, b).shape).copy()
    b = np.broadcast_to(np.asarray(b, dtype=np.uint64), a.shape).copy()
    r = np.zeros(a.shape, dtype=np.uint64)
    one = np.uint64(1)
    mask = np.uint64((1 << m) - 1) if m < 64 else np.uint64((1 << 64) - 1)
    for _ in range(m):
        r ^= np.where(b & one, a, np.uint64(0))
        b >>= one
        carry = (a & topbit) != 0
        a = (a << one) & mask
        a ^= np.where(carry, f & mask, np.uint64(0))
    return r
