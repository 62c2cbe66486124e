"""Seeded bit-string distributions and the bit-string-to-restriction map.

Outputs and seeds are ints: bit i of an output is coordinate i.  Every
distribution has an exact scalar generator; most also have a vectorised
batch sampler and an exact Fourier spectrum for small output lengths.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import gf2m
from .boolcore import Restriction

MAX_ENUM_BITS = 24
MAX_FOURIER_N = 16


class MaxAttemptsExceeded(RuntimeError):
    pass


def _parity(x: int) -> int:
    return x.bit_count() & 1


def _random_seeds(rng: np.random.Generator, r: int, count: int) -> list[int]:
    """count uniform r-bit ints."""
    if r == 0:
        return [0] * count
    words = (r + 63) // 64
    raw = rng.integers(0, 2 ** 63, size=(count, words), dtype=np.int64).astype(np.uint64) << np.uint64(1)
    raw |= rng.integers(0, 2, size=(count, words), dtype=np.int64).astype(np.uint64)
    out = []
    mask = (1 << r) - 1
    for row in raw:
        v = 0
        for w in row:
            v = (v << 64) | int(w)
        out.append(v & mask)
    return out


def bits_to_ints(bits: np.ndarray) -> np.ndarray:
    """(count, n) bool -> int64 (n <= 62), bit i = column i."""
    n = bits.shape[1]
    w = (np.int64(1) << np.arange(n, dtype=np.int64))
    return (bits.astype(np.int64) * w).sum(axis=1)


def pack_u64(bits: np.ndarray) -> np.ndarray:
    """(count, w) bool with w <= 64 -> uint64, bit i = column i."""
    w = bits.shape[1]
    if w > 64:
        raise ValueError("at most 64 columns fit a uint64")
    shifts = np.arange(w, dtype=np.uint64)
    return (bits.astype(np.uint64) << shifts).sum(axis=1, dtype=np.uint64)


def int_to_bits(x: int, width: int) -> np.ndarray:
    return np.array([(x >> i) & 1 for i in range(width)], dtype=bool)


def bits_to_int(bits) -> int:
    return sum(int(b) << i for i, b in enumerate(bits))


def random_seed_bits(rng: np.random.Generator, r: int, count: int) -> np.ndarray:
    return rng.integers(0, 2, size=(count, r), dtype=np.int8).astype(bool)


def walsh_hadamard(v: list[int]) -> list[int]:
    """Unnormalised integer WHT: out[S] = sum_x v[x] (-1)^{|S & x|}."""
    a = list(v)
    h = 1
    while h < len(a):
        for i in range(0, len(a), 2 * h):
            for j in range(i, i + h):
                x, y = a[j], a[j + h]
                a[j], a[j + h] = x + y, x - y
        h *= 2
    return a


class SeededDistribution:
    """Deterministic map from r-bit seeds to n_out-bit strings."""

    kind = "abstract"

    def __init__(self, n_out: int, r: int):
        self.n_out = n_out
        self.r = r

    def generate(self, seed: int) -> int:
        raise NotImplementedError

    def generate_bits(self, seed: int) -> list[int]:
        out = self.generate(seed)
        return [(out >> i) & 1 for i in range(self.n_out)]

    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        """(count, n_out) bool array of outputs on uniform seeds."""
        seeds = _random_seeds(rng, self.r, count)
        out = np.zeros((count, self.n_out), dtype=bool)
        for row, s in enumerate(seeds):
            o = self.generate(s)
            for i in range(self.n_out):
                out[row, i] = (o >> i) & 1
        return out

    def generate_batch(self, seed_bits: np.ndarray) -> np.ndarray:
        """(count, r) bool seeds, bit i of a seed in column i -> (count, n_out) bool outputs."""
        out = np.zeros((seed_bits.shape[0], self.n_out), dtype=bool)
        for row, bits in enumerate(seed_bits):
            out[row] = int_to_bits(self.generate(bits_to_int(bits)), self.n_out)
        return out

    def all_outputs(self) -> np.ndarray:
        """Outputs (as int64) for every seed in order; needs r <= MAX_ENUM_BITS and n_out <= 62."""
        if self.r > MAX_ENUM_BITS:
            raise ValueError(f"seed space 2^{self.r} too large to enumerate")
        return np.array([self.generate(s) for s in range(1 << self.r)], dtype=np.int64)

    def fourier(self) -> list[int]:
        """Numerators N_S with E[(-1)^{<S, out>}] = N_S / 2^r, for every S."""
        if self.n_out > MAX_FOURIER_N:
            raise ValueError(f"n_out={self.n_out} too large for an exact spectrum")
        counts = np.bincount(self.all_outputs(), minlength=1 << self.n_out)
        return walsh_hadamard([int(c) for c in counts])

    def descriptor(self) -> dict:
        return {"kind": self.kind, "n_out": self.n_out, "seed_bits": self.r}

    def __repr__(self):
        return f"{type(self).__name__}({self.descriptor()})"


class Uniform(SeededDistribution):
    """Identity generator: the seed is the output."""

    kind = "uniform"

    def __init__(self, n: int):
        super().__init__(n, n)

    def generate(self, seed: int) -> int:
        return seed & ((1 << self.n_out) - 1)

    def sample(self, rng, count):
        return rng.integers(0, 2, size=(count, self.n_out), dtype=np.int8).astype(bool)

    def generate_batch(self, seed_bits):
        return np.array(seed_bits[:, :self.n_out], dtype=bool)

    def all_outputs(self):
        if self.r > MAX_ENUM_BITS:
            raise ValueError(f"seed space 2^{self.r} too large to enumerate")
        return np.arange(1 << self.r, dtype=np.int64)

    def fourier(self):
        return [1 << self.r] + [0] * ((1 << self.n_out) - 1)


class KWise(SeededDistribution):
    """Evaluations of a random degree-(k-1) polynomial over GF(2^b) at points 0..n-1; bit 0 output."""

    kind = "kwise"

    def __init__(self, n: int, k: int):
        if n < 0 or k < 0:
            raise ValueError("n and k must be nonnegative")
        self.k = k
        self.b = max(1, math.ceil(math.log2(max(n, 2))))
        super().__init__(n, k * self.b)

    def coefficients(self, seed: int) -> list[int]:
        mask = (1 << self.b) - 1
        return [(seed >> (j * self.b)) & mask for j in range(self.k)]

    def generate(self, seed: int) -> int:
        c = self.coefficients(seed)
        out = 0
        for i in range(self.n_out):
            acc = 0
            for cj in reversed(c):
                acc = gf2m.mul(acc, i, self.b) ^ cj
            out |= (acc & 1) << i
        return out

    def _eval(self, coeffs: np.ndarray) -> np.ndarray:
        """coeffs: (count, k) ints -> (count, n_out) bool."""
        pts = np.arange(self.n_out, dtype=np.int64)[None, :]
        acc = np.zeros((coeffs.shape[0], self.n_out), dtype=np.int64)
        for j in range(self.k - 1, -1, -1):
            acc = gf2m.mul_array(acc, pts, self.b).astype(np.int64) ^ coeffs[:, j:j + 1].astype(np.int64)
        return (acc & 1).astype(bool)

    def sample(self, rng, count, chunk: int = 20000):
        out = np.empty((count, self.n_out), dtype=bool)
        for lo in range(0, count, chunk):
            hi = min(count, lo + chunk)
            coeffs = rng.integers(0, 1 << self.b, size=(hi - lo, self.k), dtype=np.int64)
            out[lo:hi] = self._eval(coeffs)
        return out

    def generate_batch(self, seed_bits):
        count = seed_bits.shape[0]
        if self.k == 0:
            return np.zeros((count, self.n_out), dtype=bool)
        w = (np.int64(1) << np.arange(self.b, dtype=np.int64))
        coeffs = (seed_bits[:, :self.r].reshape(count, self.k, self.b).astype(np.int64) * w).sum(axis=2)
        return self._eval(coeffs)

    def all_outputs(self):
        if self.r > MAX_ENUM_BITS:
            raise ValueError(f"seed space 2^{self.r} too large to enumerate")
        seeds = np.arange(1 << self.r, dtype=np.int64)
        mask = (1 << self.b) - 1
        coeffs = np.stack([(seeds >> (j * self.b)) & mask for j in range(self.k)], axis=1) \
            if self.k else np.zeros((len(seeds), 0), dtype=np.int64)
        return bits_to_ints(self._eval(coeffs))

    def descriptor(self):
        return {**super().descriptor(), "k": self.k, "field_bits": self.b}


class EpsBiased(SeededDistribution):
    """Powering construction: seed (x, y) in GF(2^m)^2, bit i = <x^i, y>."""

    kind = "epsbiased"

    def __init__(self, n: int, delta: float):
        if delta <= 0:
            raise ValueError("delta must be positive")
        self.delta = delta
        m = 1 if n <= 1 else math.ceil(math.log2((n - 1) / delta)) + 1
        m = max(m, 1)
        if m > gf2m.MAX_M:
            raise ValueError(
                f"delta={delta:g} at n={n} needs GF(2^{m}); the field table stops at m={gf2m.MAX_M}. "
                "Increase delta (or the fooled class's parameters) so that (n-1)/delta <= 2^63.")
        self.m = m
        super().__init__(n, 2 * m)

    @property
    def bias_bound(self) -> float:
        return (self.n_out - 1) / 2 ** self.m

    def generate(self, seed: int) -> int:
        mask = (1 << self.m) - 1
        x, y = seed & mask, (seed >> self.m) & mask
        out = 0
        acc = 1
        for i in range(self.n_out):
            out |= _parity(acc & y) << i
            acc = gf2m.mul(acc, x, self.m)
        return out

    def _eval(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        count = len(x)
        out = np.empty((count, self.n_out), dtype=bool)
        acc = np.ones(count, dtype=np.uint64)
        x = x.astype(np.uint64)
        y = y.astype(np.uint64)
        for i in range(self.n_out):
            v = acc & y
            # parity of a uint64 by folding
            for s in (32, 16, 8, 4, 2, 1):
                v ^= v >> np.uint64(s)
            out[:, i] = (v & np.uint64(1)).astype(bool)
            if i + 1 < self.n_out:
                acc = gf2m.mul_array(acc, x, self.m).astype(np.uint64)
        return out

    def _rand_elems(self, rng, count):
        if self.m <= 62:
            return rng.integers(0, 1 << self.m, size=count, dtype=np.int64).astype(np.uint64)
        hi = rng.integers(0, 1 << (self.m - 32), size=count, dtype=np.int64).astype(np.uint64)
        lo = rng.integers(0, 1 << 32, size=count, dtype=np.int64).astype(np.uint64)
        return (hi << np.uint64(32)) | lo

    def sample(self, rng, count, chunk: int = 50000):
        out = np.empty((count, self.n_out), dtype=bool)
        for lo in range(0, count, chunk):
            hi = min(count, lo + chunk)
            out[lo:hi] = self._eval(self._rand_elems(rng, hi - lo), self._rand_elems(rng, hi - lo))
        return out

    def generate_batch(self, seed_bits):
        return self._eval(pack_u64(seed_bits[:, :self.m]), pack_u64(seed_bits[:, self.m:2 * self.m]))

    def all_outputs(self):
        if self.r > MAX_ENUM_BITS:
            raise ValueError(f"seed space 2^{self.r} too large to enumerate")
        seeds = np.arange(1 << self.r, dtype=np.int64)
        mask = (1 << self.m) - 1
        return bits_to_ints(self._eval(seeds & mask, seeds >> self.m))

    def fourier(self):
        # E[(-1)^{<sum_{i in S} x^i, y>}] = Pr_x[sum_{i in S} x^i = 0] since y is uniform
        if self.n_out > MAX_FOURIER_N:
            raise ValueError(f"n_out={self.n_out} too large for an exact spectrum")
        if self.m > MAX_ENUM_BITS:
            raise ValueError(f"GF(2^{self.m}) too large to enumerate x")
        xs = np.arange(1 << self.m, dtype=np.uint64)
        pows = [np.ones_like(xs)]
        for _ in range(1, self.n_out):
            pows.append(gf2m.mul_array(pows[-1], xs, self.m).astype(np.uint64))
        N = 1 << self.n_out
        out = [0] * N
        acc = np.zeros_like(xs)
        prev = 0
        for g in range(N):
            gray = g ^ (g >> 1)
            if g:
                flip = (gray ^ prev).bit_length() - 1
                acc ^= pows[flip]
            prev = gray
            out[gray] = int(np.count_nonzero(acc == 0)) << self.m
        return out

    def descriptor(self):
        return {**super().descriptor(), "delta": self.delta, "field_bits": self.m,
                "bias_bound": self.bias_bound}


class XorSum(SeededDistribution):
    """Coordinatewise XOR of independent draws; seed is the concatenation."""

    kind = "sum"

    def __init__(self, parts: Sequence[SeededDistribution]):
        parts = list(parts)
        if not parts:
            raise ValueError("xor_sum needs at least one distribution")
        n = parts[0].n_out
        if any(d.n_out != n for d in parts):
            raise ValueError("all summands must share n_out")
        self.parts = parts
        super().__init__(n, sum(d.r for d in parts))

    def generate(self, seed: int) -> int:
        out = 0
        for d in self.parts:
            out ^= d.generate(seed & ((1 << d.r) - 1))
            seed >>= d.r
        return out

    def sample(self, rng, count):
        out = np.zeros((count, self.n_out), dtype=bool)
        for d in self.parts:
            out ^= d.sample(rng, count)
        return out

    def generate_batch(self, seed_bits):
        out = np.zeros((seed_bits.shape[0], self.n_out), dtype=bool)
        lo = 0
        for d in self.parts:
            out ^= d.generate_batch(seed_bits[:, lo:lo + d.r])
            lo += d.r
        return out

    def fourier(self):
        acc = None
        for d in self.parts:
            f = d.fourier()
            acc = f if acc is None else [a * b for a, b in zip(acc, f)]
        return acc

    def descriptor(self):
        return {**super().descriptor(), "parts": [d.descriptor() for d in self.parts]}


def kwise(n: int, k: int) -> KWise:
    return KWise(n, k)


def epsbiased(n: int, delta: float) -> EpsBiased:
    return EpsBiased(n, delta)


def xor_sum(ds: Sequence[SeededDistribution]) -> SeededDistribution:
    ds = list(ds)
    return ds[0] if len(ds) == 1 else XorSum(ds)


def uniform(n: int) -> Uniform:
    return Uniform(n)


# ---- exact spectra -----------------------------------------------------------

def output_distribution(d: SeededDistribution) -> tuple[list[int], int]:
    """(numerators, log2 denominator) of Pr[out = x] for every x."""
    f = d.fourier()
    return walsh_hadamard(f), d.r + d.n_out


def max_parity_bias(d: SeededDistribution) -> float:
    """max over nonempty S of |E[(-1)^{<S,out>}]|, exactly."""
    f = d.fourier()
    return max((abs(v) for v in f[1:]), default=0) / 2 ** d.r


# ---- restrictions from bits ---------------------------------------------------

@dataclass(frozen=True)
class BitstringRestrictionSpace:
    """Y_q: selector bits rho_{i,j} at position i*q + j, then value bits y_i at n*q + i."""

    n: int
    q: int

    def __post_init__(self):
        if self.q < 1:
            raise ValueError("q must be >= 1")

    @property
    def size(self) -> int:
        return self.n * self.q + self.n

    @property
    def p(self) -> float:
        return 2.0 ** -self.q

    def sel_index(self, i: int, j: int) -> int:
        return i * self.q + j

    def y_index(self, i: int) -> int:
        return self.n * self.q + i

    def var_bits(self, i: int) -> list[int]:
        """Input positions that determine coordinate i."""
        return [self.sel_index(i, j) for j in range(self.q)] + [self.y_index(i)]

    def star_mask(self, z: int) -> int:
        sel = (1 << self.q) - 1
        m = 0
        for i in range(self.n):
            if (z >> (i * self.q)) & sel == sel:
                m |= 1 << i
        return m

    def decode(self, z: int) -> Restriction:
        stars = self.star_mask(z)
        full = (1 << self.n) - 1
        fixed = full & ~stars
        y = (z >> (self.n * self.q)) & full
        return Restriction(self.n, fixed, y & fixed)

    def decode_batch(self, bits: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """(count, size) bool -> (fixed, value) int64 mask arrays."""
        n, q = self.n, self.q
        sel = bits[:, :n * q].reshape(-1, n, q).all(axis=2)
        y = bits[:, n * q:n * q + n]
        fixed = ~sel
        return bits_to_ints(fixed), bits_to_ints(fixed & y)


def restriction_from_bits(space: BitstringRestrictionSpace, varrho, y) -> Restriction:
    """varrho: n rows of q bits (or a flat list of n*q bits); y: n bits."""
    flat = _flatten_selectors(space, varrho)
    if len(y) != space.n:
        raise ValueError("y must have n bits")
    fixed = value = 0
    for i in range(space.n):
        if not all(flat[i * space.q:(i + 1) * space.q]):
            fixed |= 1 << i
            if y[i]:
                value |= 1 << i
    return Restriction(space.n, fixed, value)


def stars_from_bits(space: BitstringRestrictionSpace, varrho) -> set[int]:
    flat = _flatten_selectors(space, varrho)
    return {i for i in range(space.n) if all(flat[i * space.q:(i + 1) * space.q])}


def _flatten_selectors(space, varrho) -> list[int]:
    rows = list(varrho)
    if rows and isinstance(rows[0], (list, tuple)):
        flat = [int(b) for row in rows for b in row]
    else:
        flat = [int(b) for b in rows]
    if len(flat) != space.n * space.q:
        raise ValueError("need n*q selector bits")
    return flat


def sample_Rp(n: int, p: float, rng: random.Random | np.random.Generator) -> Restriction:
    """Each coordinate independently * w.p. p, else a uniform bit."""
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    if isinstance(rng, np.random.Generator):
        star = rng.random(n) < p
        bits = rng.integers(0, 2, size=n)
        pairs = [(i, int(bits[i])) for i in range(n) if not star[i]]
    else:
        pairs = [(i, rng.getrandbits(1)) for i in range(n) if not rng.random() < p]
    return Restriction.from_assignment(n, pairs)


def sample_Rp_batch(n: int, p: float, rng: np.random.Generator, count: int) -> tuple[np.ndarray, np.ndarray]:
    star = rng.random((count, n)) < p
    bits = rng.integers(0, 2, size=(count, n)).astype(bool)
    fixed = ~star
    return bits_to_ints(fixed), bits_to_ints(fixed & bits)


# ---- conditioning -------------------------------------------------------------

class ConditionalSampler:
    """Rejection sampling over seeds of ``d`` until ``predicate(output)`` holds."""

    def __init__(self, d: SeededDistribution, predicate: Callable[[int], bool], max_attempts: int = 10_000):
        self.d = d
        self.predicate = predicate
        self.max_attempts = max_attempts
        self.attempts = 0
        self.accepted = 0

    def sample(self, rng: np.random.Generator) -> int:
        for _ in range(self.max_attempts):
            self.attempts += 1
            out = self.d.generate(_random_seeds(rng, self.d.r, 1)[0])
            if self.predicate(out):
                self.accepted += 1
                return out
        raise MaxAttemptsExceeded(f"no accepted seed in {self.max_attempts} attempts")

    @property
    def observed_acceptance(self) -> float:
        return self.accepted / self.attempts if self.attempts else float("nan")

    def exact_acceptance(self) -> float:
        outs = self.d.all_outputs()
        return sum(1 for o in outs if self.predicate(int(o))) / len(outs)

    def accepted_outputs(self) -> list[int]:
        """Every accepted output, one per accepted seed (needs an enumerable seed space)."""
        return [int(o) for o in self.d.all_outputs() if self.predicate(int(o))]


def mix_condition(d: SeededDistribution, predicate: Callable[[int], bool],
                  max_attempts: int = 10_000) -> ConditionalSampler:
    return ConditionalSampler(d, predicate, max_attempts)


def conditional_parity_bias(d: SeededDistribution, predicate: Callable[[int], bool],
                            coords: Sequence[int]) -> float:
    """Exact max parity bias over nonempty subsets of ``coords`` after conditioning."""
    outs = [o for o in ConditionalSampler(d, predicate).accepted_outputs()]
    if not outs:
        raise MaxAttemptsExceeded("predicate never holds")
    proj = np.zeros(len(outs), dtype=np.int64)
    arr = np.array(outs, dtype=np.int64)
    for j, c in enumerate(coords):
        proj |= ((arr >> c) & 1) << j
    counts = np.bincount(proj, minlength=1 << len(coords))
    f = walsh_hadamard([int(c) for c in counts])
    return max((abs(v) for v in f[1:]), default=0) / len(outs)
