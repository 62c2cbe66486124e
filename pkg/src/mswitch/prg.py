"""Pseudorandom star samplers, the stage-by-stage composer, and the two end-to-end generators.

A star sampler acts on ``v`` local coordinates 0..v-1 and returns the star set
L as a bitmask.  The composer keeps the current live set V, maps local index j
to the j-th live coordinate, fixes L to a draw from the simple-class
distribution, and repeats.  Seeds are split into fixed per-stage slots sized for
the worst-case live count, so every seed has the same length and the generator
is total.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace
from functools import lru_cache
from typing import Callable

import numpy as np

from .boolcore import Cnf, CnfFamily, Clause, F2Polynomial, Literal, Restriction
from .cdt import ccdt_reaches
from .dist import (
    MaxAttemptsExceeded,
    SeededDistribution,
    bits_to_int,
    epsbiased,
    int_to_bits,
    kwise,
    random_seed_bits,
    uniform,
    xor_sum,
)

# odd multiplier for the conditioned seed walk; j -> j*C mod 2^s is a bijection
_WALK = 0x9E3779B97F4A7C15F39CC0605CEDC835


def default_r_hs(size: float, depth: int, delta: float, cap: int = 40) -> int:
    """min(cap, ceil(log2(size)^3 * log2(1/delta))); depth only enters through the caller's choice of size."""
    ls = math.log2(max(size, 2.0))
    ld = math.log2(1.0 / delta) if 0 < delta < 1 else 1.0
    return max(1, min(cap, math.ceil(ls ** 3 * ld)))


@dataclass(frozen=True)
class Params:
    """Stand-ins for the unspecified universal constants, at toy scale."""

    r_hs_cap: int = 40
    c_ac0: float = 1.0
    C_ac0: float = 1.0
    A_f2: float = 2.0
    B_f2: float = 2.0
    max_stages: int | None = None          # None: ceil(ln n / p)
    rejection_max_attempts: int = 10_000
    r_hs: Callable[[float, int, float], int] | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        for name in ("r_hs_cap", "c_ac0", "C_ac0", "A_f2", "B_f2", "rejection_max_attempts"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.max_stages is not None and self.max_stages < 1:
            raise ValueError("max_stages must be >= 1")

    def order(self, size: float, depth: int, delta: float) -> int:
        if self.r_hs is not None:
            return int(self.r_hs(size, depth, delta))
        return default_r_hs(size, depth, delta, self.r_hs_cap)

    def with_overrides(self, overrides: dict | None) -> "Params":
        if not overrides:
            return self
        unknown = set(overrides) - set(self.as_dict())
        if unknown:
            raise ValueError(f"unknown params: {sorted(unknown)}")
        return replace(self, **overrides)

    def as_dict(self) -> dict:
        d = asdict(self)
        d.pop("r_hs")
        return d


def independent_bits(n_out: int, k: int) -> SeededDistribution:
    """A k-wise independent source on n_out bits; uniform when that is no longer than the polynomial seed."""
    d = kwise(n_out, k)
    return uniform(n_out) if d.r >= n_out else d


# ---- star samplers -----------------------------------------------------------

class StarSampler:
    """Seed -> star set L within v local coordinates."""

    guarantee = "abstract"

    def __init__(self, v: int, s: int, p: float):
        self.v = v
        self.s = s
        self.p = p

    @property
    def min_size(self) -> int:
        """Smallest |L| the sampler can emit."""
        return 0

    def generate(self, seed: int) -> int:
        raise NotImplementedError

    def generate_batch(self, seed_bits: np.ndarray) -> np.ndarray:
        """(count, s) bool -> (count, v) bool star indicator."""
        raise NotImplementedError

    def try_generate(self, seed: int) -> int | None:
        return self.generate(seed)

    def try_batch(self, seed_bits: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return self.generate_batch(seed_bits), np.ones(seed_bits.shape[0], dtype=bool)

    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        return self.generate_batch(random_seed_bits(rng, self.s, count))

    def all_masks(self) -> np.ndarray:
        if self.s > 20:
            raise ValueError(f"seed space 2^{self.s} too large to enumerate")
        return np.array([self.generate(x) for x in range(1 << self.s)], dtype=np.int64)

    def descriptor(self) -> dict:
        return {"kind": self.guarantee, "v": self.v, "seed_bits": self.s, "p": self.p,
                "min_size": self.min_size}


class AllStars(StarSampler):
    """L = V; the degenerate p = 1 sampler."""

    guarantee = "all"

    def __init__(self, v: int):
        super().__init__(v, 0, 1.0)

    @property
    def min_size(self):
        return self.v

    def generate(self, seed):
        return (1 << self.v) - 1

    def generate_batch(self, seed_bits):
        return np.ones((seed_bits.shape[0], self.v), dtype=bool)


class SelectorStars(StarSampler):
    """i is a star iff its q selector bits (positions i*q .. i*q+q-1) are all 1."""

    guarantee = "selectors"

    def __init__(self, v: int, q: int, bits: SeededDistribution, r: int | None = None):
        if q < 1:
            raise ValueError("q must be >= 1")
        if bits.n_out != v * q:
            raise ValueError("selector source must emit v*q bits")
        super().__init__(v, bits.r, 2.0 ** -q)
        self.q = q
        self.bits = bits
        self.r = r

    def generate(self, seed):
        z = self.bits.generate(seed)
        sel = (1 << self.q) - 1
        return sum(1 << i for i in range(self.v) if (z >> (i * self.q)) & sel == sel)

    def generate_batch(self, seed_bits):
        z = self.bits.generate_batch(seed_bits)
        return z.reshape(-1, self.v, self.q).all(axis=2)

    def descriptor(self):
        return {**super().descriptor(), "q": self.q, "independence": self.r,
                "source": self.bits.descriptor()}


class IntersectionStars(StarSampler):
    """L = L_0 & L_1 & ... with independent seeds, concatenated in order."""

    guarantee = "intersection"

    def __init__(self, parts: list[StarSampler]):
        if not parts:
            raise ValueError("need at least one sampler")
        v = parts[0].v
        super().__init__(v, sum(s.s for s in parts), math.prod(s.p for s in parts))
        self.parts = parts

    def generate(self, seed):
        out = (1 << self.v) - 1
        for s in self.parts:
            out &= s.generate(seed & ((1 << s.s) - 1))
            seed >>= s.s
        return out

    def generate_batch(self, seed_bits):
        out = np.ones((seed_bits.shape[0], self.v), dtype=bool)
        lo = 0
        for s in self.parts:
            out &= s.generate_batch(seed_bits[:, lo:lo + s.s])
            lo += s.s
        return out

    def descriptor(self):
        return {**super().descriptor(), "stages": [s.descriptor() for s in self.parts]}


class ConditionedStars(StarSampler):
    """Keep only star sets with |L| >= threshold.

    The seeded generator walks seed ^ (j*C mod 2^s) for j = 0, 1, ... and takes
    the first accepted candidate, so the seed length is unchanged.  ``sample``
    is plain rejection sampling on fresh seeds and realises the exact
    conditional law.
    """

    guarantee = "conditioned"

    def __init__(self, base: StarSampler, threshold: float, max_attempts: int = 10_000):
        super().__init__(base.v, base.s, base.p)
        if threshold > base.v:
            raise ValueError(f"threshold {threshold} exceeds the {base.v} available coordinates")
        self.base = base
        self.threshold = threshold
        self.max_attempts = max_attempts
        self.attempts = 0
        self.accepted = 0

    @property
    def min_size(self):
        return max(self.base.min_size, math.ceil(self.threshold))

    def _budget(self) -> int:
        return min(self.max_attempts, 1 << self.s)

    def _offset(self, j: int) -> int:
        return (j * _WALK) & ((1 << self.s) - 1)

    def try_generate(self, seed):
        for j in range(self._budget()):
            L = self.base.generate(seed ^ self._offset(j))
            if L.bit_count() >= self.threshold:
                return L
        return None

    def generate(self, seed):
        L = self.try_generate(seed)
        if L is None:
            raise MaxAttemptsExceeded(f"no star set of size >= {self.threshold} within {self._budget()} candidates")
        return L

    def try_batch(self, seed_bits):
        count = seed_bits.shape[0]
        out = np.zeros((count, self.v), dtype=bool)
        ok = np.zeros(count, dtype=bool)
        pending = np.arange(count)
        for j in range(self._budget()):
            if not len(pending):
                break
            cand = seed_bits[pending] ^ int_to_bits(self._offset(j), self.s)
            L = self.base.generate_batch(cand)
            hit = L.sum(axis=1) >= self.threshold
            out[pending[hit]] = L[hit]
            ok[pending[hit]] = True
            pending = pending[~hit]
        return out, ok

    def generate_batch(self, seed_bits):
        out, ok = self.try_batch(seed_bits)
        if not ok.all():
            raise MaxAttemptsExceeded(f"{int((~ok).sum())} seeds found no star set of size >= {self.threshold}")
        return out

    def sample(self, rng, count):
        """True rejection sampling; attempts and acceptances are tallied."""
        out = np.zeros((count, self.v), dtype=bool)
        need = np.arange(count)
        tries = 0
        while len(need):
            if tries >= self.max_attempts:
                raise MaxAttemptsExceeded(f"rejection sampling gave up after {tries} rounds")
            L = self.base.sample(rng, len(need))
            hit = L.sum(axis=1) >= self.threshold
            self.attempts += len(need)
            self.accepted += int(hit.sum())
            out[need[hit]] = L[hit]
            need = need[~hit]
            tries += 1
        return out

    @property
    def observed_acceptance(self) -> float:
        return self.accepted / self.attempts if self.attempts else float("nan")

    def exact_acceptance(self) -> float:
        masks = self.base.all_masks()
        return float(np.mean([int(m).bit_count() >= self.threshold for m in masks]))

    @property
    def failure_inflation(self) -> float:
        """Conditioning on an event of probability >= p/2 inflates failure rates by at most 2/p."""
        return 2.0 / self.p

    def descriptor(self):
        return {**super().descriptor(), "threshold": self.threshold,
                "failure_inflation": self.failure_inflation, "base": self.base.descriptor()}


def stars_kwise(n: int, q: int, r: int) -> SelectorStars:
    """r-wise independent selector bits over the n x q grid; p = 2^-q when r >= q."""
    if r < q:
        raise ValueError(f"independence r={r} below q={q} breaks p-regularity")
    return SelectorStars(n, q, independent_bits(n * q, r), r)


def condition_min_stars(s: StarSampler, threshold: float | None = None,
                        max_attempts: int = 10_000) -> StarSampler:
    threshold = s.p * s.v / 2 if threshold is None else threshold
    if threshold <= 0:
        return s
    return ConditionedStars(s, threshold, max_attempts)


# ---- composition -------------------------------------------------------------

@dataclass(frozen=True)
class StageSlot:
    index: int
    v_max: int
    offset: int
    star_bits: int
    simple_bits: int
    final: bool = False

    @property
    def bits(self) -> int:
        return self.star_bits + self.simple_bits


class ComposedPrg(SeededDistribution):
    """Fix a pseudorandom star set to a simple-class draw, stage after stage."""

    kind = "composed"

    def __init__(self, n: int, stars: Callable[[int], StarSampler],
                 simple: Callable[[int], SeededDistribution], p: float,
                 params: Params | None = None, target: dict | None = None):
        if n < 1:
            raise ValueError("n must be >= 1")
        if not 0 < p <= 1:
            raise ValueError("p must lie in (0, 1]")
        self.params = params or Params()
        self.p = p
        self.target = target or {}
        self._stars = lru_cache(maxsize=None)(stars)
        self._simple = lru_cache(maxsize=None)(simple)
        self.stage_cap = self.params.max_stages or max(1, math.ceil(math.log(n) / p))
        self.slots = self._allocate(n)
        super().__init__(n, sum(s.bits for s in self.slots))

    def stars(self, v: int) -> StarSampler:
        return self._stars(v)

    def simple(self, v: int) -> SeededDistribution:
        return self._simple(v)

    def _allocate(self, n: int) -> list[StageSlot]:
        slots = []
        v, offset = n, 0
        for j in range(self.stage_cap):
            if v == 0:
                return slots
            sb = max(self.stars(u).s for u in range(1, v + 1))
            yb = max(self.simple(u).r for u in range(1, v + 1))
            slots.append(StageSlot(j, v, offset, sb, yb))
            offset += sb + yb
            # worst case over every live count a seed can have reached by now
            v = max(u - self.stars(u).min_size for u in range(1, v + 1))
        if v:
            yb = max(self.simple(u).r for u in range(1, v + 1))
            slots.append(StageSlot(self.stage_cap, v, offset, 0, yb, final=True))
        return slots

    @property
    def seed_length(self) -> int:
        return self.r

    @property
    def max_stage_count(self) -> int:
        return len(self.slots)

    def generate(self, seed: int) -> int:
        return self.trace(seed)[0]

    def trace(self, seed: int) -> tuple[int, list[int]]:
        """(output, live count before each stage that ran)."""
        live = list(range(self.n_out))
        out = 0
        counts = []
        for slot in self.slots:
            if not live:
                break
            v = len(live)
            counts.append(v)
            chunk = seed >> slot.offset
            y = self.simple(v).generate((chunk >> slot.star_bits) & ((1 << slot.simple_bits) - 1))
            if slot.final:
                L = (1 << v) - 1
            else:
                S = self.stars(v)
                L = S.try_generate(chunk & ((1 << S.s) - 1))
                if L is None:
                    L = (1 << v) - 1
            keep = []
            for j, c in enumerate(live):
                if (L >> j) & 1:
                    out |= ((y >> j) & 1) << c
                else:
                    keep.append(c)
            live = keep
        return out, counts

    def generate_batch(self, seed_bits: np.ndarray) -> np.ndarray:
        return self.trace_batch(seed_bits)[0]

    def trace_batch(self, seed_bits: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """(outputs, number of stages each seed used)."""
        count, n = seed_bits.shape[0], self.n_out
        live = np.ones((count, n), dtype=bool)
        out = np.zeros((count, n), dtype=bool)
        stages = np.zeros(count, dtype=np.int64)
        for slot in self.slots:
            sizes = live.sum(axis=1)
            if not sizes.any():
                break
            stages += sizes > 0
            for v in np.unique(sizes[sizes > 0]):
                v = int(v)
                rows = np.nonzero(sizes == v)[0]
                base = seed_bits[rows, slot.offset:slot.offset + slot.bits]
                D = self.simple(v)
                y = D.generate_batch(base[:, slot.star_bits:slot.star_bits + D.r])
                if slot.final:
                    L = np.ones((len(rows), v), dtype=bool)
                else:
                    S = self.stars(v)
                    L, ok = S.try_batch(base[:, :S.s])
                    L[~ok] = True
                coords = np.argsort(~live[rows], axis=1, kind="stable")[:, :v]
                fix = np.zeros((len(rows), n), dtype=bool)
                val = np.zeros((len(rows), n), dtype=bool)
                np.put_along_axis(fix, coords, L, axis=1)
                np.put_along_axis(val, coords, L & y, axis=1)
                out[rows] |= val
                live[rows] &= ~fix
        return out, stages

    def sample(self, rng, count, chunk: int = 20000):
        out = np.empty((count, self.n_out), dtype=bool)
        for lo in range(0, count, chunk):
            hi = min(count, lo + chunk)
            out[lo:hi] = self.generate_batch(random_seed_bits(rng, self.r, hi - lo))
        return out

    def descriptor(self) -> dict:
        return {
            **super().descriptor(),
            "target": self.target,
            "p": self.p,
            "stage_cap": self.stage_cap,
            "max_stage_count": self.max_stage_count,
            "stage_count_bound": self.stage_cap + 1,
            "params": self.params.as_dict(),
            "stages": [
                {"index": s.index, "v_max": s.v_max, "offset": s.offset, "star_bits": s.star_bits,
                 "simple_bits": s.simple_bits, "final": s.final,
                 "stars": None if s.final else self.stars(s.v_max).descriptor(),
                 "simple": self.simple(s.v_max).descriptor()}
                for s in self.slots
            ],
        }


def aw_compose(n: int, stars: Callable[[int], StarSampler], simple: Callable[[int], SeededDistribution],
               params: Params | None = None, p: float | None = None, target: dict | None = None) -> ComposedPrg:
    """``stars(v)`` and ``simple(v)`` are re-instantiated on each live count v."""
    p = stars(n).p if p is None else p
    return ComposedPrg(n, stars, simple, p, params, target)


# ---- the simple-class generator ------------------------------------------------

def fool_simple_delta(t: int, k: int, delta: float) -> float:
    """Per-summand bias (1/16) * delta^(2^(k-1)) * 4^(-t)."""
    return delta ** (2 ** (k - 1)) / 16 * 4.0 ** -t


def fool_simple_budget(n: int, t: int, k: int, delta: float) -> float:
    """k*(t + 2^k log2(1/delta)) + t log2 n with unit constants."""
    return k * (t + 2 ** k * math.log2(1 / delta)) + t * math.log2(max(n, 2))


def fool_simple_prg(n: int, t: int, k: int, delta: float) -> SeededDistribution:
    """XOR of k small-bias draws and one t-wise independent draw."""
    if t < 0 or k < 0:
        raise ValueError("t and k must be nonnegative")
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    parts: list[SeededDistribution] = []
    if k:
        d = fool_simple_delta(t, k, delta)
        if d <= 0 or not math.isfinite(math.log2(d)):
            raise ValueError(f"per-summand bias underflows at t={t}, k={k}, delta={delta:g}; "
                             "raise delta or lower t/k")
        try:
            parts += [epsbiased(n, d) for _ in range(k)]
        except ValueError as e:
            raise ValueError(f"per-summand bias {d:.3g} is too small to realise: {e}") from None
    if t or not parts:
        parts.append(independent_bits(n, t))
    return xor_sum(parts)


# ---- AC0 ---------------------------------------------------------------------

@dataclass(frozen=True)
class Ac0Plan:
    M: int
    d: int
    n: int
    eps1: float
    qs: tuple[int, ...]
    orders: tuple[int, ...]
    t: int

    @property
    def p(self) -> float:
        return 2.0 ** -sum(self.qs)

    def as_dict(self) -> dict:
        return {"M": self.M, "d": self.d, "n": self.n, "eps1": self.eps1, "qs": list(self.qs),
                "orders": list(self.orders), "t": self.t, "p": self.p}


def _log2(x: float) -> float:
    return math.log2(max(x, 2.0))


def ac0_plan(M: int, d: int, n: int, eps1: float, params: Params | None = None) -> Ac0Plan:
    params = params or Params()
    if d < 1 or M < 1 or n < 1:
        raise ValueError("M, d, n must be positive")
    if not 0 < eps1 < 1:
        raise ValueError("eps1 must lie in (0, 1)")
    ell = max(1, math.ceil(_log2(M)))
    t_stage = _log2(2 * d * M ** 5 / eps1)
    qs, orders = [], []
    for i in range(d):
        k = 1 if i == 0 else ell
        Q = n if i == 0 else (M if i == 1 else M * M)
        eps0 = eps1 / d if i == 0 else eps1 / (d * 2.0 ** min((2 ** i - 1) * t_stage, 1000))
        q = max(1, math.ceil(math.log2(params.c_ac0 * k))) if params.c_ac0 * k > 1 else 1
        size = M * (n ** ell + Q * 2 ** (k * q))
        delta = (eps0 / 2) / (M ** math.ceil(t_stage / ell) * n ** t_stage)
        qs.append(q)
        orders.append(max(q, params.order(size, 3, max(delta, 1e-300))))
    t = max(1, math.ceil(params.C_ac0 * 2 ** d * _log2(M / eps1)))
    return Ac0Plan(M, d, n, eps1, tuple(qs), tuple(orders), t)


def ac0_stars(M: int, d: int, n: int, eps1: float, params: Params | None = None) -> StarSampler:
    plan = ac0_plan(M, d, n, eps1, params)
    s = IntersectionStars([stars_kwise(n, q, r) for q, r in zip(plan.qs, plan.orders)])
    s.guarantee = "ac0-intersection"
    return s


def _ac0_p(M: int, d: int, params: Params) -> float:
    return ac0_plan(M, d, 2, 0.5, params).p


def ac0_prg(n: int, M: int, d: int, eps: float, params: Params | None = None) -> ComposedPrg:
    params = params or Params()
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    p = _ac0_p(M, d, params)
    eps1 = eps * p * p / (2 * math.log(max(n, 2)))
    plan = ac0_plan(M, d, n, eps1, params)

    def stars(v):
        return condition_min_stars(ac0_stars(M, d, v, eps1, params), max_attempts=params.rejection_max_attempts)

    def simple(v):
        return independent_bits(v, plan.t)

    return aw_compose(n, stars, simple, params, p,
                      target={"class": "ac0", "n": n, "M": M, "d": d, "eps": eps, "plan": plan.as_dict()})


# ---- sparse F2 polynomials -----------------------------------------------------

@dataclass(frozen=True)
class F2Plan:
    S: int
    n: int
    eps2: float
    ell: int
    q: int
    order: int
    t: int

    @property
    def p(self) -> float:
        return 2.0 ** -self.q

    def as_dict(self) -> dict:
        return {"S": self.S, "n": self.n, "eps2": self.eps2, "ell": self.ell, "q": self.q,
                "order": self.order, "t": self.t, "p": self.p}


def f2_plan(S: int, n: int, eps2: float, params: Params | None = None) -> F2Plan:
    params = params or Params()
    if S < 1 or n < 1:
        raise ValueError("S and n must be positive")
    if not 0 < eps2 < 1:
        raise ValueError("eps2 must lie in (0, 1)")
    root = math.sqrt(math.log2(S)) if S > 1 else 0.0
    ell = max(1, math.ceil(root))
    q = max(1, math.ceil(params.B_f2 * root))
    t = math.ceil(params.A_f2 * root) + math.ceil(math.log2(2 / eps2))
    size = S * (n ** ell + n * 2 ** q)
    delta = (eps2 / 2) / (S ** math.ceil(t / ell) * float(n) ** t)
    order = max(q, params.order(size, 3, max(delta, 1e-300)))
    return F2Plan(S, n, eps2, ell, q, order, t)


def f2_stars(S: int, n: int, eps2: float, params: Params | None = None) -> StarSampler:
    plan = f2_plan(S, n, eps2, params)
    s = stars_kwise(n, plan.q, plan.order)
    s.guarantee = "f2-selectors"
    return s


def monomial_family(P: F2Polynomial) -> CnfFamily:
    """Each monomial as a CNF of unit clauses (an AND gate)."""
    members = [Cnf(P.n, 1, tuple(Clause((Literal(v, False),)) for v in sorted(m)))
               for m in sorted(P.monomials, key=lambda m: (len(m), sorted(m)))]
    if not members:
        members = [Cnf(P.n, 1, ())]
    return CnfFamily(tuple(members), P.n)


def f2_simplifies(P: F2Polynomial, rho: Restriction, ell: int, t: int) -> bool:
    """True iff some depth < t common tree leaves every monomial with at most ell live variables."""
    return not ccdt_reaches(monomial_family(P), ell, t, rho)


def f2_prg(n: int, S: int, eps: float, params: Params | None = None) -> ComposedPrg:
    params = params or Params()
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    p = f2_plan(S, n, 0.5, params).p
    eps2 = eps * p * p / (2 * math.log(max(n, 2)))
    plan = f2_plan(S, n, eps2, params)
    k = plan.ell
    t = math.ceil(params.A_f2 * math.sqrt(math.log2(S))) + math.ceil(math.log2(1 / eps)) if S > 1 \
        else math.ceil(math.log2(1 / eps))
    delta_prg = eps * p / (2 * math.log(max(n, 2)))

    def stars(v):
        return condition_min_stars(f2_stars(S, v, eps2, params), max_attempts=params.rejection_max_attempts)

    def simple(v):
        return fool_simple_prg(v, t, k, delta_prg)

    return aw_compose(n, stars, simple, params, p,
                      target={"class": "f2", "n": n, "S": S, "eps": eps, "plan": plan.as_dict(),
                              "simple": {"t": t, "k": k, "delta": delta_prg}})
