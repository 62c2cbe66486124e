"""Measurement harness: fooling error, switching failure rates against their bounds, and the check suites.

Every suite returns a list of ``Check`` records; a suite passes iff all of its
checks pass.  Exhaustive checks have zero slack, Monte Carlo verdicts allow 3
standard errors.
"""

from __future__ import annotations

import itertools
import math
import random
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Sequence

import numpy as np

from . import oracles
from .badckt import bad_tables
from .boolcore import (
    Cnf,
    CnfFamily,
    F2Polynomial,
    Restriction,
    TruthTable,
    restrict_cnf,
    restrict_family,
    restrict_poly,
    truth_table,
)
from .cdt import CcdtContext, cdt_build, ccdt_leaf_restrictions, exceeds
from .dist import (
    MAX_ENUM_BITS,
    MAX_FOURIER_N,
    BitstringRestrictionSpace,
    SeededDistribution,
    bits_to_ints,
    conditional_parity_bias,
    epsbiased,
    kwise,
    max_parity_bias,
    output_distribution,
    random_seed_bits,
    sample_Rp_batch,
)
from .encdec import verify_counting_bound
from .prg import (
    ConditionedStars,
    Params,
    ac0_prg,
    condition_min_stars,
    f2_prg,
    fool_simple_prg,
    stars_kwise,
)

Z99 = 2.5758293035489004


# ---- corpora -------------------------------------------------------------------

def random_cnf(rng: random.Random, n: int, k: int, Q: int, exact_width: bool = False) -> Cnf:
    clauses = []
    for _ in range(Q):
        w = k if exact_width else rng.randint(1, k)
        vs = rng.sample(range(n), w)
        clauses.append([(v + 1) * rng.choice((1, -1)) for v in vs])
    return Cnf.from_lists(n, clauses, k=k)


def random_family(rng: random.Random, n: int, M: int, k: int, Q: int, exact_width: bool = False) -> CnfFamily:
    """M CNFs with 1..Q clauses each (exactly Q when ``exact_width``)."""
    return CnfFamily(tuple(random_cnf(rng, n, k, Q if exact_width else rng.randint(1, Q), exact_width)
                           for _ in range(M)))


def random_poly(rng: random.Random, n: int, S: int, max_deg: int) -> F2Polynomial:
    max_deg = min(max_deg, n)
    available = sum(math.comb(n, d) for d in range(1, max_deg + 1))
    if S > available:
        raise ValueError(f"only {available} distinct monomials of degree 1..{max_deg} over {n} variables")
    monos: set[frozenset[int]] = set()
    while len(monos) < S:
        monos.add(frozenset(rng.sample(range(n), rng.randint(1, max_deg))))
    return F2Polynomial(n, monos)


@dataclass(frozen=True)
class Depth2Circuit:
    """AND of ORs, or (``dnf``) OR of ANDs stored as the negation of the dual CNF."""

    cnf: Cnf
    dnf: bool = False

    @property
    def n(self) -> int:
        return self.cnf.n

    def evaluate_array(self, xs: np.ndarray) -> np.ndarray:
        v = self.cnf.evaluate_array(xs)
        return ~v if self.dnf else v

    def __str__(self):
        if not self.dnf:
            return str(self.cnf)
        return " | ".join("(" + " & ".join(str(lit.to_signed() * -1) for lit in c.literals) + ")"
                          for c in self.cnf.clauses)


def random_depth2(rng: random.Random, n: int, M: int, width: int) -> Depth2Circuit:
    """Size-M circuit: one top gate over M-1 bottom gates of fan-in 1..width."""
    return Depth2Circuit(random_cnf(rng, n, width, max(1, M - 1)), dnf=rng.random() < 0.5)


@dataclass(frozen=True)
class F2Tree:
    """Decision tree whose leaves are F2 polynomials; nodes are (var, lo, hi)."""

    n: int
    root: Any

    def _eval(self, node, xs):
        if isinstance(node, F2Polynomial):
            return node.evaluate_array(xs).astype(bool)
        v, lo, hi = node
        bit = ((xs >> v) & 1).astype(bool)
        return np.where(bit, self._eval(hi, xs), self._eval(lo, xs))

    def evaluate_array(self, xs: np.ndarray) -> np.ndarray:
        return self._eval(self.root, xs)

    def depth(self, node=None) -> int:
        node = self.root if node is None else node
        if isinstance(node, F2Polynomial):
            return 0
        return 1 + max(self.depth(node[1]), self.depth(node[2]))


def random_f2_tree(rng: random.Random, n: int, t: int, k: int, max_monos: int = 4) -> F2Tree:
    def leaf():
        monos = {frozenset(rng.sample(range(n), rng.randint(0, k))) for _ in range(rng.randint(1, max_monos))}
        return F2Polynomial(n, monos)

    def build(depth, used):
        if depth == 0:
            return leaf()
        v = rng.choice([u for u in range(n) if u not in used])
        return (v, build(depth - 1, used | {v}), build(depth - 1, used | {v}))

    return F2Tree(n, build(t, frozenset()))


# ---- fooling -------------------------------------------------------------------

def _table(f) -> np.ndarray:
    if isinstance(f, TruthTable):
        return f.bits
    if isinstance(f, np.ndarray):
        return f.astype(bool)
    return truth_table(f).bits


@dataclass
class BiasReport:
    function: str
    distribution: dict
    mode: str
    uniform_expectation: float
    prg_expectation: float
    bias: float
    ci_halfwidth: float = 0.0
    trials: int | None = None
    exact: str | None = None

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def exact_expectation(table: np.ndarray, d: SeededDistribution) -> Fraction:
    """E_{x<-d}[f(x)] exactly, by seed enumeration or from the output spectrum."""
    if d.r <= MAX_ENUM_BITS:
        outs = d.all_outputs()
        return Fraction(int(table[outs].sum()), 1 << d.r)
    if d.n_out <= MAX_FOURIER_N:
        nums, logden = output_distribution(d)
        return Fraction(sum(int(c) for c, b in zip(nums, table) if b), 1 << logden)
    raise ValueError(f"no exact method: seed {d.r} bits and n_out {d.n_out}")


def measure_bias(f, d: SeededDistribution, mode: str = "exact", trials: int = 100_000,
                 seed: int = 0, outputs: np.ndarray | None = None) -> BiasReport:
    """|E f(d) - E f(U)|; ``outputs`` (ints) may be shared across many f in sampled mode."""
    table = _table(f)
    if len(table) != 1 << d.n_out:
        raise ValueError("function and distribution disagree on n")
    u = Fraction(int(table.sum()), len(table))
    name = str(f) if not isinstance(f, (np.ndarray, TruthTable)) else "table"
    if mode == "exact":
        e = exact_expectation(table, d)
        return BiasReport(name, d.descriptor(), "exact", float(u), float(e), float(abs(e - u)),
                          exact=str(abs(e - u)))
    if mode != "sampled":
        raise ValueError(f"mode must be exact or sampled, got {mode!r}")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if outputs is None:
        outputs = bits_to_ints(d.sample(np.random.default_rng(seed), trials))
    vals = table[outputs]
    m = float(vals.mean())
    hw = Z99 * math.sqrt(max(m * (1 - m), 1e-300) / len(vals))
    return BiasReport(name, d.descriptor(), f"sampled({len(vals)})", float(u), m, abs(m - float(u)),
                      hw, len(vals))


# ---- switching -------------------------------------------------------------------

@dataclass(frozen=True)
class TrueRp:
    p: float


@dataclass(frozen=True)
class PseudoBits:
    dist: SeededDistribution
    q: int
    delta: float = 0.0


def _bound(formula: str, v: dict) -> float:
    if formula == "ccdt":
        return v["M"] ** math.ceil(v["t"] / v["ell"]) * (32 * v["p"] * v["k"]) ** v["t"]
    if formula == "derand":
        return 16 ** (v["t"] + v["ell"]) * v["M"] ** math.ceil(v["t"] / v["ell"]) * (32 * v["p"] * v["k"]) ** v["t"] \
            + v["delta"]
    if formula == "cdt":
        return (5 * v["p"] * v["k"]) ** v["t"]
    if formula == "naive":
        return v["eps"] / 2 + v["S"] * math.comb(v["w"], v["k"]) * v["p"] ** v["k"]
    raise ValueError(formula)


FORMULAS = {
    "ccdt": "M^ceil(t/ell) * (32 p k)^t",
    "derand": "16^(t+ell) * M^ceil(t/ell) * (32 p k)^t + delta",
    "cdt": "(5 p k)^t",
    "naive": "eps/2 + S * C(w, k) * p^k",
}


@dataclass
class SwitchingReport:
    family: str
    source: str
    formula: str
    values: dict
    trials: int
    failures: int
    exhaustive: bool = False
    rate_exact: str | None = None
    elapsed: float = 0.0

    @property
    def rate(self) -> float:
        return float(Fraction(self.rate_exact)) if self.rate_exact else self.failures / self.trials

    @property
    def sigma(self) -> float:
        if self.exhaustive:
            return 0.0
        r = self.rate
        return math.sqrt(r * (1 - r) / self.trials)

    @property
    def bound(self) -> float:
        # recomputed from the formula on every access
        return _bound(self.formula, self.values)

    @property
    def vacuous(self) -> bool:
        return self.bound >= 1

    @property
    def verdict(self) -> bool:
        return self.rate <= self.bound + 3 * self.sigma

    def as_dict(self) -> dict:
        return {"family": self.family, "source": self.source, "formula": FORMULAS[self.formula],
                "values": self.values, "trials": self.trials, "failures": self.failures,
                "exhaustive": self.exhaustive, "rate": self.rate, "sigma": self.sigma,
                "bound": self.bound, "vacuous": self.vacuous, "verdict": self.verdict,
                "elapsed_s": round(self.elapsed, 3)}


def _source_restrictions(n: int, source, trials: int, rng) -> tuple[np.ndarray, np.ndarray, np.ndarray | None]:
    """(fixed, value, weights or None) arrays; weights given when the source was enumerated exactly."""
    if isinstance(source, TrueRp):
        if n <= 10 and trials >= 3 ** n:
            rhos = list(oracles.all_restrictions(n))
            p = Fraction(source.p).limit_denominator(1 << 30)
            w = np.array([p ** r.num_stars() * ((1 - p) / 2) ** (n - r.num_stars()) for r in rhos], dtype=object)
            return (np.array([r.fixed for r in rhos], dtype=np.int64),
                    np.array([r.value for r in rhos], dtype=np.int64), w)
        f, v = sample_Rp_batch(n, source.p, rng, trials)
        return f, v, None
    space = BitstringRestrictionSpace(n, source.q)
    d = source.dist
    if d.n_out < space.size:
        raise ValueError(f"source emits {d.n_out} bits, need {space.size}")
    if d.r <= 20 and trials >= 1 << d.r:
        outs = d.all_outputs()
        bits = ((outs[:, None] >> np.arange(space.size)) & 1).astype(bool)
        f, v = space.decode_batch(bits)
        return f, v, np.array([Fraction(1, 1 << d.r)] * len(f), dtype=object)
    f, v = space.decode_batch(d.sample(rng, trials)[:, :space.size])
    return f, v, None


def _rate(hits: np.ndarray, weights) -> tuple[int, str | None]:
    if weights is None:
        return int(hits.sum()), None
    return int(hits.sum()), str(sum((w for w, h in zip(weights, hits) if h), Fraction(0)))


def switching_failure(fam: CnfFamily, ell: int, t: int, source, trials: int, seed: int = 0) -> SwitchingReport:
    """Estimate Pr[depth(CCDT_ell(fam restricted)) >= t] and compare to the matching bound."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    start = time.perf_counter()
    rng = np.random.default_rng(seed)
    fixed, value, weights = _source_restrictions(fam.n, source, trials, rng)
    ctx = CcdtContext(fam, ell)
    full = (1 << fam.n) - 1
    hits = np.zeros(len(fixed), dtype=bool)
    for idx in range(len(fixed)):
        f = int(fixed[idx])
        if t <= 0 or (full & ~f).bit_count() >= t:
            hits[idx] = ctx.reaches(f, int(value[idx]), t)
    failures, exact = _rate(hits, weights)
    k = fam.k
    if isinstance(source, TrueRp):
        formula, vals, src = "ccdt", {"M": fam.M, "t": t, "ell": ell, "p": source.p, "k": k}, f"R_p(p={source.p:g})"
    else:
        p = 2.0 ** -source.q
        formula = "derand"
        vals = {"M": fam.M, "t": t, "ell": ell, "p": p, "k": k, "delta": source.delta}
        src = f"bits(q={source.q}, {source.dist.kind}, seed_bits={source.dist.r})"
    return SwitchingReport(f"M={fam.M} n={fam.n} k={k}", src, formula, vals, len(fixed), failures,
                           weights is not None, exact, time.perf_counter() - start)


def single_switching_failure(F: Cnf, t: int, p: float, trials: int, seed: int = 0) -> SwitchingReport:
    """Pr[depth(CDT(F restricted by R_p)) >= t]."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    start = time.perf_counter()
    fixed, value, weights = _source_restrictions(F.n, TrueRp(p), trials, np.random.default_rng(seed))
    full = (1 << F.n) - 1
    memo: dict = {}
    hits = np.zeros(len(fixed), dtype=bool)
    for idx in range(len(fixed)):
        f = int(fixed[idx])
        if t <= 0:
            hits[idx] = True
        elif (full & ~f).bit_count() >= t:
            hits[idx] = exceeds(F, f, int(value[idx]), t - 1, memo)
    failures, exact = _rate(hits, weights)
    return SwitchingReport(f"Q={F.Q} n={F.n} k={F.k}", f"R_p(p={p:g})", "cdt",
                           {"p": p, "k": F.k, "t": t}, len(fixed), failures, weights is not None, exact,
                           time.perf_counter() - start)


def monomial_exceed_prob(w: int, k: int, p_star: float) -> float:
    """Pr[a width-w monomial under R_{p_star} survives with more than k live variables]."""
    fix = (1 - p_star) / 2
    return sum(math.comb(w, j) * p_star ** j * fix ** (w - j) for j in range(k + 1, w + 1))


def naive_poly_failure(P: F2Polynomial, p: float, k: int, trials: int, seed: int = 0,
                       eps: float = 0.1, w: int | None = None) -> SwitchingReport:
    """Two-phase restriction (stars w.p. 1/2, then w.p. p among survivors); rate of degree > k."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    start = time.perf_counter()
    rng = np.random.default_rng(seed)
    n = P.n
    s1 = rng.random((trials, n)) < 0.5
    s2 = rng.random((trials, n)) < p
    star = s1 & s2
    bits = rng.integers(0, 2, size=(trials, n)).astype(bool)
    fixed = bits_to_ints(~star)
    value = bits_to_ints(~star & bits)
    masks = [sum(1 << v for v in m) for m in P.monomials]
    widest = np.zeros(trials, dtype=np.int64)
    for m in masks:
        killed = (m & fixed & ~value) != 0
        live = np.array([int(x).bit_count() for x in (m & ~fixed)], dtype=np.int64)
        widest = np.maximum(widest, np.where(killed, 0, live))
    hits = np.zeros(trials, dtype=bool)
    for idx in np.nonzero(widest > k)[0]:
        rho = Restriction(n, int(fixed[idx]), int(value[idx]))
        hits[idx] = restrict_poly(P, rho).degree > k
    w = w if w is not None else max(k, math.ceil(math.log2(2 * P.sparsity / eps)))
    return SwitchingReport(f"S={P.sparsity} n={n} deg={P.degree}", f"two-phase(p={p:g})", "naive",
                           {"eps": eps, "S": P.sparsity, "w": w, "k": k, "p": p}, trials, int(hits.sum()),
                           elapsed=time.perf_counter() - start)


# ---- checks and suites -------------------------------------------------------------

@dataclass
class Check:
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)
    elapsed: float = 0.0

    def as_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "elapsed_s": round(self.elapsed, 3), "detail": self.detail}

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}"


def _timed(name: str, fn: Callable[[], tuple[bool, dict]]) -> Check:
    start = time.perf_counter()
    ok, detail = fn()
    return Check(name, bool(ok), detail, time.perf_counter() - start)


def check_cdt_truth_tables(seed: int, count: int = 200) -> Check:
    def run():
        rng = random.Random(seed)
        bad = []
        for i in range(count):
            n, k = rng.randint(1, 12), rng.randint(1, 3)
            F = random_cnf(rng, n, min(k, n), rng.randint(0, 8))
            T = cdt_build(F, n)
            if truth_table(T) != truth_table(F):
                bad.append(str(F))
        return not bad, {"instances": count, "mismatches": len(bad), "examples": bad[:3]}
    return _timed("cdt_truth_table", run)


def check_ccdt_soundness(seed: int, count: int = 50) -> Check:
    def run():
        rng = random.Random(seed)
        leaves = violations = 0
        for _ in range(count):
            n = rng.randint(2, 8)
            ell = rng.randint(1, 3)
            k = rng.randint(1, min(ell, n))
            fam = random_family(rng, n, rng.randint(1, 3), k, 4)
            for rho in ccdt_leaf_restrictions(fam, ell):
                leaves += 1
                if any(oracles.cdt_depth(restrict_cnf(F, rho)) > ell for F in fam.members):
                    violations += 1
        return violations == 0, {"instances": count, "leaves": leaves, "violations": violations}
    return _timed("ccdt_soundness", run)


def switching_family(seed: int) -> CnfFamily:
    return random_family(random.Random(seed), 16, 4, 2, 6, exact_width=True)


def check_switching(seed: int, trials: int = 100_000, ts=(3, 4, 5), qs=(6, 8), r: int = 40) -> list[Check]:
    fam = switching_family(seed)
    true_cells, pseudo_cells = [], []
    for q in qs:
        space = BitstringRestrictionSpace(fam.n, q)
        src = PseudoBits(kwise(space.size, r), q)
        for t in ts:
            a = switching_failure(fam, 2, t, TrueRp(2.0 ** -q), trials, seed + 1000 * q + t)
            b = switching_failure(fam, 2, t, src, trials, seed + 1000 * q + t + 500)
            true_cells.append(a)
            pseudo_cells.append(b)

    def crit3():
        rows = [c.as_dict() for c in true_cells]
        return all(c.verdict for c in true_cells if not c.vacuous), {"cells": rows}

    def crit4():
        rows = []
        ok = True
        for a, b in zip(true_cells, pseudo_cells):
            gap_sigma = math.sqrt(a.sigma ** 2 + b.sigma ** 2)
            sharper = b.rate <= a.rate + 3 * gap_sigma
            ok &= sharper and (b.vacuous or b.verdict)
            rows.append({**b.as_dict(), "true_rate": a.rate, "sharper_check": sharper})
        return ok, {"cells": rows, "r": r}

    c3, c4 = _timed("multi_switching_bound", crit3), _timed("derandomized_bound", crit4)
    c3.elapsed += sum(c.elapsed for c in true_cells)
    c4.elapsed += sum(c.elapsed for c in pseudo_cells)
    return [c3, c4]


def check_circuit(seed: int, ts=(1, 2, 3)) -> list[Check]:
    rng = random.Random(seed)
    n, q, ell = 4, 1, 1
    space = BitstringRestrictionSpace(n, q)
    fams = [random_family(rng, n, M, 1, 3) for M in (1, 2) for _ in range(2)]
    mismatches = few_sat_violations = bad_inputs = cases = 0
    start = time.perf_counter()
    worst = 0
    for fam in fams:
        ctx = CcdtContext(fam, ell)
        for t in ts:
            table, counts = bad_tables(fam, ell, t, space)
            cases += 1
            for z in range(1 << space.size):
                rho = space.decode(z)
                truth = ctx.reaches(rho.fixed, rho.value, t)
                if bool((table >> z) & 1) != truth:
                    mismatches += 1
                if truth:
                    bad_inputs += 1
                    c = int(counts[z])
                    worst = max(worst, c)
                    if not 1 <= c <= 16 ** (t + ell):
                        few_sat_violations += 1
    el = time.perf_counter() - start
    return [
        Check("circuit_biconditional", mismatches == 0,
              {"instances": cases, "inputs_each": 1 << space.size, "mismatches": mismatches}, el),
        Check("few_satisfied_traversals", few_sat_violations == 0 and bad_inputs > 0,
              {"bad_inputs": bad_inputs, "violations": few_sat_violations, "max_count": worst}, 0.0),
    ]


def encdec_families() -> list[CnfFamily]:
    F1 = Cnf.from_lists(4, [[1, 2], [3, 4], [-1, 3]])
    F2 = Cnf.from_lists(4, [[2, -4], [-3, 1], [1, 4]])
    return [CnfFamily((F1,)), CnfFamily((F1, F2))]


def check_encdec(ell: int = 2, t: int = 3, ps=(Fraction(1, 4), Fraction(1, 8))) -> Check:
    def run():
        rows = []
        for fam in encdec_families():
            for p in ps:
                rows.append(verify_counting_bound(fam, ell, t, p).as_dict())
        ok = all(r["passed"] and r["bad_count"] > 0 for r in rows)
        return ok, {"instances": rows}
    return _timed("encode_decode", run)


def check_distributions() -> list[Check]:
    def kw():
        cells = []
        ok = True
        for n in (1, 2, 5, 8, 11, 16):
            for k in (1, 2, 3):
                if k > n:
                    continue
                d = kwise(n, k)
                outs = d.all_outputs()
                good = True
                for S in itertools.combinations(range(n), k):
                    proj = np.zeros(len(outs), dtype=np.int64)
                    for j, c in enumerate(S):
                        proj |= ((outs >> c) & 1) << j
                    cnt = np.bincount(proj, minlength=1 << k)
                    if not (cnt == len(outs) >> k).all():
                        good = False
                        break
                ok &= good
                cells.append({"n": n, "k": k, "uniform": good})
        return ok, {"cells": cells}

    def eb():
        cells = []
        for n in (2, 4, 8, 12):
            for delta in (0.25, 0.1):
                b = max_parity_bias(epsbiased(n, delta))
                cells.append({"n": n, "delta": delta, "max_bias": b, "ok": b <= delta})
        return all(c["ok"] for c in cells), {"cells": cells}

    def cond():
        cells = []
        for n, delta in ((6, 0.25), (8, 0.25), (8, 0.1)):
            d = epsbiased(n, delta)
            actual = max_parity_bias(d)
            for i in (0, n - 1):
                for b in (0, 1):
                    others = [c for c in range(n) if c != i]
                    cb = conditional_parity_bias(d, lambda x, i=i, b=b: (x >> i) & 1 == b, others)
                    lim = 2 * actual / (1 - actual)
                    cells.append({"n": n, "delta": delta, "i": i, "b": b, "bias": actual,
                                  "conditioned": cb, "limit": lim, "ok": cb <= lim + 1e-12 and lim <= 4 * actual + 1e-12})
        return all(c["ok"] for c in cells), {"cells": cells}

    return [_timed("kwise_marginals", kw), _timed("epsbiased_bias", eb), _timed("conditioning_bias", cond)]


def check_fool_simple(seed: int, count: int = 50, n: int = 8, t: int = 2, k: int = 2, delta: float = 0.2) -> Check:
    def run():
        rng = random.Random(seed)
        d = fool_simple_prg(n, t, k, delta)
        nums, logden = output_distribution(d)
        probs = [Fraction(c, 1 << logden) for c in nums]
        worst = Fraction(0)
        for _ in range(count):
            T = random_f2_tree(rng, n, t, k)
            table = truth_table(T).bits
            e = sum((pr for pr, b in zip(probs, table) if b), Fraction(0))
            worst = max(worst, abs(e - Fraction(int(table.sum()), 1 << n)))
        return worst <= delta, {"corpus": count, "max_bias": float(worst), "delta": delta,
                                "seed_bits": d.r, "method": "exact output law from the component spectra",
                                "generator": d.descriptor()}
    return _timed("fool_simple", run)


def check_rp_law() -> Check:
    def run():
        cells = []
        ok = True
        for q in (1, 2):
            space = BitstringRestrictionSpace(3, q)
            N = 1 << space.size
            p = Fraction(1, 1 << q)
            law = {"*": p, 0: (1 - p) / 2, 1: (1 - p) / 2}
            one = [{s: 0 for s in law} for _ in range(3)]
            two = {}
            for z in range(N):
                rho = space.decode(z)
                vals = [rho[i] if rho[i] is not None else "*" for i in range(3)]
                for i, s in enumerate(vals):
                    one[i][s] += 1
                for i, j in ((0, 1), (0, 2), (1, 2)):
                    two[(i, j, vals[i], vals[j])] = two.get((i, j, vals[i], vals[j]), 0) + 1
            single_ok = all(Fraction(one[i][s], N) == law[s] for i in range(3) for s in law)
            pair_ok = all(Fraction(two.get((i, j, a, b), 0), N) == law[a] * law[b]
                          for i, j in ((0, 1), (0, 2), (1, 2)) for a in law for b in law)
            ok &= single_ok and pair_ok
            cells.append({"q": q, "inputs": N, "marginals_exact": single_ok, "pairs_independent": pair_ok})
        return ok, {"cells": cells}
    return _timed("rp_equivalence", run)


def check_conditioning(seed: int, trials: int = 20_000) -> Check:
    def run():
        rng = np.random.default_rng(seed)
        cells = []
        ok = True
        for n, q in ((12, 1), (12, 2), (12, 3), (8, 4), (16, 2)):
            base = stars_kwise(n, q, 2 * q)
            s = condition_min_stars(base)
            assert isinstance(s, ConditionedStars)
            L = s.sample(rng, trials)
            sizes = L.sum(axis=1)
            acc = s.observed_acceptance
            sigma = math.sqrt(acc * (1 - acc) / s.attempts)
            seeded = [int(m).bit_count() for m in (s.generate(x) for x in range(min(1 << s.s, 2048)))]
            never_small = sizes.min() >= s.threshold and min(seeded) >= s.threshold
            rate_ok = acc >= s.p / 2 - 3 * sigma
            ok &= never_small and rate_ok
            cells.append({"n": n, "q": q, "p": s.p, "threshold": s.threshold, "attempts": s.attempts,
                          "acceptance": acc, "sigma": sigma, "min_size": int(sizes.min()),
                          "min_size_seeded": min(seeded), "never_small": bool(never_small), "rate_ok": bool(rate_ok)})
        return ok, {"cells": cells}
    return _timed("conditioned_stars", run)


def prg_corpus(kind: str, seed: int, count: int = 100, n: int = 12, size: int = 8):
    rng = random.Random(seed)
    if kind == "ac0":
        return [random_depth2(rng, n, size, 3) for _ in range(count)]
    return [random_poly(rng, n, size, 4) for _ in range(count)]


def check_end_to_end(seed: int, trials: int = 100_000, count: int = 100, eps: float = 0.1,
                     params: Params | None = None) -> list[Check]:
    n = 12
    gens = {"ac0": ac0_prg(n, 8, 2, eps, params), "f2": f2_prg(n, 8, eps, params)}
    checks = []
    seed_rows = []
    for kind, g in gens.items():
        start = time.perf_counter()
        rng = np.random.default_rng(seed)
        outs = np.empty(trials, dtype=np.int64)
        stages = np.empty(trials, dtype=np.int64)
        for lo in range(0, trials, 20000):
            hi = min(trials, lo + 20000)
            o, st = g.trace_batch(random_seed_bits(rng, g.r, hi - lo))
            outs[lo:hi] = bits_to_ints(o)
            stages[lo:hi] = st
        reports = [measure_bias(f, g, "sampled", outputs=outs) for f in prg_corpus(kind, seed, count, n)]
        worst = max(reports, key=lambda r: r.bias)
        bound = g.stage_cap + 1
        ok = worst.bias <= eps and g.max_stage_count <= bound and int(stages.max()) <= bound
        checks.append(Check(f"end_to_end_bias_{kind}", ok, {
            "corpus": count, "trials": trials, "max_bias": worst.bias, "ci99_halfwidth": worst.ci_halfwidth,
            "eps": eps, "stage_count_max_observed": int(stages.max()), "stage_slots": g.max_stage_count,
            "stage_count_bound": bound, "seed_bits": g.r, "descriptor": g.descriptor()},
            time.perf_counter() - start))
        seed_rows.append({"class": kind, "seed_bits": g.r, "limit": n * n})
    checks.append(Check("end_to_end_seed_length", all(r["seed_bits"] < r["limit"] for r in seed_rows),
                        {"rows": seed_rows, "limit_rule": "n * n (n times the trivial seed length n)"}))
    return checks


SUITES = ("fooling", "switching", "encdec", "circuit", "all")


def run_suite(name: str, seed: int = 7, trials: int | None = None, params: Params | None = None) -> list[Check]:
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    if trials is not None and trials < 1:
        raise ValueError("trials must be >= 1")
    out: list[Check] = []
    if name in ("circuit", "all"):
        out += [check_cdt_truth_tables(seed), check_ccdt_soundness(seed)] + check_circuit(seed)
    if name in ("switching", "all"):
        out += check_switching(seed, trials or 100_000)
    if name in ("encdec", "all"):
        out.append(check_encdec())
    if name in ("fooling", "all"):
        out += check_distributions()
        out += [check_fool_simple(seed), check_rp_law(), check_conditioning(seed)]
        out += check_end_to_end(seed, trials or 100_000, params=params)
    return out


def run_oracle_suite(seed: int = 0, budget: str = "small") -> list[Check]:
    """Cross-module oracles at reduced scale ("small") or the acceptance scale ("full")."""
    if budget not in ("small", "full"):
        raise ValueError("budget must be small or full")
    small = budget == "small"

    def ccdt_vs_brute():
        rng = random.Random(seed)
        mism = total = 0
        for _ in range(10 if small else 40):
            n = rng.randint(2, 5)
            ell = rng.randint(1, 2)
            fam = random_family(rng, n, rng.randint(1, 2), rng.randint(1, ell), 3)
            ctx = CcdtContext(fam, ell)
            for rho in oracles.all_restrictions(n):
                for t in (1, 2, 3):
                    total += 1
                    brute = oracles.ccdt_reaches(restrict_family(fam, rho), ell, t)
                    mism += brute != ctx.reaches(rho.fixed, rho.value, t)
        return mism == 0, {"comparisons": total, "mismatches": mism}

    checks = [
        check_cdt_truth_tables(seed, 40 if small else 200),
        _timed("ccdt_vs_brute_force", ccdt_vs_brute),
        check_circuit(seed, (1, 2) if small else (1, 2, 3))[0],
        check_encdec(),
        check_rp_law(),
    ]
    return checks

