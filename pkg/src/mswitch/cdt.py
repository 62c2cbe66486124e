"""Canonical decision trees, full paths, canonical common partial trees and traversals.

Internally everything runs on (fixed, value) bitmask pairs against the
*original* clause list, so clause indices stay aligned with the input CNF.
Within a clause, surviving variables are queried in the order the literals
are written.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass
from typing import Callable, Iterator, Sequence

import numpy as np

from .boolcore import (
    Cnf,
    CnfFamily,
    F2Polynomial,
    Literal,
    Restriction,
    Status,
    restrict_family,
)

ZERO = -1
ONE = -2


class Exceeded:
    """Sentinel returned by cdt_build when some path would pass the depth cap."""

    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self):
        return "Exceeded"


EXCEEDED = Exceeded()


@dataclass(frozen=True)
class ExceedsCap:
    cap: int


# ---- low level scanning -------------------------------------------------------

def _compiled(F: Cnf):
    c = F.__dict__.get("_compiled")
    if c is None:
        rows = []
        for cl, (pos, neg) in zip(F.clauses, F.masks):
            code = {Status.ACTIVE: 0, Status.SATISFIED: 1, Status.FALSIFIED: 2}[cl.status]
            rows.append((code, pos, neg, pos | neg, cl.literals))
        c = tuple(rows)
        object.__setattr__(F, "_compiled", c)
    return c


def scan(F: Cnf, fixed: int, value: int) -> int:
    """ZERO if some clause is falsified, ONE if all satisfied, else first open clause."""
    first = ONE
    for idx, (code, pos, neg, vm, _) in enumerate(_compiled(F)):
        if code == 1:
            continue
        if code == 2:
            return ZERO
        if (pos & fixed & value) or (neg & fixed & ~value):
            continue
        if not (vm & ~fixed):
            return ZERO
        if first == ONE:
            first = idx
    return first


def survivors(F: Cnf, idx: int, fixed: int) -> list[Literal]:
    return [lit for lit in _compiled(F)[idx][4] if not (fixed >> lit.var) & 1]


def _assignments(vars_: Sequence[int]) -> list[int]:
    """Value masks for all 2^len assignments, lexicographic with vars_[0] most significant."""
    out = []
    for bits in itertools.product((0, 1), repeat=len(vars_)):
        m = 0
        for v, b in zip(vars_, bits):
            if b:
                m |= 1 << v
        out.append(m)
    return out


def _mask(vars_: Sequence[int]) -> int:
    m = 0
    for v in vars_:
        m |= 1 << v
    return m


def exceeds(F: Cnf, fixed: int, value: int, budget: int, memo: dict | None = None) -> bool:
    """True iff CDT(F restricted by (fixed, value)) has depth > budget."""
    if memo is not None:
        key = (id(F), fixed, value, budget)
        hit = memo.get(key)
        if hit is not None:
            return hit
    s = scan(F, fixed, value)
    if s < 0:
        res = False
    else:
        vs = [lit.var for lit in survivors(F, s, fixed)]
        kappa = len(vs)
        if kappa > budget:
            res = True
        else:
            vm = _mask(vs)
            res = any(exceeds(F, fixed | vm, value | a, budget - kappa, memo) for a in _assignments(vs))
    if memo is not None:
        memo[key] = res
    return res


def pending_exceeds(F: Cnf, fixed: int, value: int, pending: Sequence[int], budget: int,
                    memo: dict | None = None) -> bool:
    """Depth > budget for the CDT subtree that must first query ``pending`` unconditionally."""
    if len(pending) > budget:
        return True
    if not pending:
        return exceeds(F, fixed, value, budget, memo)
    vm = _mask(pending)
    rest = budget - len(pending)
    return any(exceeds(F, fixed | vm, value | a, rest, memo) for a in _assignments(pending))


# ---- trees ---------------------------------------------------------------------

@dataclass(frozen=True)
class Constant:
    bit: int


@dataclass(frozen=True)
class ResidualFamily:
    family: CnfFamily


@dataclass(frozen=True)
class ResidualPoly:
    poly: F2Polynomial


@dataclass(frozen=True)
class Leaf:
    content: Constant | ResidualFamily | ResidualPoly


@dataclass(frozen=True)
class Node:
    var: int
    lo: "Leaf | Node"
    hi: "Leaf | Node"


def _depth(t) -> int:
    if isinstance(t, Leaf):
        return 0
    return 1 + max(_depth(t.lo), _depth(t.hi))


def _to_text(t) -> str:
    if isinstance(t, Leaf):
        c = t.content
        if isinstance(c, Constant):
            return str(c.bit)
        if isinstance(c, ResidualPoly):
            return "{" + str(c.poly) + "}"
        return "{" + "; ".join(str(F) for F in c.family.members) + "}"
    return f"(x{t.var} {_to_text(t.lo)} {_to_text(t.hi)})"


class PartialDecisionTree:
    def __init__(self, root, n: int):
        self.root = root
        self.n = n
        self._check(root, 0)

    def _check(self, t, seen: int):
        if isinstance(t, Node):
            if (seen >> t.var) & 1:
                raise ValueError(f"variable x{t.var} repeats on a path")
            self._check(t.lo, seen | 1 << t.var)
            self._check(t.hi, seen | 1 << t.var)

    @property
    def depth(self) -> int:
        return _depth(self.root)

    def leaves(self) -> Iterator[tuple["PathAssignment", Leaf]]:
        def rec(t, path):
            if isinstance(t, Leaf):
                yield PathAssignment(tuple(path)), t
            else:
                yield from rec(t.lo, path + [(t.var, 0)])
                yield from rec(t.hi, path + [(t.var, 1)])
        yield from rec(self.root, [])

    def _leaf_value(self, leaf: Leaf, x: int) -> int:
        c = leaf.content
        if isinstance(c, Constant):
            return c.bit
        if isinstance(c, ResidualPoly):
            return c.poly.evaluate(x)
        raise TypeError("leaves holding a family have no single value")

    def evaluate(self, x: int) -> int:
        t = self.root
        while isinstance(t, Node):
            t = t.hi if (x >> t.var) & 1 else t.lo
        return self._leaf_value(t, x)

    def evaluate_array(self, xs: np.ndarray) -> np.ndarray:
        out = np.zeros(xs.shape, dtype=bool)

        def rec(t, sel):
            if not sel.any():
                return
            if isinstance(t, Leaf):
                c = t.content
                if isinstance(c, Constant):
                    out[sel] = bool(c.bit)
                elif isinstance(c, ResidualPoly):
                    out[sel] = c.poly.evaluate_array(xs[sel])
                else:
                    raise TypeError("leaves holding a family have no single value")
                return
            bit = ((xs >> t.var) & 1).astype(bool)
            rec(t.lo, sel & ~bit)
            rec(t.hi, sel & bit)

        rec(self.root, np.ones(xs.shape, dtype=bool))
        return out

    def to_text(self) -> str:
        return _to_text(self.root)

    def __eq__(self, other):
        return isinstance(other, PartialDecisionTree) and self.n == other.n and self.root == other.root

    def __hash__(self):
        return hash((self.n, self.root))


class _Cap(Exception):
    pass


def cdt_build(F: Cnf, depth_cap: int) -> PartialDecisionTree | Exceeded:
    if depth_cap < 0:
        raise ValueError("depth_cap must be >= 0")

    def build(fixed, value, budget):
        s = scan(F, fixed, value)
        if s == ZERO:
            return Leaf(Constant(0))
        if s == ONE:
            return Leaf(Constant(1))
        vs = [lit.var for lit in survivors(F, s, fixed)]
        if len(vs) > budget:
            raise _Cap
        return block(vs, 0, fixed, value, budget - len(vs))

    def block(vs, i, fixed, value, rest):
        if i == len(vs):
            return build(fixed, value, rest)
        v = vs[i]
        return Node(v,
                    block(vs, i + 1, fixed | 1 << v, value, rest),
                    block(vs, i + 1, fixed | 1 << v, value | 1 << v, rest))

    try:
        return PartialDecisionTree(build(0, 0, depth_cap), F.n)
    except _Cap:
        return EXCEEDED


def cdt_depth_exceeds(F: Cnf, ell: int) -> bool:
    return exceeds(F, 0, 0, ell, {})


def cdt_depth(F: Cnf) -> int:
    t = cdt_build(F, F.n)
    return t.depth


# ---- paths -----------------------------------------------------------------------

@dataclass(frozen=True)
class PathAssignment:
    entries: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple((int(v), int(b)) for v, b in self.entries))
        vs = [v for v, _ in self.entries]
        if len(set(vs)) != len(vs):
            raise ValueError("path assigns a variable twice")

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    @property
    def vars(self) -> tuple[int, ...]:
        return tuple(v for v, _ in self.entries)

    @property
    def var_mask(self) -> int:
        return _mask(self.vars)

    @property
    def value_mask(self) -> int:
        return _mask([v for v, b in self.entries if b])

    def as_restriction(self, n: int) -> Restriction:
        return Restriction(n, self.var_mask, self.value_mask)

    def __add__(self, other: "PathAssignment") -> "PathAssignment":
        return PathAssignment(self.entries + other.entries)

    def __str__(self):
        return ",".join(f"x{v}={b}" for v, b in self.entries)


@dataclass(frozen=True)
class SegmentedPath:
    segments: tuple[PathAssignment, ...]
    clause_chunks: tuple[tuple[tuple[int, PathAssignment], ...], ...]

    def __post_init__(self):
        seen = 0
        for seg in self.segments:
            if seg.var_mask & seen:
                raise ValueError("segments overlap")
            seen |= seg.var_mask
        if len(self.clause_chunks) != len(self.segments):
            raise ValueError("one chunk list per segment required")
        for seg, chunks in zip(self.segments, self.clause_chunks):
            if sum((c for _, c in chunks), PathAssignment()) != seg:
                raise ValueError("chunks must concatenate to their segment")

    @classmethod
    def from_chunks(cls, chunks: Sequence[tuple[int, PathAssignment]]) -> "SegmentedPath":
        """One segment per clause block, as in a CDT path."""
        return cls(tuple(c for _, c in chunks), tuple(((i, c),) for i, c in chunks))

    @property
    def assignment(self) -> PathAssignment:
        return sum(self.segments, PathAssignment())

    @property
    def chunks(self) -> list[tuple[int, PathAssignment]]:
        return [ch for seg in self.clause_chunks for ch in seg]

    def __len__(self):
        return sum(len(s) for s in self.segments)

    def __str__(self):
        return " | ".join(str(s) for s in self.segments)


def _full_paths(F: Cnf, fixed: int, value: int, lo: int, hi: int):
    """Yield chunk lists of full CDT paths from (fixed, value) with length in [lo, hi].

    Preorder: a path comes before its extensions.
    """
    def walk(fixed, value, length, chunks):
        s = scan(F, fixed, value)
        if s < 0:
            return
        vs = [lit.var for lit in survivors(F, s, fixed)]
        L = length + len(vs)
        if L > hi:
            return
        vm = _mask(vs)
        for bits in itertools.product((0, 1), repeat=len(vs)):
            a = _mask([v for v, b in zip(vs, bits) if b])
            nc = chunks + [(s, PathAssignment(tuple(zip(vs, bits))))]
            if L >= lo:
                yield nc
            if L < hi:
                yield from walk(fixed | vm, value | a, L, nc)

    yield from walk(fixed, value, 0, [])


def enumerate_witnessing_full_paths(F: Cnf, ell: int) -> list[SegmentedPath]:
    if not cdt_depth_exceeds(F, ell):
        raise ValueError("CDT depth is at most ell; no witnessing full paths")
    return [SegmentedPath.from_chunks(ch) for ch in _full_paths(F, 0, 0, ell + 1, ell + F.k)]


# ---- canonical common partial decision trees ----------------------------------

def _warn_small_ell(fam: CnfFamily, ell: int):
    if ell < fam.k:
        warnings.warn(f"ell={ell} < k={fam.k}: the multi-switching bounds assume ell >= k",
                      stacklevel=3)


class CcdtContext:
    """Memoised CCDT recursion for a fixed family and ell."""

    def __init__(self, fam: CnfFamily, ell: int):
        self.fam = fam
        self.ell = ell
        self.full = (1 << fam.n) - 1
        self._ex: dict = {}
        self._reach: dict = {}
        self._paths: dict = {}

    def deep(self, i: int, fixed: int, value: int) -> bool:
        return exceeds(self.fam.members[i], fixed, value, self.ell, self._ex)

    def first_deep(self, fixed: int, value: int, start: int = 0) -> int | None:
        for i in range(start, self.fam.M):
            if self.deep(i, fixed, value):
                return i
        return None

    def paths(self, i: int, fixed: int, value: int):
        key = (i, fixed, value)
        p = self._paths.get(key)
        if p is None:
            F = self.fam.members[i]
            p = list(_full_paths(F, fixed, value, self.ell + 1, self.ell + F.k))
            self._paths[key] = p
        return p

    def reaches(self, fixed: int, value: int, t: int) -> bool:
        if t <= 0:
            return True
        if (self.full & ~fixed).bit_count() < t:
            return False
        key = (fixed, value, t)
        hit = self._reach.get(key)
        if hit is not None:
            return hit
        res = False
        i = self.first_deep(fixed, value)
        if i is not None:
            for chunks in self.paths(i, fixed, value):
                L = sum(len(c) for _, c in chunks)
                if L >= t:
                    res = True
                    break
                vs = [v for _, c in chunks for v in c.vars]
                vm = _mask(vs)
                if any(self.reaches(fixed | vm, value | a, t - L) for a in _assignments(vs)):
                    res = True
                    break
        self._reach[key] = res
        return res

    def depth(self, fixed: int, value: int, cap: int) -> int | ExceedsCap:
        t = 0
        while t <= cap and self.reaches(fixed, value, t + 1):
            t += 1
        return ExceedsCap(cap) if t > cap else t


def ccdt_reaches(fam: CnfFamily, ell: int, t: int, rho: Restriction | None = None) -> bool:
    """depth(CCDT_ell(fam restricted by rho)) >= t."""
    if t <= 0:
        return True
    if fam.M == 0:
        return False
    _warn_small_ell(fam, ell)
    fixed, value = (rho.fixed, rho.value) if rho is not None else (0, 0)
    return CcdtContext(fam, ell).reaches(fixed, value, t)


def ccdt_depth(fam: CnfFamily, ell: int, cap: int, rho: Restriction | None = None) -> int | ExceedsCap:
    if fam.M == 0:
        return 0
    _warn_small_ell(fam, ell)
    fixed, value = (rho.fixed, rho.value) if rho is not None else (0, 0)
    return CcdtContext(fam, ell).depth(fixed, value, cap)


def ccdt_leaf_restrictions(fam: CnfFamily, ell: int) -> list[Restriction]:
    """Every leaf restriction of every tree in CCDT_ell(fam), over all branching choices."""
    ctx = CcdtContext(fam, ell)
    seen: set[tuple[int, int]] = set()
    leaves: list[Restriction] = []

    def visit(fixed, value):
        if (fixed, value) in seen:
            return
        seen.add((fixed, value))
        i = ctx.first_deep(fixed, value)
        if i is None:
            leaves.append(Restriction(fam.n, fixed, value))
            return
        for chunks in ctx.paths(i, fixed, value):
            vs = [v for _, c in chunks for v in c.vars]
            vm = _mask(vs)
            for a in _assignments(vs):
                visit(fixed | vm, value | a)

    if fam.M:
        visit(0, 0)
    return leaves


def ccdt_tree(fam: CnfFamily, ell: int,
              choose: Callable[[list], int] | None = None) -> PartialDecisionTree:
    """Materialise one tree of CCDT_ell(fam); ``choose`` picks among witnessing paths (default first)."""
    ctx = CcdtContext(fam, ell)
    choose = choose or (lambda paths: 0)

    def build(fixed, value):
        i = ctx.first_deep(fixed, value)
        if i is None:
            rho = Restriction(fam.n, fixed, value)
            return Leaf(ResidualFamily(restrict_family(fam, rho)))
        paths = ctx.paths(i, fixed, value)
        chunks = paths[choose(paths)]
        vs = [v for _, c in chunks for v in c.vars]
        return branch(vs, 0, fixed, value)

    def branch(vs, j, fixed, value):
        if j == len(vs):
            return build(fixed, value)
        v = vs[j]
        return Node(v, branch(vs, j + 1, fixed | 1 << v, value),
                    branch(vs, j + 1, fixed | 1 << v, value | 1 << v))

    return PartialDecisionTree(build(0, 0), fam.n)


# ---- traversals ------------------------------------------------------------------

@dataclass(frozen=True)
class Traversal:
    """ell-segmented family traversal.  ``indices`` are 0-based member indices."""

    indices: tuple[int, ...]
    sets: tuple[tuple[int, ...], ...]
    pi: tuple[tuple[int, int], ...]
    H: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if len(self.indices) != len(self.sets):
            raise ValueError("one set per index required")
        if any(a > b for a, b in zip(self.indices, self.indices[1:])):
            raise ValueError("indices must be nondecreasing")
        seen = 0
        for S in self.sets:
            m = _mask(S)
            if m & seen or len(set(S)) != len(S):
                raise ValueError("segment sets overlap")
            if not S:
                raise ValueError("segment sets must be nonempty")
            seen |= m
        if _mask([v for v, _ in self.pi]) != seen or _mask([v for v, _ in self.H]) != seen:
            raise ValueError("Pi and H must assign exactly the union of the sets")
        object.__setattr__(self, "_vars", seen)

    @property
    def u(self) -> int:
        return len(self.indices)

    @property
    def t(self) -> int:
        return sum(len(S) for S in self.sets)

    def segment_values(self, which: str, j: int) -> int:
        """Value mask of Pi or H restricted to S_j."""
        src = self.pi if which == "pi" else self.H
        S = _mask(self.sets[j])
        return _mask([v for v, b in src if b and (S >> v) & 1])

    def pi_prefix(self, j: int) -> tuple[int, int]:
        """(fixed, value) masks of pi^(1) o ... o pi^(j) (first j segments)."""
        fixed = value = 0
        for jj in range(j):
            fixed |= _mask(self.sets[jj])
            value |= self.segment_values("pi", jj)
        return fixed, value


def max_segments(t: int, ell: int) -> int:
    if t <= 0:
        return 0
    return t if ell <= 0 else math.ceil(t / ell)


def _size_compositions(t: int, u: int, ell: int, k: int):
    """|S_1..S_{u-1}| in [ell+1, ell+k], |S_u| >= 1, total t."""
    def rec(left, parts):
        if len(parts) == u - 1:
            if left >= 1:
                yield tuple(parts) + (left,)
            return
        for s in range(ell + 1, ell + k + 1):
            if s < left:
                yield from rec(left - s, parts + [s])
    yield from rec(t, [])


def enumerate_traversals(fam: CnfFamily, ell: int, t: int) -> Iterator[Traversal]:
    """Lazily stream every syntactically valid traversal of length t."""
    if t == 0:
        yield Traversal((), (), (), ())
        return
    n, k, M = fam.n, fam.k, fam.M
    for u in range(1, max_segments(t, ell) + 1):
        for sizes in _size_compositions(t, u, ell, k):
            for idx in itertools.combinations_with_replacement(range(M), u):
                for sets in _disjoint_sets(tuple(range(n)), sizes):
                    flat = sorted(v for S in sets for v in S)
                    for pbits in itertools.product((0, 1), repeat=t):
                        pi = tuple(zip(flat, pbits))
                        for hbits in itertools.product((0, 1), repeat=t):
                            yield Traversal(idx, sets, pi, tuple(zip(flat, hbits)))


def _disjoint_sets(pool: tuple[int, ...], sizes: Sequence[int]):
    if not sizes:
        yield ()
        return
    for S in itertools.combinations(pool, sizes[0]):
        rest = tuple(v for v in pool if v not in S)
        for tail in _disjoint_sets(rest, sizes[1:]):
            yield (S,) + tail


def count_traversals(n: int, M: int, k: int, ell: int, t: int) -> int:
    """Closed-form count of enumerate_traversals (for cross-checking)."""
    if t == 0:
        return 1
    total = 0
    for u in range(1, max_segments(t, ell) + 1):
        for sizes in _size_compositions(t, u, ell, k):
            ways = math.comb(M + u - 1, u)
            left = n
            for s in sizes:
                ways *= math.comb(left, s)
                left -= s
            total += ways * 4 ** t
    return total


@dataclass(frozen=True)
class PathWalk:
    """Result of following an assignment down a CDT."""

    chunks: tuple[tuple[int, PathAssignment], ...]
    open_remaining: int          # unqueried survivors of a truncated final block
    pending: tuple[int, ...]     # those survivors, in query order
    fixed: int
    value: int


def walk_path(F: Cnf, fixed: int, value: int, S_mask: int, S_value: int) -> PathWalk | None:
    """Follow the assignment (S_mask, S_value) from the node (fixed, value) of CDT(F).

    Returns None unless the assignment is exactly the variable set of some
    path from that node.  The path may stop inside a block.
    """
    chunks = []
    rem = S_mask
    while rem:
        s = scan(F, fixed, value)
        if s < 0:
            return None
        vs = [lit.var for lit in survivors(F, s, fixed)]
        r = 0
        while r < len(vs) and (rem >> vs[r]) & 1:
            r += 1
        if r == 0 or any((rem >> v) & 1 for v in vs[r:]):
            return None
        take = vs[:r]
        tm = _mask(take)
        chunks.append((s, PathAssignment(tuple((v, (S_value >> v) & 1) for v in take))))
        rem &= ~tm
        fixed |= tm
        value |= S_value & tm
        if r < len(vs):
            if rem:
                return None
            return PathWalk(tuple(chunks), len(vs) - r, tuple(vs[r:]), fixed, value)
    return PathWalk(tuple(chunks), 0, (), fixed, value)


def traversal_occurs(fam: CnfFamily, rho: Restriction, P: Traversal, ell: int, t: int,
                     memo: dict | None = None) -> bool:
    """Whether P is the traversal of a depth-t path of some tree in CCDT_ell(fam restricted by rho).

    Segment j < u must be a full path of length in [ell+1, ell+k] of the
    member's CDT under rho o pi^(<j).  The final segment must be a prefix of
    such a path.  Under each prefix rho o pi^(<j), every member before i_j
    must be shallow, so that i_j is the first deep member there (CDT depth is
    not monotone under restriction, so one check per member is not enough).
    """
    if P.t != t:
        return False
    if t == 0:
        return True
    memo = {} if memo is None else memo
    k = fam.k
    u = P.u
    taus = [(rho.fixed, rho.value)]
    for j in range(u):
        F = fam.members[P.indices[j]]
        fixed, value = taus[-1]
        S = P.sets[j]
        L = len(S)
        w = walk_path(F, fixed, value, _mask(S), P.segment_values("H", j))
        if w is None:
            return False
        if j < u - 1:
            if w.open_remaining or not ell + 1 <= L <= ell + k:
                return False
        elif L >= ell + 1:
            if L + w.open_remaining > ell + k:
                return False
        elif not pending_exceeds(F, w.fixed, w.value, w.pending, ell - L, memo):
            return False
        taus.append((fixed | _mask(S), value | P.segment_values("pi", j)))
    for j, ij in enumerate(P.indices):
        fixed, value = taus[j]
        for i in range(ij):
            if exceeds(fam.members[i], fixed, value, ell, memo):
                return False
    return True
