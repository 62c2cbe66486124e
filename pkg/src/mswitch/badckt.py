"""Depth-4 circuits over the bit-string encoding Y_q that recognise bad restrictions.

A path of a CDT is checked clause by clause.  The *segmentation* of a path
(which clause each block of queried variables belongs to) is not determined
by the path's variable set alone: a clause containing a queried variable may
already be satisfied by the restriction and skipped.  Checkers therefore take
an explicit segmentation, and callers OR over the few segmentations that are
consistent with the clause order.  Every local condition reads the input bits
of one clause's variables only and is compiled to CNF by enumerating those
bits, one blocking clause per rejected pattern.

Circuits are trees of hash-consed AND/OR gates over input literals.  Literal
code 2p is input p, 2p+1 its negation.  Truth tables are Python ints with bit
z set iff the circuit accepts input z.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Iterator, Sequence

import numpy as np

from .boolcore import CnfFamily, Cnf, Restriction, Status
from .cdt import (
    PathAssignment,
    SegmentedPath,
    Traversal,
    _mask,
    enumerate_traversals,
)
from .dist import BitstringRestrictionSpace

STAR = 2
_INTERN: dict = {}


class Gate:
    __slots__ = ("op", "children", "_hash", "depth")

    def __new__(cls, op: str, children: Sequence):
        children = tuple(children)
        key = (op, children)
        g = _INTERN.get(key)
        if g is not None:
            return g
        g = super().__new__(cls)
        g.op = op
        g.children = children
        g._hash = hash(key)
        g.depth = 1 + max((c.depth for c in children if isinstance(c, Gate)), default=0)
        _INTERN[key] = g
        return g

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        return self is other or (isinstance(other, Gate) and self.op == other.op
                                 and self.children == other.children)

    def __repr__(self):
        return f"{self.op}[{len(self.children)}]"


TRUE = Gate("AND", ())
FALSE = Gate("OR", ())


def AND(children) -> Gate:
    """AND with AND-children spliced in and constants folded."""
    out = []
    for c in children:
        if isinstance(c, Gate):
            if c is FALSE:
                return FALSE
            if c.op == "AND":
                out.extend(c.children)
                continue
        out.append(c)
    return Gate("AND", dict.fromkeys(out))


def OR(children) -> Gate:
    out = []
    for c in children:
        if isinstance(c, Gate):
            if c is TRUE:
                return TRUE
            if c.op == "OR":
                out.extend(c.children)
                continue
        out.append(c)
    return Gate("OR", dict.fromkeys(out))


def NOT(g) -> Gate | int:
    if isinstance(g, int):
        return g ^ 1
    return Gate("OR" if g.op == "AND" else "AND", [NOT(c) for c in g.children])


# ---- evaluation ------------------------------------------------------------------

class TableEvaluator:
    """Bit-parallel evaluation over all 2^arity inputs, cached per gate."""

    def __init__(self, arity: int):
        if arity > 16:
            raise ValueError("bit-parallel tables limited to 16 inputs")
        self.arity = arity
        self.N = 1 << arity
        self.ALL = (1 << self.N) - 1
        self.lits = []
        for p in range(arity):
            half = 1 << p
            block = ((1 << half) - 1) << half
            rep = self.ALL // ((1 << (2 * half)) - 1)
            pos = block * rep
            self.lits.append(pos)
        self._cache: dict = {}

    def literal(self, code: int) -> int:
        t = self.lits[code >> 1]
        return t ^ self.ALL if code & 1 else t

    def table(self, g) -> int:
        if isinstance(g, int):
            return self.literal(g)
        hit = self._cache.get(g)
        if hit is not None:
            return hit
        if g.op == "AND":
            acc = self.ALL
            for c in g.children:
                acc &= self.table(c)
                if not acc:
                    break
        else:
            acc = 0
            for c in g.children:
                acc |= self.table(c)
                if acc == self.ALL:
                    break
        self._cache[g] = acc
        return acc

    def to_array(self, table: int) -> np.ndarray:
        raw = np.frombuffer(table.to_bytes(self.N // 8 or 1, "little"), dtype=np.uint8)
        return np.unpackbits(raw, bitorder="little")[:self.N].astype(bool)


def evaluate_gate(g, z: int) -> bool:
    if isinstance(g, int):
        return bool(((z >> (g >> 1)) & 1) ^ (g & 1))
    if g.op == "AND":
        return all(evaluate_gate(c, z) for c in g.children)
    return any(evaluate_gate(c, z) for c in g.children)


@dataclass(frozen=True)
class LayeredCircuit:
    arity: int
    root: Gate

    @property
    def depth(self) -> int:
        return self.root.depth

    @property
    def top(self) -> str:
        return self.root.op

    def fan_in(self) -> list[int]:
        """Max fan-in per layer, top layer first."""
        out = []
        layer = [self.root]
        seen = set()
        while layer:
            out.append(max((len(g.children) for g in layer), default=0))
            nxt = []
            for g in layer:
                for c in g.children:
                    if isinstance(c, Gate) and id(c) not in seen:
                        seen.add(id(c))
                        nxt.append(c)
            layer = nxt
        return out

    def size(self) -> int:
        seen = set()
        stack = [self.root]
        while stack:
            g = stack.pop()
            if id(g) in seen:
                continue
            seen.add(id(g))
            stack.extend(c for c in g.children if isinstance(c, Gate))
        return len(seen)

    def evaluate(self, z: int) -> bool:
        return evaluate_gate(self.root, z)

    def table(self, ev: TableEvaluator | None = None) -> int:
        ev = ev or TableEvaluator(self.arity)
        return ev.table(self.root)

    def is_constant(self) -> bool | None:
        if self.root is TRUE:
            return True
        if self.root is FALSE:
            return False
        return None


# ---- local condition compiler ------------------------------------------------

def _states(space: BitstringRestrictionSpace, vars_: Sequence[int], pattern: int) -> dict[int, int]:
    """pattern bit j corresponds to the j-th bit of the concatenated var_bits."""
    q = space.q
    sel = (1 << q) - 1
    out = {}
    for idx, v in enumerate(vars_):
        chunk = (pattern >> (idx * (q + 1))) & ((1 << (q + 1)) - 1)
        out[v] = STAR if chunk & sel == sel else (chunk >> q) & 1
    return out


def compile_local(space: BitstringRestrictionSpace, vars_: Sequence[int],
                  pred: Callable[[dict[int, int]], bool]) -> Gate:
    """CNF (AND of ORs) equal to pred over the input bits of vars_."""
    vars_ = list(dict.fromkeys(vars_))
    positions = [p for v in vars_ for p in space.var_bits(v)]
    clauses = []
    rejected = 0
    total = 1 << len(positions)
    for pattern in range(total):
        if pred(_states(space, vars_, pattern)):
            continue
        rejected += 1
        # clause false exactly on this pattern
        clauses.append(Gate("OR", [2 * p + ((pattern >> j) & 1) for j, p in enumerate(positions)]))
    if rejected == total:
        return FALSE
    return AND(clauses)


# ---- path checker ------------------------------------------------------------------

Chunk = tuple[int, tuple[int, ...]]  # (clause index, vars in written order)


def _val(v: int, rho_state: dict[int, int], ctx_fixed: int, ctx_value: int,
         sig_fixed: int, sig_value: int) -> int:
    s = rho_state[v]
    if s != STAR:
        return s
    if (ctx_fixed >> v) & 1:
        return (ctx_value >> v) & 1
    if (sig_fixed >> v) & 1:
        return (sig_value >> v) & 1
    return STAR


def _lit_val(lit, val: int) -> int:
    return val if val == STAR else val ^ int(lit.negated)


def path_checker(space: BitstringRestrictionSpace, F: Cnf, chunks: Sequence[Chunk], values: int,
                 ctx_fixed: int = 0, ctx_value: int = 0, mode: str = "full",
                 limit: int | None = None) -> Gate:
    """CNF accepting (rho_bits, y) iff the chunked assignment is a path of CDT(F | rho o ctx).

    ``values`` is a bitmask holding the path's bit for each queried variable.
    mode "full": every chunk covers all survivors of its clause.
    mode "prefix": the last chunk may be a proper prefix of its clause's
    survivors; with ``limit`` the number of unqueried survivors is bounded.
    """
    if not chunks:
        return TRUE
    clauses = F.clauses
    cidx = [c for c, _ in chunks]
    if any(a >= b for a, b in zip(cidx, cidx[1:])):
        raise ValueError("chunk clauses must be strictly increasing")
    for c, vs in chunks:
        if not 0 <= c < len(clauses):
            raise ValueError(f"clause index {c} out of range")
        written = [lit.var for lit in clauses[c].literals]
        if any(v not in written for v in vs) or sorted(vs, key=written.index) != list(vs):
            raise ValueError("chunk variables must appear in their clause in written order")
    all_vars = _mask([v for _, vs in chunks for v in vs])
    if all_vars & ctx_fixed:
        return FALSE
    m = len(chunks)
    sig = []  # (fixed, value) of sigma before chunk b
    acc = 0
    for _, vs in chunks:
        sig.append((acc, values & acc))
        acc |= _mask(vs)

    def sat(c, b, st):
        sf, sv = sig[b] if b < m else (acc, values & acc)
        return any(_lit_val(lit, _val(lit.var, st, ctx_fixed, ctx_value, sf, sv)) == 1
                   for lit in clauses[c].literals)

    def falsified(c, b, st):
        sf, sv = sig[b]
        return all(_lit_val(lit, _val(lit.var, st, ctx_fixed, ctx_value, sf, sv)) == 0
                   for lit in clauses[c].literals)

    def chunk_ok(b, st):
        c, vs = chunks[b]
        sf, sv = sig[b]
        if any(st[v] != STAR for v in vs):
            return False
        lits = clauses[c].literals
        vset = set(vs)
        partial = mode == "prefix" and b == m - 1
        last_pos = max(i for i, lit in enumerate(lits) if lit.var in vset)
        open_count = 0
        for i, lit in enumerate(lits):
            if lit.var in vset:
                continue
            lv = _lit_val(lit, _val(lit.var, st, ctx_fixed, ctx_value, sf, sv))
            if not partial or i < last_pos:
                if lv != 0:
                    return False
            else:
                if lv == 1:
                    return False
                open_count += lv == STAR
        return limit is None or not partial or open_count <= limit

    parts = []
    for r, clause in enumerate(clauses):
        if clause.status is Status.FALSIFIED:
            return FALSE
        if clause.status is Status.SATISFIED:
            if r in cidx:
                return FALSE
            continue
        conds = []
        if r < cidx[0]:
            conds.append(lambda st, r=r: sat(r, 0, st))
        for b in range(m):
            if r == cidx[b]:
                conds.append(lambda st, b=b: chunk_ok(b, st))
            elif b + 1 < m and cidx[b] < r < cidx[b + 1]:
                conds.append(lambda st, r=r, b=b: sat(r, b + 1, st))
        conds.append(lambda st, r=r: not falsified(r, m - 1, st))
        g = compile_local(space, [lit.var for lit in clause.literals],
                          lambda st, conds=conds: all(f(st) for f in conds))
        if g is FALSE:
            return FALSE
        parts.append(g)
    return AND(parts)


def segmentations(F: Cnf, S_mask: int, start: int = 0) -> Iterator[list[Chunk]]:
    """Ways to split S into chunks of increasing clauses, each chunk = S-vars of its clause."""
    if not S_mask:
        yield []
        return
    for c in range(start, F.Q):
        vs = tuple(lit.var for lit in F.clauses[c].literals if (S_mask >> lit.var) & 1)
        if vs:
            for rest in segmentations(F, S_mask & ~_mask(vs), c + 1):
                yield [(c, vs)] + rest


def path_checker_cnf(F: Cnf, eta: SegmentedPath, ctx: Restriction | None,
                     space: BitstringRestrictionSpace, mode: str = "full") -> LayeredCircuit:
    """Checker for a path given with its clause chunks."""
    chunks = [(c, pa.vars) for c, pa in eta.chunks]
    values = eta.assignment.value_mask
    cf, cv = (ctx.fixed, ctx.value) if ctx is not None else (0, 0)
    return LayeredCircuit(space.size, path_checker(space, F, chunks, values, cf, cv, mode))


# ---- builders with caching ---------------------------------------------------------

class CircuitBuilder:
    """Caches checkers for one family, ell and input space."""

    def __init__(self, fam: CnfFamily, ell: int, space: BitstringRestrictionSpace):
        if fam.M and fam.n != space.n:
            raise ValueError("space and family disagree on n")
        self.fam = fam
        self.ell = ell
        self.space = space
        self._checkers: dict = {}
        self._depth: dict = {}
        self._seg: dict = {}

    def checker(self, i, chunks, values, cf, cv, mode, limit=None) -> Gate:
        touched = _mask([v for _, vs in chunks for v in vs])
        key = (i, tuple(chunks), values & touched, cf, cv, mode, limit)
        g = self._checkers.get(key)
        if g is None:
            g = path_checker(self.space, self.fam.members[i], chunks, values, cf, cv, mode, limit)
            self._checkers[key] = g
        return g

    def segs(self, i: int, S_mask: int) -> list[list[Chunk]]:
        key = (i, S_mask)
        s = self._seg.get(key)
        if s is None:
            s = list(segmentations(self.fam.members[i], S_mask))
            self._seg[key] = s
        return s

    def path_options(self, i, S_mask, values, cf, cv, mode, limit=None) -> list[Gate]:
        out = []
        for seg in self.segs(i, S_mask):
            g = self.checker(i, seg, values, cf, cv, mode, limit)
            if g is not FALSE:
                out.append(g)
        return out

    def deep_witnesses(self, i: int, cf: int, cv: int, prefix_mask: int = 0, prefix_values: int = 0,
                       prefix_len: int = 0) -> list[Gate]:
        """Checkers of length-(ell+1) paths of CDT(F_i | rho o ctx) that start with the given prefix."""
        ell = self.ell
        n = self.fam.n
        live = [v for v in range(n) if not (cf >> v) & 1 and not (prefix_mask >> v) & 1]
        out = []
        for E in itertools.combinations(live, ell + 1 - prefix_len):
            S = prefix_mask | _mask(E)
            segs = [seg for seg in self.segs(i, S)
                    if _mask([v for _, vs in seg for v in vs][:prefix_len]) == prefix_mask]
            if not segs:
                continue
            for bits in itertools.product((0, 1), repeat=len(E)):
                values = prefix_values | _mask([v for v, b in zip(E, bits) if b])
                for seg in segs:
                    g = self.checker(i, seg, values, cf, cv, "prefix")
                    if g is not FALSE:
                        out.append(g)
        return out

    def depth_at_most(self, i: int, cf: int = 0, cv: int = 0) -> Gate:
        """AND-OR-AND gate: CDT(F_i | rho o ctx) has depth <= ell."""
        key = (i, cf, cv)
        g = self._depth.get(key)
        if g is None:
            g = AND([NOT(w) for w in self.deep_witnesses(i, cf, cv)])
            self._depth[key] = g
        return g

    def traversal_gate(self, P: Traversal) -> Gate:
        fam, ell = self.fam, self.ell
        if P.t == 0:
            return TRUE
        k = fam.k
        u = P.u
        fixed_parts = []
        options = []
        for j in range(u):
            i = P.indices[j]
            cf, cv = P.pi_prefix(j)
            for i2 in range(i):
                fixed_parts.append(self.depth_at_most(i2, cf, cv))
            S = _mask(P.sets[j])
            L = len(P.sets[j])
            hv = P.segment_values("H", j)
            if j < u - 1:
                if not ell + 1 <= L <= ell + k:
                    return FALSE
                opts = self.path_options(i, S, hv, cf, cv, "full")
            elif L >= ell + 1:
                opts = self.path_options(i, S, hv, cf, cv, "prefix", ell + k - L)
            else:
                opts = self.deep_witnesses(i, cf, cv, S, hv, L)
            if not opts:
                return FALSE
            options.append(opts)
        base = AND(fixed_parts)
        if base is FALSE:
            return FALSE
        return OR(AND([base, *choice]) for choice in itertools.product(*options))


def depth_checker(F: Cnf, ell: int, space: BitstringRestrictionSpace,
                  ctx: Restriction | None = None) -> LayeredCircuit:
    b = CircuitBuilder(CnfFamily((F,)), ell, space)
    cf, cv = (ctx.fixed, ctx.value) if ctx is not None else (0, 0)
    return LayeredCircuit(space.size, b.depth_at_most(0, cf, cv))


def traversal_circuit(fam: CnfFamily, P: Traversal, ell: int, space: BitstringRestrictionSpace,
                      builder: CircuitBuilder | None = None) -> LayeredCircuit:
    b = builder or CircuitBuilder(fam, ell, space)
    return LayeredCircuit(space.size, b.traversal_gate(P))


def bad_restriction_eval(fam: CnfFamily, ell: int, t: int, space: BitstringRestrictionSpace,
                         z: int, builder: CircuitBuilder | None = None) -> tuple[bool, Traversal | None]:
    """Lazy OR over all traversals; returns the first accepting traversal as witness."""
    b = builder or CircuitBuilder(fam, ell, space)
    for P in enumerate_traversals(fam, ell, t):
        if evaluate_gate(b.traversal_gate(P), z):
            return True, P
    return False, None


def count_satisfied_traversals(fam: CnfFamily, ell: int, t: int, space: BitstringRestrictionSpace,
                               z: int, builder: CircuitBuilder | None = None) -> int:
    b = builder or CircuitBuilder(fam, ell, space)
    return sum(1 for P in enumerate_traversals(fam, ell, t) if evaluate_gate(b.traversal_gate(P), z))


def bad_tables(fam: CnfFamily, ell: int, t: int, space: BitstringRestrictionSpace) -> tuple[int, np.ndarray]:
    """(OR of all traversal circuits as a table, per-input count of accepting traversals)."""
    b = CircuitBuilder(fam, ell, space)
    ev = TableEvaluator(space.size)
    acc = 0
    counts = np.zeros(ev.N, dtype=np.int64)
    for P in enumerate_traversals(fam, ell, t):
        g = b.traversal_gate(P)
        if g is FALSE:
            continue
        tab = ev.table(g)
        if tab:
            acc |= tab
            counts += ev.to_array(tab)
    return acc, counts
