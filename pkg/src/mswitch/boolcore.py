"""Boolean function representations, restrictions and their algebra.

Variables are 0-indexed internally.  Restrictions are stored as two bitmasks
over n coordinates: ``fixed`` marks coordinates outside the star set and
``value`` (a subset of ``fixed``) marks the ones fixed to 1.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

MAX_TABLE_VARS = 24

STAR = "*"


class Status(enum.Enum):
    ACTIVE = "active"
    SATISFIED = "satisfied"
    FALSIFIED = "falsified"


@dataclass(frozen=True)
class Literal:
    var: int
    negated: bool = False

    def value_under(self, bit: int) -> int:
        return bit ^ int(self.negated)

    def falsifying_bit(self) -> int:
        return int(self.negated)

    def to_signed(self) -> int:
        return -(self.var + 1) if self.negated else self.var + 1

    @classmethod
    def from_signed(cls, s: int) -> "Literal":
        if s == 0:
            raise ValueError("literal 0 is not allowed")
        return cls(abs(s) - 1, s < 0)

    def __str__(self) -> str:
        return f"{'~' if self.negated else ''}x{self.var}"


@dataclass(frozen=True)
class Clause:
    literals: tuple[Literal, ...]
    status: Status = Status.ACTIVE

    def __post_init__(self):
        object.__setattr__(self, "literals", tuple(self.literals))
        vs = [lit.var for lit in self.literals]
        if len(set(vs)) != len(vs):
            raise ValueError(f"duplicate variable in clause {vs}")

    @property
    def vars(self) -> tuple[int, ...]:
        return tuple(lit.var for lit in self.literals)

    @property
    def width(self) -> int:
        return len(self.literals)

    def __str__(self) -> str:
        if self.status is Status.SATISFIED:
            return "(1)"
        if self.status is Status.FALSIFIED:
            return "(0)"
        return "(" + " | ".join(map(str, self.literals)) + ")"


def _lit_masks(literals: Sequence[Literal]) -> tuple[int, int]:
    pos = neg = 0
    for lit in literals:
        if lit.negated:
            neg |= 1 << lit.var
        else:
            pos |= 1 << lit.var
    return pos, neg


@dataclass(frozen=True)
class Cnf:
    n: int
    k: int
    clauses: tuple[Clause, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "clauses", tuple(self.clauses))
        for c in self.clauses:
            if c.width > self.k:
                raise ValueError(f"clause width {c.width} exceeds k={self.k}")
            for lit in c.literals:
                if not 0 <= lit.var < self.n:
                    raise ValueError(f"variable {lit.var} out of range for n={self.n}")

    @classmethod
    def from_lists(cls, n: int, clauses: Iterable[Iterable[int]], k: int | None = None) -> "Cnf":
        """Build from 1-indexed signed literal lists (DIMACS style)."""
        cl = tuple(Clause(tuple(Literal.from_signed(s) for s in c)) for c in clauses)
        if k is None:
            k = max((c.width for c in cl), default=0)
        return cls(n, k, cl)

    @property
    def Q(self) -> int:
        return len(self.clauses)

    @property
    def masks(self) -> tuple[tuple[int, int], ...]:
        # (pos, neg) per clause; cached since the dataclass is frozen.
        m = self.__dict__.get("_masks")
        if m is None:
            m = tuple(_lit_masks(c.literals) for c in self.clauses)
            object.__setattr__(self, "_masks", m)
        return m

    def is_constant(self) -> int | None:
        """0 or 1 if the formula is syntactically constant, else None."""
        if any(c.status is Status.FALSIFIED for c in self.clauses):
            return 0
        if all(c.status is Status.SATISFIED for c in self.clauses):
            return 1
        return None

    def evaluate(self, x: int) -> int:
        for c, (pos, neg) in zip(self.clauses, self.masks):
            if c.status is Status.SATISFIED:
                continue
            if c.status is Status.FALSIFIED or not ((x & pos) or (~x & neg)):
                return 0
        return 1

    def evaluate_array(self, xs: np.ndarray) -> np.ndarray:
        out = np.ones(xs.shape, dtype=bool)
        for c in self.clauses:
            if c.status is Status.SATISFIED:
                continue
            sat = np.zeros(xs.shape, dtype=bool)
            for lit in c.literals:
                sat |= ((xs >> lit.var) & 1).astype(bool) ^ lit.negated
            out &= sat
        return out

    def __str__(self) -> str:
        return " & ".join(map(str, self.clauses)) if self.clauses else "(empty CNF = 1)"


@dataclass(frozen=True)
class CnfFamily:
    members: tuple[Cnf, ...] = ()
    n: int = 0

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(self.members))
        if self.members:
            n = self.members[0].n
            if any(F.n != n for F in self.members):
                raise ValueError("family members must share n")
            object.__setattr__(self, "n", n)

    @property
    def M(self) -> int:
        return len(self.members)

    @property
    def k(self) -> int:
        return max((F.k for F in self.members), default=0)

    def __iter__(self):
        return iter(self.members)

    def __getitem__(self, i: int) -> Cnf:
        return self.members[i]

    def __len__(self) -> int:
        return len(self.members)


class Restriction:
    """Element of {0,1,*}^n.  Immutable and hashable."""

    __slots__ = ("n", "fixed", "value")

    def __init__(self, n: int, fixed: int = 0, value: int = 0):
        full = (1 << n) - 1
        if fixed & ~full or value & ~fixed:
            raise ValueError("restriction masks out of range")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "fixed", fixed)
        object.__setattr__(self, "value", value)

    def __setattr__(self, name, value):
        raise AttributeError("Restriction is immutable")

    @classmethod
    def stars(cls, n: int) -> "Restriction":
        return cls(n)

    @classmethod
    def from_string(cls, s: str) -> "Restriction":
        fixed = value = 0
        for i, ch in enumerate(s):
            if ch == "*":
                continue
            if ch not in "01":
                raise ValueError(f"bad restriction character {ch!r}")
            fixed |= 1 << i
            if ch == "1":
                value |= 1 << i
        return cls(len(s), fixed, value)

    @classmethod
    def from_assignment(cls, n: int, pairs: Iterable[tuple[int, int]]) -> "Restriction":
        fixed = value = 0
        for v, b in pairs:
            fixed |= 1 << v
            if b:
                value |= 1 << v
        return cls(n, fixed, value)

    def __getitem__(self, i: int):
        if not (self.fixed >> i) & 1:
            return STAR
        return (self.value >> i) & 1

    def __len__(self) -> int:
        return self.n

    def __eq__(self, other) -> bool:
        return (isinstance(other, Restriction) and self.n == other.n
                and self.fixed == other.fixed and self.value == other.value)

    def __hash__(self) -> int:
        return hash((self.n, self.fixed, self.value))

    def __str__(self) -> str:
        return "".join(str(self[i]) for i in range(self.n))

    def __repr__(self) -> str:
        return f"Restriction('{self}')"

    @property
    def support(self) -> frozenset[int]:
        return frozenset(i for i in range(self.n) if (self.fixed >> i) & 1)

    @property
    def star_mask(self) -> int:
        return ((1 << self.n) - 1) & ~self.fixed

    def live(self) -> list[int]:
        return [i for i in range(self.n) if not (self.fixed >> i) & 1]

    def num_stars(self) -> int:
        return self.n - self.fixed.bit_count()

    def compose(self, other: "Restriction") -> "Restriction":
        return compose_restrictions(self, other)

    def fill(self, x: int) -> int:
        """Full assignment taking fixed coordinates from self and stars from x."""
        return (self.value & self.fixed) | (x & ~self.fixed & ((1 << self.n) - 1))


def compose_restrictions(rho: Restriction, rho2: Restriction) -> Restriction:
    """(rho rho2)_i = rho_i if fixed, else rho2_i."""
    if rho.n != rho2.n:
        raise ValueError(f"length mismatch: {rho.n} vs {rho2.n}")
    fixed = rho.fixed | rho2.fixed
    value = rho.value | (rho2.value & ~rho.fixed)
    return Restriction(rho.n, fixed, value)


def _restrict_clause(c: Clause, fixed: int, value: int) -> Clause:
    if c.status is not Status.ACTIVE:
        return c
    survivors = []
    for lit in c.literals:
        if (fixed >> lit.var) & 1:
            if ((value >> lit.var) & 1) ^ lit.negated:
                return Clause(c.literals, Status.SATISFIED)
        else:
            survivors.append(lit)
    if not survivors:
        return Clause((), Status.FALSIFIED)
    return Clause(tuple(survivors), Status.ACTIVE)


def restrict_cnf(F: Cnf, rho: Restriction) -> Cnf:
    if rho.n != F.n:
        raise ValueError(f"length mismatch: restriction {rho.n} vs formula {F.n}")
    return Cnf(F.n, F.k, tuple(_restrict_clause(c, rho.fixed, rho.value) for c in F.clauses))


def restrict_family(fam: CnfFamily, rho: Restriction) -> CnfFamily:
    if fam.members and rho.n != fam.n:
        raise ValueError(f"length mismatch: restriction {rho.n} vs family {fam.n}")
    return CnfFamily(tuple(restrict_cnf(F, rho) for F in fam.members))


class F2Polynomial:
    """Multilinear polynomial over GF(2); monomials stored as variable bitmasks."""

    __slots__ = ("n", "masks")

    def __init__(self, n: int, monomials: Iterable[Iterable[int]] | None = None, *, masks=None):
        if masks is None:
            acc: set[int] = set()
            for mono in monomials or ():
                m = 0
                for v in mono:
                    if not 0 <= v < n:
                        raise ValueError(f"variable {v} out of range for n={n}")
                    m |= 1 << v
                acc ^= {m}
            masks = acc
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "masks", frozenset(masks))

    def __setattr__(self, name, value):
        raise AttributeError("F2Polynomial is immutable")

    @property
    def monomials(self) -> frozenset[frozenset[int]]:
        return frozenset(frozenset(_bits(m)) for m in self.masks)

    @property
    def sparsity(self) -> int:
        return len(self.masks)

    @property
    def degree(self) -> int:
        return max((m.bit_count() for m in self.masks), default=0)

    def evaluate(self, x: int) -> int:
        return sum((x & m) == m for m in self.masks) & 1

    def evaluate_array(self, xs: np.ndarray) -> np.ndarray:
        out = np.zeros(xs.shape, dtype=bool)
        for m in self.masks:
            out ^= (xs & m) == m
        return out

    def __eq__(self, other) -> bool:
        return isinstance(other, F2Polynomial) and self.n == other.n and self.masks == other.masks

    def __hash__(self) -> int:
        return hash((self.n, self.masks))

    def __str__(self) -> str:
        if not self.masks:
            return "0"
        terms = []
        for m in sorted(self.masks, key=lambda m: (m.bit_count(), m)):
            terms.append("".join(f"x{v}" for v in _bits(m)) or "1")
        return " + ".join(terms)

    __repr__ = __str__


def _bits(m: int) -> list[int]:
    out = []
    while m:
        low = m & -m
        out.append(low.bit_length() - 1)
        m ^= low
    return out


def restrict_poly(P: F2Polynomial, rho: Restriction) -> F2Polynomial:
    if rho.n != P.n:
        raise ValueError(f"length mismatch: restriction {rho.n} vs polynomial {P.n}")
    zeros = rho.fixed & ~rho.value
    acc: set[int] = set()
    for m in P.masks:
        if m & zeros:
            continue
        acc ^= {m & ~rho.fixed}
    return F2Polynomial(P.n, masks=acc)


@dataclass(frozen=True)
class TruthTable:
    n: int
    bits: np.ndarray = field(compare=False)

    def __post_init__(self):
        if self.n > MAX_TABLE_VARS:
            raise ValueError(f"truth tables are capped at n={MAX_TABLE_VARS}")
        if self.bits.shape != (1 << self.n,):
            raise ValueError("truth table length must be 2^n")

    def __getitem__(self, i: int) -> int:
        return int(self.bits[i])

    def __eq__(self, other) -> bool:
        return isinstance(other, TruthTable) and self.n == other.n and bool(np.array_equal(self.bits, other.bits))

    def __hash__(self):
        return hash((self.n, self.bits.tobytes()))

    def ones(self) -> int:
        return int(self.bits.sum())

    def tolist(self) -> list[int]:
        return [int(b) for b in self.bits]


def truth_table(f) -> TruthTable:
    """Exhaustive table; bit i is f at the binary expansion of i (coordinate 0 = LSB).

    Accepts anything with ``n`` and ``evaluate_array`` (Cnf, F2Polynomial,
    PartialDecisionTree).
    """
    n = f.n
    if n > MAX_TABLE_VARS:
        raise ValueError(f"n={n} too large for a truth table (cap {MAX_TABLE_VARS})")
    xs = np.arange(1 << n, dtype=np.int64)
    return TruthTable(n, np.asarray(f.evaluate_array(xs), dtype=bool))


# ---- text formats ------------------------------------------------------------

def _content_lines(text: str):
    for raw in text.splitlines():
        line = raw.strip()
        if line.startswith("c ") or line == "c":
            continue
        yield line


def parse_family(text: str) -> CnfFamily:
    lines = list(_content_lines(text))
    pos = 0

    def next_nonblank():
        nonlocal pos
        while pos < len(lines) and not lines[pos]:
            pos += 1
        if pos >= len(lines):
            raise ValueError("unexpected end of family file")
        line = lines[pos]
        pos += 1
        return line

    head = next_nonblank().split()
    if len(head) != 4 or head[0] != "family":
        raise ValueError("expected header 'family M n k'")
    M, n, k = map(int, head[1:])
    members = []
    for _ in range(M):
        h = next_nonblank().split()
        if len(h) != 2 or h[0] != "cnf":
            raise ValueError("expected 'cnf Q'")
        Q = int(h[1])
        clauses = []
        for _ in range(Q):
            # inside a block, a blank line is the empty (constant-0) clause
            if pos >= len(lines):
                raise ValueError("unexpected end of family file")
            clauses.append([int(s) for s in lines[pos].split()])
            pos += 1
        members.append(Cnf.from_lists(n, clauses, k=k))
    if any(lines[pos:]):
        raise ValueError("trailing content after last CNF")
    return CnfFamily(tuple(members), n=n)


def format_family(fam: CnfFamily, n: int | None = None) -> str:
    n = fam.n if fam.members else (n or 0)
    out = [f"family {fam.M} {n} {fam.k}"]
    for F in fam.members:
        out.append("")
        out.append(f"cnf {F.Q}")
        for c in F.clauses:
            out.append(" ".join(str(lit.to_signed()) for lit in c.literals))
    return "\n".join(out) + "\n"


def parse_poly(text: str) -> F2Polynomial:
    lines = list(_content_lines(text))
    while lines and not lines[0]:
        lines.pop(0)
    if not lines:
        raise ValueError("empty polynomial file")
    head = lines[0].split()
    if len(head) != 3 or head[0] != "poly":
        raise ValueError("expected header 'poly n S'")
    n, S = int(head[1]), int(head[2])
    body = lines[1:1 + S]
    if len(body) != S:
        raise ValueError(f"expected {S} monomial lines, got {len(body)}")
    monos = [[int(s) - 1 for s in line.split()] for line in body]
    P = F2Polynomial(n, monos)
    return P


def format_poly(P: F2Polynomial) -> str:
    out = [f"poly {P.n} {P.sparsity}"]
    for m in sorted(P.masks):
        out.append(" ".join(str(v + 1) for v in _bits(m)))
    return "\n".join(out) + "\n"
