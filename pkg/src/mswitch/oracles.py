"""Independent brute-force oracles.

These deliberately avoid the bitmask machinery in ``mswitch.cdt`` and work on
restricted ``Cnf`` objects directly.
"""

from __future__ import annotations

import itertools

from .boolcore import (
    Cnf,
    CnfFamily,
    Restriction,
    Status,
    restrict_cnf,
    restrict_family,
)


def first_block(F: Cnf):
    """(clause index, surviving vars) of the next CDT block, or None at a leaf."""
    if any(c.status is Status.FALSIFIED for c in F.clauses):
        return None
    for i, c in enumerate(F.clauses):
        if c.status is Status.ACTIVE:
            return i, [lit.var for lit in c.literals]
    return None


def assign(n, pairs):
    return Restriction.from_assignment(n, pairs)


def cdt_depth(F: Cnf) -> int:
    b = first_block(F)
    if b is None:
        return 0
    _, vs = b
    best = 0
    for bits in itertools.product((0, 1), repeat=len(vs)):
        best = max(best, cdt_depth(restrict_cnf(F, assign(F.n, zip(vs, bits)))))
    return len(vs) + best


def full_paths(F: Cnf, lo: int, hi: int, prefix=()):
    b = first_block(F)
    if b is None:
        return
    _, vs = b
    for bits in itertools.product((0, 1), repeat=len(vs)):
        p = prefix + tuple(zip(vs, bits))
        if lo <= len(p) <= hi:
            yield p
        if len(p) < hi:
            yield from full_paths(restrict_cnf(F, assign(F.n, zip(vs, bits))), lo, hi, p)


def ccdt_reaches(fam: CnfFamily, ell: int, t: int) -> bool:
    if t <= 0:
        return True
    deep = next((F for F in fam.members if cdt_depth(F) > ell), None)
    if deep is None:
        return False
    for p in full_paths(deep, ell + 1, ell + deep.k):
        if len(p) >= t:
            return True
        vs = [v for v, _ in p]
        for bits in itertools.product((0, 1), repeat=len(vs)):
            if ccdt_reaches(restrict_family(fam, assign(fam.n, zip(vs, bits))), ell, t - len(p)):
                return True
    return False


def all_restrictions(n: int):
    for chars in itertools.product("01*", repeat=n):
        yield Restriction.from_string("".join(chars))
