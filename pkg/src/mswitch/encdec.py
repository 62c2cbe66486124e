"""Encoding of bad restrictions as an extension plus auxiliary bits, and its decoder.

Aux layout, all fields little-endian:

    index block   u entries of ceil(log2 M) bits      member index i_j
    records       one per queried variable, in query order:
                  ceil(log2 k) bits  position of the variable's literal in its clause
                  1 bit              chunk-end flag
                  1 bit              value on the canonical path (H)
                  1 bit              value on the branch taken (Pi)
    length block  u entries of ceil(log2(ell+k)) bits  |S_j| - 1

u is recovered from the total aux length.  The per-record path value is what
lets the decoder walk from one chunk to the next.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from .boolcore import CnfFamily, Cnf, Restriction
from .cdt import CcdtContext, PathAssignment, Traversal, _assignments, _mask


class DecodeError(ValueError):
    pass


def _width(x: int) -> int:
    return math.ceil(math.log2(x)) if x > 1 else 0


@dataclass(frozen=True)
class Segment:
    member: int
    chunks: tuple[tuple[int, PathAssignment], ...]   # (clause index, path bits) in query order
    pi: int                                          # value mask of the branch taken

    @property
    def vars(self) -> list[int]:
        return [v for _, c in self.chunks for v in c.vars]


@dataclass(frozen=True)
class Encoding:
    rho_prime: Restriction
    aux: tuple[int, ...]
    witness: Traversal
    segments: tuple[Segment, ...]

    @property
    def m_achieved(self) -> int:
        return len(self.aux)

    @property
    def aux_hex(self) -> str:
        v = sum(b << i for i, b in enumerate(self.aux))
        return f"{len(self.aux)}:{v:x}"


def canonical_witness(fam: CnfFamily, rho: Restriction, ell: int, t: int,
                      ctx: CcdtContext | None = None) -> list[Segment]:
    """Depth-first: first witnessing full path, lexicographically least branch continuation."""
    ctx = ctx or CcdtContext(fam, ell)
    out: list[Segment] = []
    fixed, value = rho.fixed, rho.value
    need = t
    while need > 0:
        i = ctx.first_deep(fixed, value)
        if i is None:
            raise ValueError("restriction is not bad")
        for chunks in ctx.paths(i, fixed, value):
            L = sum(len(c) for _, c in chunks)
            if L >= need:
                out.append(Segment(i, _truncate(chunks, need), 0))
                need = 0
                break
            vs = [v for _, c in chunks for v in c.vars]
            vm = _mask(vs)
            a = next((a for a in _assignments(vs) if ctx.reaches(fixed | vm, value | a, need - L)), None)
            if a is not None:
                out.append(Segment(i, tuple(chunks), a))
                fixed, value, need = fixed | vm, value | a, need - L
                break
        else:
            raise ValueError("restriction is not bad")
    return out


def _truncate(chunks, keep: int):
    out = []
    for c, pa in chunks:
        if keep <= 0:
            break
        part = PathAssignment(pa.entries[:keep])
        out.append((c, part))
        keep -= len(part)
    return tuple(out)


def _bits(x: int, w: int) -> list[int]:
    return [(x >> i) & 1 for i in range(w)]


def _read(bits: list[int], pos: int, w: int) -> tuple[int, int]:
    if pos + w > len(bits):
        raise DecodeError("aux too short")
    return sum(b << i for i, b in enumerate(bits[pos:pos + w])), pos + w


def encode_bad(fam: CnfFamily, rho: Restriction, ell: int, t: int) -> Encoding:
    ctx = CcdtContext(fam, ell)
    if not ctx.reaches(rho.fixed, rho.value, t):
        raise ValueError("encode_bad needs a bad restriction (CCDT depth >= t)")
    segs = canonical_witness(fam, rho, ell, t, ctx)
    wM, wk, wL = _width(fam.M), _width(fam.k), _width(ell + fam.k)
    index_block, records, length_block = [], [], []
    fixed, value = rho.fixed, rho.value
    for s in segs:
        F = fam.members[s.member]
        index_block += _bits(s.member, wM)
        length_block += _bits(len(s.vars) - 1, wL)
        for c, pa in s.chunks:
            lits = F.clauses[c].literals
            for pos_in_chunk, (v, h) in enumerate(pa.entries):
                j = next(idx for idx, lit in enumerate(lits) if lit.var == v)
                flag = int(pos_in_chunk == len(pa) - 1)
                records += _bits(j, wk) + [flag, h, (s.pi >> v) & 1]
                # falsify the literal so the clause stays unsatisfied
                fixed |= 1 << v
                if lits[j].negated:
                    value |= 1 << v
    flat_pi = []
    flat_h = []
    sets = []
    for s in segs:
        sets.append(tuple(sorted(s.vars)))
        for _, pa in s.chunks:
            for v, h in pa.entries:
                flat_h.append((v, h))
                flat_pi.append((v, (s.pi >> v) & 1))
    witness = Traversal(tuple(s.member for s in segs), tuple(sets),
                        tuple(sorted(flat_pi)), tuple(sorted(flat_h)))
    rho_prime = Restriction(rho.n, fixed, value)
    return Encoding(rho_prime, tuple(index_block + records + length_block), witness, tuple(segs))


def _first_unsatisfied(F: Cnf, fixed: int, value: int) -> int | None:
    for idx, (pos, neg) in enumerate(F.masks):
        if not ((pos & fixed & value) or (neg & fixed & ~value)):
            return idx
    return None


def decode(fam: CnfFamily, rho_prime: Restriction, aux: Iterable[int], ell: int, t: int,
           strict: bool = True) -> Restriction:
    """Invert encode_bad.

    Some aux bits (the final segment's branch values, for one) never steer the
    walk, so a corrupted aux can still land on the original restriction.  With
    ``strict`` the result is re-encoded and must reproduce (rho_prime, aux)
    exactly, which makes any non-canonical aux an error.
    """
    aux = [int(b) for b in aux]
    rho = _decode(fam, rho_prime, aux, ell, t)
    if strict:
        try:
            e = encode_bad(fam, rho, ell, t)
        except ValueError:
            raise DecodeError("decoded restriction is not bad") from None
        if e.rho_prime != rho_prime or list(e.aux) != aux:
            raise DecodeError("aux is not the canonical encoding of the decoded restriction")
    return rho


def _decode(fam: CnfFamily, rho_prime: Restriction, aux: list[int], ell: int, t: int) -> Restriction:
    wM, wk, wL = _width(fam.M), _width(fam.k), _width(ell + fam.k)
    per_seg = wM + wL
    body = len(aux) - t * (wk + 3)
    if body < 0:
        raise DecodeError("aux too short for t records")
    if per_seg == 0:
        u = t
    elif body % per_seg:
        raise DecodeError("aux length inconsistent with any segment count")
    else:
        u = body // per_seg
    if not 1 <= u <= t and t > 0:
        raise DecodeError(f"implied segment count {u} out of range")
    pos = 0
    members = []
    for _ in range(u):
        i, pos = _read(aux, pos, wM)
        if i >= fam.M:
            raise DecodeError("member index out of range")
        members.append(i)
    rec_start = pos
    pos = rec_start + t * (wk + 3)
    lengths = []
    for _ in range(u):
        L, pos = _read(aux, pos, wL)
        lengths.append(L + 1)
    if sum(lengths) != t:
        raise DecodeError("segment lengths do not sum to t")

    fixed, value = rho_prime.fixed, rho_prime.value
    touched = 0
    pos = rec_start
    for i, L in zip(members, lengths):
        F = fam.members[i]
        remaining = L
        seg = []
        while remaining:
            c = _first_unsatisfied(F, fixed, value)
            if c is None:
                raise DecodeError("hybrid satisfies every clause; aux inconsistent with family")
            lits = F.clauses[c].literals
            while remaining:
                j, pos = _read(aux, pos, wk)
                flag, h, p = aux[pos], aux[pos + 1], aux[pos + 2]
                pos += 3
                remaining -= 1
                if j >= len(lits):
                    raise DecodeError("literal position out of range")
                v = lits[j].var
                if not (fixed >> v) & 1 or ((value >> v) & 1) != int(lits[j].negated):
                    raise DecodeError("hybrid inconsistent: queried variable not set to its falsifying value")
                value = (value & ~(1 << v)) | (h << v)
                seg.append((v, p))
                if flag:
                    break
        for v, p in seg:
            value = (value & ~(1 << v)) | (p << v)
            touched |= 1 << v
    fixed &= ~touched
    value &= fixed
    return Restriction(rho_prime.n, fixed, value)


def nominal_aux_bits(u: int, M: int, k: int, t: int) -> float:
    """u log M + t log k + 3t, the budget the counting argument quotes."""
    return u * (math.log2(M) if M > 1 else 0) + t * (math.log2(k) if k > 1 else 0) + 3 * t


def rp_weight(rho: Restriction, p: Fraction) -> Fraction:
    s = rho.num_stars()
    return p ** s * ((1 - p) / 2) ** (rho.n - s)


@dataclass
class CountingReport:
    n: int
    M: int
    k: int
    ell: int
    t: int
    p: Fraction
    bad_count: int
    weight: Fraction
    m_achieved_max: int
    nominal_m_max: float
    bound: Fraction
    injective: bool
    round_trip: bool
    extension_ok: bool
    ratio_ok: bool

    @property
    def bound_holds(self) -> bool:
        return self.weight <= self.bound

    @property
    def passed(self) -> bool:
        return self.injective and self.round_trip and self.extension_ok and self.ratio_ok and self.bound_holds

    def as_dict(self) -> dict:
        return {
            "n": self.n, "M": self.M, "k": self.k, "ell": self.ell, "t": self.t, "p": str(self.p),
            "bad_count": self.bad_count, "weight": float(self.weight), "weight_exact": str(self.weight),
            "m_achieved_max": self.m_achieved_max, "nominal_m_max": self.nominal_m_max,
            "bound": float(self.bound), "bound_formula": "2^m_achieved_max * (2p/(1-p))^t",
            "injective": self.injective, "round_trip": self.round_trip,
            "extension_ok": self.extension_ok, "ratio_ok": self.ratio_ok,
            "bound_holds": self.bound_holds, "passed": self.passed,
        }


def all_restrictions(n: int) -> Iterable[Restriction]:
    for code in range(3 ** n):
        fixed = value = 0
        for i in range(n):
            code, d = divmod(code, 3)
            if d < 2:
                fixed |= 1 << i
                value |= d << i
        yield Restriction(n, fixed, value)


def verify_counting_bound(fam: CnfFamily, ell: int, t: int, p: Fraction | float) -> CountingReport:
    """Exhaustive check of the encoding argument over all 3^n restrictions."""
    p = Fraction(p).limit_denominator(1 << 20) if not isinstance(p, Fraction) else p
    ctx = CcdtContext(fam, ell)
    bad = [rho for rho in all_restrictions(fam.n) if ctx.reaches(rho.fixed, rho.value, t)]
    images = set()
    m_max = 0
    nominal_max = 0.0
    round_trip = extension_ok = ratio_ok = True
    ratio = ((1 - p) / (2 * p)) ** t
    for rho in bad:
        e = encode_bad(fam, rho, ell, t)
        images.add((e.rho_prime, e.aux))
        m_max = max(m_max, e.m_achieved)
        nominal_max = max(nominal_max, nominal_aux_bits(e.witness.u, fam.M, fam.k, t))
        if decode(fam, e.rho_prime, e.aux, ell, t, strict=False) != rho:
            round_trip = False
        if not (rho.fixed & ~e.rho_prime.fixed == 0
                and (e.rho_prime.fixed & ~rho.fixed).bit_count() == t
                and e.rho_prime.value & rho.fixed == rho.value):
            extension_ok = False
        if p < 1 and rp_weight(e.rho_prime, p) / rp_weight(rho, p) != ratio:
            ratio_ok = False
    weight = sum((rp_weight(rho, p) for rho in bad), Fraction(0))
    bound = Fraction(2) ** m_max * (2 * p / (1 - p)) ** t if p < 1 else Fraction(10 ** 9)
    return CountingReport(fam.n, fam.M, fam.k, ell, t, p, len(bad), weight, m_max, nominal_max,
                          bound, len(images) == len(bad), round_trip, extension_ok, ratio_ok)
