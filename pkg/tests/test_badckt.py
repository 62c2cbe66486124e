import itertools

import pytest

from mswitch import oracles
from mswitch.badckt import (
    FALSE,
    CircuitBuilder,
    LayeredCircuit,
    OR,
    TableEvaluator,
    bad_restriction_eval,
    bad_tables,
    count_satisfied_traversals,
    depth_checker,
    path_checker,
    segmentations,
    traversal_circuit,
)
from mswitch.boolcore import Cnf, CnfFamily, restrict_cnf
from mswitch.cdt import CcdtContext, _mask, cdt_depth_exceeds, enumerate_traversals, traversal_occurs
from mswitch.dist import BitstringRestrictionSpace
from mswitch.verify import random_cnf, random_family


def accepted(circuit: LayeredCircuit) -> set[int]:
    tab = circuit.table()
    return {z for z in range(1 << circuit.arity) if (tab >> z) & 1}


def test_single_literal_path():
    space = BitstringRestrictionSpace(1, 1)
    F = Cnf.from_lists(1, [[1]])
    c = LayeredCircuit(space.size, path_checker(space, F, [(0, (0,))], 0))
    # selector bit 0 set means x0 is alive; y is free
    assert accepted(c) == {0b01, 0b11}


def test_context_fixed_variable_kills_path():
    space = BitstringRestrictionSpace(2, 1)
    F = Cnf.from_lists(2, [[1, 2]])
    assert path_checker(space, F, [(0, (0, 1))], 0, ctx_fixed=0b01, ctx_value=0) is FALSE


def test_depth_checker_constant_and_wide_clause():
    space = BitstringRestrictionSpace(3, 1)
    assert len(accepted(depth_checker(Cnf(3, 0, ()), 2, space))) == 1 << space.size
    got = accepted(depth_checker(Cnf.from_lists(3, [[1, 2, 3]]), 2, space))
    want = {z for z in range(1 << space.size) if space.star_mask(z).bit_count() <= 2}
    assert got == want


def test_depth_checker_agrees_with_cdt(rng):
    space = BitstringRestrictionSpace(4, 1)
    for _ in range(12):
        F = random_cnf(rng, 4, 2, rng.randint(1, 4))
        for ell in (0, 1, 2):
            got = accepted(depth_checker(F, ell, space))
            want = {z for z in range(1 << space.size)
                    if not cdt_depth_exceeds(restrict_cnf(F, space.decode(z)), ell)}
            assert got == want


def test_full_path_checker_agrees_with_oracle(rng):
    space = BitstringRestrictionSpace(3, 1)
    ev = TableEvaluator(space.size)
    for _ in range(10):
        F = random_cnf(rng, 3, 2, 3)
        for L in (1, 2, 3):
            for vs in itertools.permutations(range(3), L):
                for bits in itertools.product((0, 1), repeat=L):
                    values = _mask([v for v, b in zip(vs, bits) if b])
                    gates = [path_checker(space, F, seg, values) for seg in segmentations(F, _mask(vs))
                             if [v for _, c in seg for v in c] == list(vs)]
                    tab = ev.table(OR(gates)) if gates else 0
                    want = tuple(zip(vs, bits))
                    for z in range(1 << space.size):
                        G = restrict_cnf(F, space.decode(z))
                        assert bool((tab >> z) & 1) == (want in set(oracles.full_paths(G, L, L)))


def test_traversal_circuit_semantics(rng):
    space = BitstringRestrictionSpace(4, 1)
    fam = random_family(rng, 4, 2, 1, 3)
    b = CircuitBuilder(fam, 1, space)
    for t in (1, 2):
        for P in enumerate_traversals(fam, 1, t):
            got = accepted(traversal_circuit(fam, P, 1, space, b))
            want = {z for z in range(1 << space.size) if traversal_occurs(fam, space.decode(z), P, 1, t)}
            assert got == want


def test_overall_depth_at_most_four(rng):
    space = BitstringRestrictionSpace(4, 1)
    fam = random_family(rng, 4, 2, 1, 3)
    b = CircuitBuilder(fam, 1, space)
    for P in itertools.islice(enumerate_traversals(fam, 1, 2), 200):
        assert traversal_circuit(fam, P, 1, space, b).depth <= 4


def test_bad_eval_degenerate_cases():
    space = BitstringRestrictionSpace(3, 1)
    fam = CnfFamily((Cnf.from_lists(3, [[1, 2]]),))
    ok, _ = bad_restriction_eval(fam, 1, 0, space, 0)
    assert ok
    const = CnfFamily((Cnf(3, 0, ()),))
    assert not any(bad_restriction_eval(const, 1, 1, space, z)[0] for z in range(1 << space.size))


def test_biconditional_and_few_sat(rng):
    space = BitstringRestrictionSpace(4, 1)
    for M in (1, 2):
        fam = random_family(rng, 4, M, 1, 3)
        ctx = CcdtContext(fam, 1)
        for t in (1, 2, 3):
            table, counts = bad_tables(fam, 1, t, space)
            for z in range(1 << space.size):
                rho = space.decode(z)
                bad = ctx.reaches(rho.fixed, rho.value, t)
                assert bool((table >> z) & 1) == bad
                assert (1 <= counts[z] <= 16 ** (t + 1)) if bad else counts[z] == 0


def test_count_matches_direct_enumeration(rng):
    space = BitstringRestrictionSpace(4, 1)
    fam = random_family(rng, 4, 2, 1, 3)
    for z in range(0, 1 << space.size, 17):
        rho = space.decode(z)
        direct = sum(traversal_occurs(fam, rho, P, 1, 2) for P in enumerate_traversals(fam, 1, 2))
        assert count_satisfied_traversals(fam, 1, 2, space, z) == direct


def test_path_checker_rejects_bad_chunks():
    space = BitstringRestrictionSpace(2, 1)
    F = Cnf.from_lists(2, [[1, 2], [2]])
    with pytest.raises(ValueError):
        path_checker(space, F, [(1, (1,)), (0, (0,))], 0)
    with pytest.raises(ValueError):
        path_checker(space, F, [(0, (1, 0))], 0)
