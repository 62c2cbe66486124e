import itertools
import random
import warnings

import pytest

from mswitch import oracles
from mswitch.boolcore import Cnf, parse_family, CnfFamily, Restriction, restrict_family, truth_table
from mswitch.cdt import (
    CcdtContext,
    Exceeded,
    ExceedsCap,
    Traversal,
    ccdt_depth,
    ccdt_leaf_restrictions,
    ccdt_reaches,
    cdt_build,
    cdt_depth,
    cdt_depth_exceeds,
    count_traversals,
    enumerate_traversals,
    enumerate_witnessing_full_paths,
    traversal_occurs,
)
from mswitch.verify import random_cnf, random_family

WIDE = Cnf.from_lists(3, [[1, 2, 3]])
UNITS = Cnf.from_lists(3, [[1], [2], [3]])


def test_single_clause_tree():
    T = cdt_build(WIDE, 3)
    assert T.depth == 3
    assert truth_table(T) == truth_table(WIDE)


def test_falsified_first_clause_is_constant_zero():
    F = Cnf.from_lists(2, [[], [1, 2]], k=2)
    T = cdt_build(F, 2)
    assert T.depth == 0
    assert truth_table(T).ones() == 0


def test_cap_reports_exceeded():
    assert isinstance(cdt_build(WIDE, 2), Exceeded)


@pytest.mark.parametrize("ell,want", [(2, True), (3, False)])
def test_depth_exceeds(ell, want):
    assert cdt_depth_exceeds(WIDE, ell) is want


def test_constant_never_exceeds():
    assert not cdt_depth_exceeds(Cnf(3, 0, ()), 0)


def test_truth_table_and_depth_against_oracle(rng):
    for _ in range(60):
        n = rng.randint(1, 8)
        F = random_cnf(rng, n, min(3, n), rng.randint(0, 6))
        assert truth_table(cdt_build(F, n)) == truth_table(F)
        d = oracles.cdt_depth(F)
        assert cdt_depth(F) == d
        assert all(cdt_depth_exceeds(F, e) == (d > e) for e in range(n + 1))


def test_full_paths_of_single_clause():
    paths = enumerate_witnessing_full_paths(WIDE, 1)
    assert len(paths) == 8
    assert all([c for c, _ in p.chunks] == [0] for p in paths)


def test_full_paths_unit_clauses():
    # no deduplication, so a length-2 path that continues reappears as a prefix
    got = {tuple(b for _, b in p.assignment) for p in enumerate_witnessing_full_paths(UNITS, 1)}
    assert got == {(1, 0), (1, 1)}


def test_full_paths_match_oracle(rng):
    for _ in range(30):
        n = rng.randint(2, 6)
        F = random_cnf(rng, n, 2, rng.randint(1, 4))
        ell = rng.randint(0, 2)
        if not cdt_depth_exceeds(F, ell):
            with pytest.raises(ValueError):
                enumerate_witnessing_full_paths(F, ell)
            continue
        mine = [tuple(p.assignment) for p in enumerate_witnessing_full_paths(F, ell)]
        assert mine == list(oracles.full_paths(F, ell + 1, ell + F.k))


def test_ccdt_single_member():
    fam = CnfFamily((WIDE,))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        assert ccdt_reaches(fam, 1, 3)
        assert not ccdt_reaches(fam, 1, 4)
        assert ccdt_depth(fam, 1, 5) == 3
    assert ccdt_reaches(fam, 1, 0)
    assert ccdt_depth(CnfFamily(()), 1, 5) == 0


def test_ccdt_shallow_family():
    fam = CnfFamily((Cnf.from_lists(3, [[1, 2]]),))
    assert not ccdt_reaches(fam, 2, 1)


def test_small_ell_warns():
    with pytest.warns(UserWarning):
        ccdt_reaches(CnfFamily((WIDE,)), 1, 1)


def test_ccdt_depth_cap():
    with pytest.warns(UserWarning):
        assert isinstance(ccdt_depth(CnfFamily((WIDE,)), 0, 2), ExceedsCap)


def test_ccdt_against_oracle(rng):
    for _ in range(25):
        n = rng.randint(2, 5)
        ell = rng.randint(1, 2)
        fam = random_family(rng, n, rng.randint(1, 2), rng.randint(1, ell), 3)
        ctx = CcdtContext(fam, ell)
        for rho in oracles.all_restrictions(n):
            sub = restrict_family(fam, rho)
            for t in (1, 2, 3):
                assert ctx.reaches(rho.fixed, rho.value, t) == oracles.ccdt_reaches(sub, ell, t)


NON_MONOTONE = """family 3 6 2

cnf 3
4
-5 -3
5

cnf 4
-5 3
6 5
3 5
4 -3

cnf 4
2
3
5 -3
5 1
"""


def test_depth_is_not_monotone_in_ell():
    # raising ell can make member 0 shallow and hand the recursion to a member
    # with longer witnessing paths
    fam = parse_family(NON_MONOTONE)
    ours = [CcdtContext(fam, e).depth(0, 0, 6) for e in (2, 3, 4)]
    brute = [max(t for t in range(7) if oracles.ccdt_reaches(fam, e, t)) for e in (2, 3, 4)]
    assert ours == brute == [3, 4, 0]


def test_zero_depth_is_monotone_in_ell(rng):
    for _ in range(20):
        fam = random_family(rng, 6, 3, 2, 4)
        zero = [CcdtContext(fam, e).depth(0, 0, 6) == 0 for e in range(5)]
        assert zero == sorted(zero)
        assert all(z == all(oracles.cdt_depth(F) <= e for F in fam.members) for e, z in enumerate(zero))


def test_ccdt_leaves_are_shallow(rng):
    for _ in range(10):
        fam = random_family(rng, 6, 2, 2, 4)
        for rho in ccdt_leaf_restrictions(fam, 2):
            for F in restrict_family(fam, rho).members:
                assert oracles.cdt_depth(F) <= 2


def test_traversal_counts():
    assert list(enumerate_traversals(CnfFamily((WIDE,)), 1, 0)) == [Traversal((), (), (), ())]
    # one set of size 3 with 2^3 Pi and 2^3 H labelings, counted for each of
    # the two segmentations 3 and 2+1
    fam = CnfFamily((WIDE,))
    assert sum(1 for _ in enumerate_traversals(fam, 1, 3)) == count_traversals(3, 1, 3, 1, 3) == 256
    fam2 = random_family(random.Random(1), 4, 2, 2, 3)
    assert sum(1 for _ in enumerate_traversals(fam2, 1, 2)) == count_traversals(4, 2, fam2.k, 1, 2)


def test_traversal_rejects_overlap():
    with pytest.raises(ValueError):
        Traversal((0, 0), ((0, 1), (1,)), ((0, 0), (1, 0)), ((0, 0), (1, 0)))


def test_traversal_needs_live_variables():
    fam = CnfFamily((WIDE,))
    P = Traversal((0,), ((0, 1),), ((0, 0), (1, 0)), ((0, 0), (1, 0)))
    assert not traversal_occurs(fam, Restriction.from_string("0**"), P, 1, 2)


def test_traversal_occurs_iff_reaches(rng):
    for _ in range(4):
        fam = random_family(rng, 4, rng.randint(1, 2), 2, 3)
        ell = 2
        ctx = CcdtContext(fam, ell)
        for t in (1, 2, 3):
            travs = list(enumerate_traversals(fam, ell, t))
            for rho in oracles.all_restrictions(4):
                memo = {}
                some = any(traversal_occurs(fam, rho, P, ell, t, memo) for P in travs)
                assert some == ctx.reaches(rho.fixed, rho.value, t)
