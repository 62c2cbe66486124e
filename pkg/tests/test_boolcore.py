import random

import numpy as np
import pytest

from mswitch import oracles
from mswitch.boolcore import (
    Cnf,
    CnfFamily,
    F2Polynomial,
    Restriction,
    Status,
    compose_restrictions,
    format_family,
    format_poly,
    parse_family,
    parse_poly,
    restrict_cnf,
    restrict_family,
    restrict_poly,
    truth_table,
)
from mswitch.verify import random_cnf, random_family, random_poly

R = Restriction.from_string


def test_literal_elimination_keeps_clause_active():
    F = restrict_cnf(Cnf.from_lists(2, [[1, -2]]), R("*1"))
    (c,) = F.clauses
    assert c.status is Status.ACTIVE
    assert [lit.var for lit in c.literals] == [0]


def test_satisfied_and_falsified():
    assert restrict_cnf(Cnf.from_lists(2, [[1, 2]]), R("1*")).is_constant() == 1
    F = restrict_cnf(Cnf.from_lists(1, [[1]]), R("0"))
    assert F.clauses[0].status is Status.FALSIFIED
    assert F.is_constant() == 0
    assert truth_table(F).tolist() == [0, 0]


@pytest.mark.parametrize("a,b,want", [("1**", "00*", "10*"), ("1*0", "***", "1*0"), ("***", "0*1", "0*1")])
def test_compose(a, b, want):
    assert compose_restrictions(R(a), R(b)) == R(want)


def test_restriction_rejects_bad_masks():
    with pytest.raises(ValueError):
        Restriction(2, fixed=0b01, value=0b10)
    with pytest.raises(ValueError):
        R("01x")


def test_family_restriction():
    assert restrict_family(CnfFamily(()), R("1*")).M == 0
    fam = CnfFamily((Cnf.from_lists(2, [[1]]), Cnf.from_lists(2, [[2]])))
    out = restrict_family(fam, R("1*"))
    assert out.members[0].is_constant() == 1
    assert out.members[1].is_constant() is None
    big = random_family(random.Random(3), 6, 3, 2, 4)
    assert restrict_family(big, R("1*0***")).M == 3


def test_family_length_mismatch():
    fam = CnfFamily((Cnf.from_lists(3, [[1]]),))
    with pytest.raises(ValueError):
        restrict_family(fam, R("1*"))


def test_poly_restriction_cancels():
    P = F2Polynomial(2, [[0, 1], [1]])
    assert restrict_poly(P, R("1*")).sparsity == 0
    Q = F2Polynomial(2, [[0, 1]])
    assert restrict_poly(Q, R("**")).masks == Q.masks
    assert restrict_poly(F2Polynomial(3, [[0, 1], [2]]), R("0**")).masks == frozenset({0b100})


def test_truth_tables():
    assert truth_table(Cnf(2, 0, ())).tolist() == [1, 1, 1, 1]
    assert truth_table(Cnf.from_lists(1, [[1]])).tolist() == [0, 1]
    assert truth_table(F2Polynomial(2, [[0], [1]])).tolist() == [0, 1, 1, 0]


def test_restrict_agrees_with_pointwise_evaluation(rng):
    # restricting then evaluating on the live part equals evaluating the filled input
    for _ in range(20):
        n = rng.randint(1, 4)
        F = random_cnf(rng, n, min(2, n), rng.randint(0, 5))
        P = random_poly(rng, n, min(4, (1 << n) - 1), 3)
        for rho in oracles.all_restrictions(n):
            G, H = restrict_cnf(F, rho), restrict_poly(P, rho)
            for x in range(1 << n):
                y = rho.fill(x)
                assert G.evaluate(y) == F.evaluate(y)
                assert H.evaluate(y) == P.evaluate(y)


def test_evaluate_array_matches_scalar(rng):
    F = random_cnf(rng, 7, 3, 6)
    xs = np.arange(1 << 7)
    assert [int(b) for b in F.evaluate_array(xs)] == [F.evaluate(int(x)) for x in xs]


def test_text_round_trip(rng):
    fam = random_family(rng, 7, 3, 3, 5)
    assert parse_family(format_family(fam)) == fam
    P = random_poly(rng, 9, 6, 3)
    assert parse_poly(format_poly(P)).masks == P.masks


def test_parse_errors():
    with pytest.raises(ValueError):
        parse_family("family 1 2 2\ncnf 2\n1 2\n")
    with pytest.raises(ValueError):
        parse_poly("poly 3 2\n1 2\n")
    with pytest.raises(ValueError):
        parse_family("family 1 2 1\ncnf 1\n1 2\n")


def test_random_poly_rejects_impossible_sparsity(rng):
    with pytest.raises(ValueError):
        random_poly(rng, 2, 4, 2)
