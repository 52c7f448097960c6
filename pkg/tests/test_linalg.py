from fractions import Fraction

import pytest

from zhualg.linalg import (
    INCONSISTENT,
    Echelon,
    NotInSpan,
    SparseMatrix,
    rank,
    row_space_membership,
    solve,
)
from zhualg.scalars import RATFUNC_ZERO, RatFunc

C = RatFunc.var("c")
H = RatFunc.var("h")
ONE = RatFunc.coerce(1)


def test_identity_system():
    A = SparseMatrix(3, 3, {(0, 0): 1, (1, 1): 1, (2, 2): 1})
    res = solve(A, [ONE, C, H])
    assert res.consistent
    assert res.solution == [ONE, C, H]


def test_upper_triangular_symbolic():
    # oracle (back substitution by hand): x2 = c, x1 = (c + 1 - c)/c = 1/c
    A = SparseMatrix(2, 2, {(0, 0): C, (0, 1): 1, (1, 1): C})
    res = solve(A, [C + 1, C * C])
    assert res.consistent
    assert res.solution == [ONE / C, C]


def test_zero_rhs():
    A = SparseMatrix(2, 2, {(0, 0): 1, (0, 1): 2, (1, 0): 3, (1, 1): 4})
    res = solve(A, [RATFUNC_ZERO, RATFUNC_ZERO])
    assert res.consistent
    assert all(x.is_zero() for x in res.solution)


def test_inconsistent_is_a_value():
    A = SparseMatrix(2, 1, {(0, 0): 1, (1, 0): 1})
    res = solve(A, [ONE, C])
    assert res.solution == INCONSISTENT


def test_underdetermined_free_vars_zero():
    A = SparseMatrix(1, 3, {(0, 1): 2})
    res = solve(A, [C])
    assert res.consistent
    assert res.solution[0].is_zero() and res.solution[2].is_zero()
    assert res.solution[1] == C / 2


def test_rank_zero_matrix():
    assert rank(SparseMatrix(3, 4, {})) == 0


def test_rank_duplicate_rows():
    A = SparseMatrix(2, 2, {(0, 0): 1, (0, 1): C, (1, 0): 1, (1, 1): C})
    assert rank(A) == 1


def test_membership_recheck():
    A = SparseMatrix(2, 3, {(0, 0): 1, (0, 1): 1, (1, 1): C})
    target = {0: RatFunc.coerce(2), 1: RatFunc.coerce(2) + C}
    coeffs = row_space_membership(A, target)
    assert coeffs == [RatFunc.coerce(2), ONE]


def test_membership_not_in_span():
    A = SparseMatrix(1, 2, {(0, 0): 1})
    out = row_space_membership(A, {1: ONE})
    assert isinstance(out, NotInSpan)


def test_specialization_consistency():
    # solving after substituting c -> 3 agrees with substituting the solution
    A = SparseMatrix(2, 2, {(0, 0): C, (0, 1): 1, (1, 1): C - 1})
    b = [C * C, C * C - 1]
    sym = solve(A, b).solution
    num = solve(
        SparseMatrix(2, 2, {k: v.substitute({"c": Fraction(3)}) for k, v in A.entries.items()}),
        [x.substitute({"c": Fraction(3)}) for x in b],
    ).solution
    assert [x.substitute({"c": Fraction(3)}) for x in sym] == num


def test_echelon_incremental_provenance():
    ech = Echelon()
    ech.add_row({0: ONE, 1: C}, tag="r0")
    ech.add_row({1: ONE}, tag="r1")
    residual, combo = ech.express({0: RatFunc.coerce(2), 1: 2 * C + 1})
    assert not residual
    assert combo["r0"] == RatFunc.coerce(2)
    assert combo["r1"] == ONE


def test_dump_triplets_roundtrippable_text():
    A = SparseMatrix(2, 2, {(0, 0): C, (1, 1): 1})
    text = A.dump_triplets()
    assert text.splitlines()[0] == "2 2"
    assert "0 0 c" in text
