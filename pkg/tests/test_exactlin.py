from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from artifact.exactlin import (GF, QQ, ZZ, Solver, SparseMatrix, homology_rank, kernel_basis,
                               rank, ring_from_name, smith_normal_form, solve)

import oracles

small = st.integers(-3, 3)


def dense(rows, cols, ring=QQ):
    return st.lists(st.lists(small, min_size=cols, max_size=cols), min_size=rows, max_size=rows)


def mul(M, x):
    y = M.apply({i: v for i, v in enumerate(x) if v})
    return [M.ring.red(y.get(r, 0)) for r in range(M.rows)]


matrices = st.tuples(st.integers(1, 12), st.integers(1, 12)).flatmap(
    lambda rc: dense(*rc))


def test_ring_coercion_and_invariants():
    assert QQ(Fraction(4, 2)) == 2 and type(QQ(Fraction(4, 2))) is int
    assert QQ("-3/6") == Fraction(-1, 2)
    assert GF(5)(-1) == 4
    assert GF(5)(Fraction(1, 2)) == 3
    with pytest.raises(ValueError):
        ZZ(Fraction(1, 2))
    with pytest.raises(ValueError):
        GF(4)
    assert ring_from_name("f7") == GF(7) and ring_from_name("Q") == QQ
    with pytest.raises(ValueError):
        ring_from_name("r")


def test_no_stored_zeros_and_bounds():
    M = SparseMatrix(2, 2, GF(3), {(0, 0): 3, (1, 1): 4})
    assert M.data == {1: {1: 1}}
    with pytest.raises(IndexError):
        SparseMatrix(2, 2, QQ, {(2, 0): 1})


def test_kernel_trivial_cases():
    assert kernel_basis(SparseMatrix.identity(3, QQ)) == []
    assert len(kernel_basis(SparseMatrix.zero(2, 3, QQ))) == 3


def test_smith_examples():
    inv, _, _ = smith_normal_form(SparseMatrix.from_dense([[2, 0], [0, 4]], ZZ))
    assert list(inv) == [2, 4]
    inv, _, _ = smith_normal_form(SparseMatrix.from_dense([[2, 4], [6, 8]], ZZ))
    assert list(inv) == [2, 4]
    inv, _, _ = smith_normal_form(SparseMatrix.zero(2, 2, ZZ))
    assert list(inv) == []


def test_homology_rank_exact_pair():
    d_in = SparseMatrix.identity(2, QQ)
    d_out = SparseMatrix.zero(1, 2, QQ)
    assert homology_rank(d_out, d_in).rank == 0


def test_homology_rank_torsion_over_z():
    d_in = SparseMatrix.from_dense([[2]], ZZ)
    d_out = SparseMatrix.zero(0, 1, ZZ)
    h = homology_rank(d_out, d_in)
    assert h.rank == 0 and h.torsion == [2]


@settings(max_examples=60, deadline=None)
@given(matrices, st.sampled_from([0, 2, 3, 7]))
def test_rank_matches_dense_oracle(rows, p):
    ring = GF(p) if p else QQ
    M = SparseMatrix.from_dense(rows, ring)
    assert rank(M) == oracles.dense_rank(rows, p)


@settings(max_examples=60, deadline=None)
@given(matrices, st.sampled_from([0, 3]))
def test_kernel_and_solve_by_substitution(rows, p):
    ring = GF(p) if p else QQ
    M = SparseMatrix.from_dense(rows, ring)
    ker = kernel_basis(M)
    assert len(ker) == M.cols - rank(M)
    for x in ker:
        assert not any(mul(M, x))
    b = mul(M, [1] * M.cols)
    assert mul(M, solve(M, b)) == b
    y = Solver(M).solve(b)
    assert mul(M, [y.get(i, 0) for i in range(M.cols)]) == b


def test_solve_inconsistent():
    M = SparseMatrix.from_dense([[1, 1], [2, 2]], QQ)
    assert solve(M, [1, 3]) is None
    assert Solver(M).solve([1, 3]) is None


@settings(max_examples=40, deadline=None)
@given(st.tuples(st.integers(1, 4), st.integers(1, 4)).flatmap(lambda rc: dense(*rc)))
def test_smith_transforms_and_divisibility(rows):
    M = SparseMatrix.from_dense(rows, ZZ)
    inv, U, V = smith_normal_form(M)
    D = (U @ M @ V).to_dense()
    for i, row in enumerate(D):
        for j, v in enumerate(row):
            assert v == (inv[i] if i == j and i < len(inv) else 0)
    assert all(inv[i + 1] % inv[i] == 0 for i in range(len(inv) - 1))
    assert [abs(x) for x in inv] == oracles.invariant_factors(rows)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 6), st.integers(1, 6), st.integers(1, 6), st.data())
def test_homology_rank_matches_oracle(a, b, c, data):
    # d_in: C_{n+1} -> C_n, d_out = K^T-based map killing the image
    rows = data.draw(dense(b, c))
    d_in = SparseMatrix.from_dense(rows, QQ)
    ker_t = kernel_basis(d_in.transpose())[:a]
    if not ker_t:
        ker_t = [[0] * b]
    d_out = SparseMatrix.from_dense(ker_t, QQ)
    h = homology_rank(d_out, d_in)
    want = b - oracles.dense_rank(ker_t) - oracles.dense_rank(rows)
    assert h.rank == want
