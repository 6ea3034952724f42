from fractions import Fraction

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from poslump.errors import NotSquare, RankDeficient, ShapeMismatch
from poslump.linalg import (
    Tolerance,
    as_matrix,
    is_metzler,
    rref,
    right_pseudo_inverse,
    rowspan_contains,
    to_exact,
)

TOL = Tolerance()


class TestRref:
    def test_already_reduced(self):
        M = np.array([[1.0, 2.0, 0.0], [0.0, 0.0, 1.0]])
        R, rank, piv = rref(M)
        assert np.array_equal(R, M)
        assert rank == 2
        assert piv == [0, 2]

    def test_zero_matrix(self):
        R, rank, piv = rref(np.zeros((1, 3)))
        assert np.array_equal(R, np.zeros((1, 3)))
        assert rank == 0
        assert piv == []

    def test_hand_elimination(self):
        # Gaussian elimination by hand: r1/2 -> [1,2,0]; r2 - r1/2 -> [0,0,1].
        M = np.array([[2.0, 4.0, 0.0], [1.0, 2.0, 1.0]])
        R, rank, piv = rref(M)
        assert np.allclose(R, [[1, 2, 0], [0, 0, 1]])
        assert rank == 2
        assert piv == [0, 2]

    def test_exact_mode(self):
        M = to_exact([[2, 4, 0], [1, 2, 1]])
        R, rank, piv = rref(M)
        assert R[0, 1] == Fraction(2)
        assert rank == 2
        assert all(isinstance(x, Fraction) for x in R.ravel())

    def test_sparse_input_equals_dense(self):
        rng = np.random.default_rng(7)
        M = rng.random((4, 6)) * (rng.random((4, 6)) < 0.5)
        Rd, kd, pd = rref(M)
        Rs, ks, ps = rref(sp.csr_matrix(M))
        assert np.array_equal(Rd, Rs)
        assert (kd, pd) == (ks, ps)

    @settings(max_examples=80, deadline=None)
    @given(arrays(np.float64, (3, 4), elements=st.floats(-5, 5, allow_nan=False)))
    def test_idempotent_and_span_preserving(self, M):
        R, rank, _ = rref(M)
        R2, rank2, _ = rref(R)
        assert rank == rank2
        assert np.array_equal(R, R2)
        if rank > 0:
            # row spaces agree: each original row is reproduced by R's rows
            coef, *_ = np.linalg.lstsq(R[:rank].T, M.T, rcond=None)
            assert np.allclose(R[:rank].T @ coef, M.T, atol=1e-8)


class TestRightPseudoInverse:
    def test_worked_example_exact(self):
        L = to_exact([[1, 2, 0], [0, 0, 1]])
        Lp = right_pseudo_inverse(L)
        expect = to_exact([["1/5", 0], ["2/5", 0], [0, 1]])
        assert (Lp == expect).all()

    def test_identity(self):
        assert np.allclose(right_pseudo_inverse(np.eye(4)), np.eye(4))

    def test_random_full_row_rank_residual(self):
        rng = np.random.default_rng(3)
        L = rng.standard_normal((3, 5))
        Lp = right_pseudo_inverse(L)
        assert np.max(np.abs(L @ Lp - np.eye(3))) < 1e-12

    def test_rank_deficient_rejected(self):
        with pytest.raises(RankDeficient):
            right_pseudo_inverse(np.array([[1.0, 2.0], [2.0, 4.0]]))

    def test_disjoint_support_uses_diagonal_path(self):
        # L L^T diagonal: the result must still satisfy L L+ = I exactly-ish.
        L = np.array([[0.0, 3.0, 0.0, 0.0], [0.0, 0.0, 0.0, 5.0]])
        Lp = right_pseudo_inverse(L)
        assert np.allclose(L @ Lp, np.eye(2))
        assert np.allclose(Lp, [[0, 0], [1 / 3, 0], [0, 0], [0, 1 / 5]])


class TestRowspanContains:
    def test_constraint_row_contained(self):
        L = np.array([[1.0, 2.0, 0.0], [0.0, 0.0, 1.0]])
        assert rowspan_contains(L, [[0.0, 0.0, 1.0]])

    def test_orthogonal_not_contained(self):
        assert not rowspan_contains(np.array([[1.0, 0.0, 0.0]]), [[0.0, 1.0, 0.0]])

    def test_combination_contained(self):
        L = np.array([[1.0, 2.0, 0.0], [0.0, 0.0, 1.0]])
        assert rowspan_contains(L, [[2.0, 4.0, 5.0]])  # 2*row1 + 5*row2

    def test_self_containment(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            L = rng.standard_normal((3, 6))
            assert rowspan_contains(L, L)

    def test_zero_row_trivially_contained(self):
        L = np.array([[1.0, 0.0]])
        assert rowspan_contains(L, np.zeros((2, 2)))

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatch):
            rowspan_contains(np.eye(2), np.zeros((1, 3)))

    def test_output_projector_identity(self):
        # rowspan(O) in rowspan(L) is the same as O == O L+ L.
        L = np.array([[1.0, 2.0, 0.0], [0.0, 0.0, 1.0]])
        O = np.array([[0.0, 0.0, 1.0]])
        Lp = right_pseudo_inverse(L)
        assert np.allclose(O @ Lp @ L, O, atol=1e-14)


class TestIsMetzler:
    def test_worked_example_matrix(self):
        A = np.array([[0.0, 2.0, 0.0], [1.0, 1.0, 1.0], [0.0, 0.0, 1.0]])
        assert is_metzler(A)

    def test_negative_diagonal_allowed(self):
        assert is_metzler(-np.eye(2))

    def test_negative_offdiagonal_rejected(self):
        assert not is_metzler(np.array([[0.0, -1.0], [0.0, 0.0]]))

    def test_not_square(self):
        with pytest.raises(NotSquare):
            is_metzler(np.zeros((2, 3)))

    def test_sparse(self):
        A = sp.csr_matrix(np.array([[-2.0, 1.0], [3.0, -4.0]]))
        assert is_metzler(A)


def test_as_matrix_rejects_nonfinite():
    with pytest.raises(ValueError):
        as_matrix([[np.inf, 0.0]])


def test_exact_conversion_parses_decimals_exactly():
    A = to_exact([[0.9, 1.1]])
    assert A[0, 0] == Fraction(9, 10)
    assert A[0, 1] == Fraction(11, 10)
