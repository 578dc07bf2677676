"""Complex linear algebra kernel.

Reference values come from hand algebra and from numpy's own LAPACK
routines used independently of the code under test.
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from conftest import crandn
from rdstc.errors import InvalidInputError, SingularMatrixError
from rdstc.numerics import (
    as_matrix,
    block_diag,
    complex_gaussian_matrix,
    frobenius_norm,
    hermitian,
    hermitian_eig,
    matmul,
    solve_hermitian,
)

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


def complex_arrays(shape):
    return st.tuples(arrays(float, shape, elements=finite), arrays(float, shape, elements=finite)).map(
        lambda p: p[0] + 1j * p[1]
    )


class TestMatmul:
    def test_identity(self, rng):
        A = crandn(rng, 2, 2)
        np.testing.assert_array_equal(matmul(np.eye(2), A), A)

    def test_row_swap(self):
        a, b, c, d = 1 + 2j, 3, -1j, 4 - 1j
        out = matmul([[0, 1], [1, 0]], [[a, b], [c, d]])
        np.testing.assert_array_equal(out, [[c, d], [a, b]])

    def test_j_squared(self):
        np.testing.assert_array_equal(matmul([[1j]], [[1j]]), [[-1]])

    def test_dimension_mismatch(self):
        with pytest.raises(InvalidInputError):
            matmul(np.ones((2, 3)), np.ones((2, 3)))


class TestHermitian:
    def test_scalar(self):
        np.testing.assert_array_equal(hermitian(np.array([[1 + 1j]])), [[1 - 1j]])

    def test_real_diagonal_fixed(self):
        D = np.diag([1.0, -2.0, 5.0])
        np.testing.assert_array_equal(hermitian(D), D)

    def test_shape(self):
        assert hermitian(np.zeros((2, 3))).shape == (3, 2)

    @given(complex_arrays((3, 4)), complex_arrays((4, 2)))
    def test_product_rule(self, A, B):
        np.testing.assert_allclose(hermitian(A @ B), hermitian(B) @ hermitian(A), atol=1e-12 * (1 + np.abs(A).max() * np.abs(B).max() * 4))

    @given(complex_arrays((2, 5)))
    def test_involution(self, A):
        np.testing.assert_array_equal(hermitian(hermitian(A)), A)


class TestFrobenius:
    def test_identity(self):
        assert frobenius_norm(np.eye(2)) == pytest.approx(np.sqrt(2))

    def test_zero(self):
        assert frobenius_norm(np.zeros((3, 3))) == 0.0

    def test_345(self):
        assert frobenius_norm(np.array([[3, 4], [0, 0]])) == pytest.approx(5.0)

    @given(complex_arrays((3, 2)))
    def test_trace_identities(self, A):
        f2 = frobenius_norm(A) ** 2
        t1 = np.trace(hermitian(A) @ A).real
        t2 = np.trace(A @ hermitian(A)).real
        assert f2 == pytest.approx(t1, rel=1e-10, abs=1e-300)
        assert f2 == pytest.approx(t2, rel=1e-10, abs=1e-300)


class TestSolveHermitian:
    def test_identity(self, rng):
        B = crandn(rng, 3, 2)
        np.testing.assert_allclose(solve_hermitian(np.eye(3), B), B)

    def test_scaled_identity(self):
        np.testing.assert_allclose(solve_hermitian(2 * np.eye(2), np.eye(2)), 0.5 * np.eye(2))

    def test_random_residual(self, rng):
        X = crandn(rng, 4, 4)
        A = X @ hermitian(X) + 0.5 * np.eye(4)
        B = crandn(rng, 4, 3)
        sol = solve_hermitian(A, B)
        assert frobenius_norm(A @ sol - B) / frobenius_norm(B) < 1e-8

    def test_vector_rhs_and_batch(self, rng):
        X = crandn(rng, 5, 3, 3)
        A = X @ hermitian(X) + np.eye(3)
        b = crandn(rng, 5, 3)
        x = solve_hermitian(A, b)
        np.testing.assert_allclose(np.einsum("bij,bj->bi", A, x), b, atol=1e-10)

    @settings(max_examples=50)
    @given(st.integers(0, 2**32 - 1))
    def test_recovers_x(self, seed):
        r = np.random.default_rng(seed)
        Q, _ = np.linalg.qr(crandn(r, 4, 4))
        A = Q @ np.diag(r.uniform(0.5, 2.0, 4)) @ hermitian(Q)
        X = crandn(r, 4, 2)
        got = solve_hermitian(A, A @ X)
        assert frobenius_norm(got - X) / frobenius_norm(X) < 1e-8

    def test_singular_reports_pivot(self):
        A = np.array([[1.0, 1.0], [1.0, 1.0]], dtype=complex)
        with pytest.raises(SingularMatrixError) as info:
            solve_hermitian(A, np.eye(2))
        assert info.value.index == 1
        assert abs(info.value.pivot) < 1e-12

    def test_indefinite_rejected(self):
        with pytest.raises(SingularMatrixError) as info:
            solve_hermitian(np.diag([1.0, -3.0]), np.eye(2))
        assert info.value.pivot == pytest.approx(-3.0)

    def test_loading_rescues_singular(self):
        A = np.array([[1.0, 1.0], [1.0, 1.0]], dtype=complex)
        x = solve_hermitian(A, np.ones(2), loading=1e-6)
        assert np.all(np.isfinite(x))

    def test_non_square(self):
        with pytest.raises(InvalidInputError):
            solve_hermitian(np.ones((2, 3)), np.ones(2))


class TestHermitianEig:
    def test_diagonal_descending(self):
        res = hermitian_eig(np.diag([1.0, 3.0]))
        np.testing.assert_allclose(res.eigenvalues, [3.0, 1.0])

    def test_identity(self):
        np.testing.assert_allclose(hermitian_eig(np.eye(4)).eigenvalues, np.ones(4))

    def test_gram_nonnegative(self, rng):
        for _ in range(50):
            A = crandn(rng, 3, 4)
            assert hermitian_eig(hermitian(A) @ A).eigenvalues.min() >= -1e-10

    def test_matches_numpy(self, rng):
        A = crandn(rng, 5, 5)
        M = A + hermitian(A)
        ours = hermitian_eig(M).eigenvalues
        np.testing.assert_allclose(ours, np.sort(np.linalg.eigvalsh(M))[::-1], atol=1e-10)

    def test_unitary_vectors(self, rng):
        A = crandn(rng, 4, 4)
        V = hermitian_eig(A @ hermitian(A)).eigenvectors
        np.testing.assert_allclose(hermitian(V) @ V, np.eye(4), atol=1e-8)

    @settings(max_examples=60)
    @given(complex_arrays((3, 3)))
    def test_reconstruct_psd(self, A):
        M = A @ hermitian(A)
        res = hermitian_eig(M, psd=True)
        scale = max(frobenius_norm(M), 1e-300)
        assert frobenius_norm(res.reconstruct() - M) / scale < 1e-8

    def test_rejects_non_hermitian(self):
        with pytest.raises(InvalidInputError):
            hermitian_eig(np.array([[1.0, 2.0], [0.0, 1.0]]))

    def test_psd_clamps_tiny_negative(self):
        res = hermitian_eig(np.diag([1.0, -1e-12]), psd=True)
        assert res.eigenvalues[-1] == 0.0

    def test_psd_rejects_real_negative(self):
        with pytest.raises(InvalidInputError):
            hermitian_eig(np.diag([1.0, -1e-3]), psd=True)


class TestBlockDiag:
    def test_identities(self):
        np.testing.assert_array_equal(block_diag([np.eye(2), np.eye(2)]), np.eye(4))

    def test_single(self):
        np.testing.assert_array_equal(block_diag([[[2]]]), [[2]])

    def test_mixed_sizes(self, rng):
        A, B = crandn(rng, 2, 2), crandn(rng, 3, 3)
        out = block_diag([A, B])
        assert out.shape == (5, 5)
        np.testing.assert_array_equal(out[:2, :2], A)
        np.testing.assert_array_equal(out[2:, 2:], B)
        assert not out[:2, 2:].any() and not out[2:, :2].any()

    def test_empty_rejected(self):
        with pytest.raises(InvalidInputError):
            block_diag([])


class TestGaussian:
    def test_zero_variance(self, rng):
        assert not complex_gaussian_matrix(3, 2, 0.0, rng).any()

    def test_moments(self):
        z = complex_gaussian_matrix(100000, 1, 1.0, np.random.default_rng(5)).ravel()
        assert abs(z.mean()) < 0.02
        assert 0.97 < np.mean(np.abs(z) ** 2) < 1.03
        assert np.var(z.real) == pytest.approx(0.5, rel=0.03)
        assert np.var(z.imag) == pytest.approx(0.5, rel=0.03)

    def test_deterministic(self):
        a = complex_gaussian_matrix(2, 2, 1.0, np.random.default_rng(9))
        b = complex_gaussian_matrix(2, 2, 1.0, np.random.default_rng(9))
        np.testing.assert_array_equal(a, b)

    def test_negative_variance(self, rng):
        with pytest.raises(InvalidInputError):
            complex_gaussian_matrix(2, 2, -1.0, rng)


def test_as_matrix_rejects_nan():
    with pytest.raises(InvalidInputError):
        as_matrix([[np.nan]])
