"""Dense complex linear algebra used by the link model.

Matrices are plain ``numpy`` arrays of ``complex128``. Every routine accepts
optional leading batch axes (``(..., rows, cols)``) so the simulator can push
many packets through one call; the matrix axes are always the last two.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import lapack

from rdstc.errors import InvalidInputError, SingularMatrixError

__all__ = [
    "HermitianEigenResult",
    "as_matrix",
    "block_diag",
    "complex_gaussian_matrix",
    "frobenius_norm",
    "hermitian",
    "hermitian_eig",
    "matmul",
    "solve_hermitian",
]

HERMITIAN_RTOL = 1e-10
PSD_CLAMP = 1e-10
# Cholesky pivots below this fraction of the largest diagonal entry count as singular.
PIVOT_RTOL = 1e-14


def as_matrix(a, name="matrix"):
    """Return ``a`` as a complex array with at least two axes, rejecting NaN/Inf."""
    arr = np.asarray(a, dtype=np.complex128)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    elif arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} has non-finite entries")
    return arr


def matmul(a, b):
    """Complex matrix product with an explicit dimension check."""
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    if a.ndim < 2 or b.ndim < 2:
        raise InvalidInputError("matmul needs matrices, got vectors/scalars")
    if a.shape[-1] != b.shape[-2]:
        raise InvalidInputError(
            f"dimension mismatch: {a.shape[-2:]} x {b.shape[-2:]}"
        )
    return a @ b


def hermitian(a):
    """Conjugate transpose over the last two axes."""
    return np.conj(np.swapaxes(np.asarray(a), -1, -2))


def frobenius_norm(a):
    """``sqrt(Tr(A^H A))`` over the last two axes."""
    a = np.asarray(a)
    return np.sqrt(np.sum(np.abs(a) ** 2, axis=(-2, -1)))


def _cholesky_pivot(a):
    """Locate the failing pivot of a single non-PD Hermitian matrix."""
    c, info = lapack.zpotrf(a, lower=1, clean=1)
    if info > 0:
        k = info - 1
        pivot = float(a[k, k].real - np.sum(np.abs(c[k, :k]) ** 2))
        return pivot, k
    d = np.real(np.diagonal(c)) ** 2
    k = int(np.argmin(d))
    return float(d[k]), k


def solve_hermitian(a, b, loading=0.0):
    """Solve ``a @ x = b`` for Hermitian positive definite ``a`` via Cholesky.

    Parameters
    ----------
    a : array_like, shape (..., n, n)
        Hermitian positive definite system matrix.
    b : array_like, shape (..., n, k) or (..., n)
        Right-hand side(s).
    loading : float
        Diagonal loading added to ``a`` before factorisation.

    Raises
    ------
    SingularMatrixError
        If ``a + loading*I`` is not numerically positive definite. The error
        carries the offending pivot.
    """
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    if a.ndim < 2 or a.shape[-1] != a.shape[-2]:
        raise InvalidInputError(f"solve_hermitian needs a square matrix, got {a.shape}")
    vector_rhs = b.ndim == a.ndim - 1
    if vector_rhs:
        b = b[..., None]
    if b.shape[-2] != a.shape[-1]:
        raise InvalidInputError(f"rhs has {b.shape[-2]} rows, matrix is {a.shape[-2:]}")
    n = a.shape[-1]
    if loading:
        a = a + loading * np.eye(n)

    flat = a.reshape(-1, n, n)
    try:
        chol = np.linalg.cholesky(a)
    except np.linalg.LinAlgError:
        chol = None
    if chol is not None:
        pivots = np.real(np.diagonal(chol, axis1=-2, axis2=-1)) ** 2
        scale = np.max(np.abs(np.real(np.diagonal(a, axis1=-2, axis2=-1))), axis=-1)
        bad = np.min(pivots, axis=-1) <= PIVOT_RTOL * np.maximum(scale, np.finfo(float).tiny)
        if not np.any(bad):
            y = np.linalg.solve(chol, b)
            x = np.linalg.solve(hermitian(chol), y)
            return x[..., 0] if vector_rhs else x
    for m in flat:
        pivot, k = _cholesky_pivot(m)
        scale = np.max(np.abs(np.real(np.diagonal(m))))
        if pivot <= PIVOT_RTOL * max(scale, np.finfo(float).tiny):
            raise SingularMatrixError(
                f"matrix is not positive definite (pivot {pivot:.3e} at index {k})",
                pivot=pivot,
                index=k,
            )
    raise SingularMatrixError("Cholesky factorisation failed")  # pragma: no cover


@dataclass(frozen=True)
class HermitianEigenResult:
    """Eigenvalues in descending order and matching unit-norm eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self):
        v = self.eigenvectors
        return (v * self.eigenvalues[..., None, :]) @ hermitian(v)


def hermitian_eig(a, psd=False):
    """Eigendecomposition of a Hermitian matrix, eigenvalues sorted descending.

    With ``psd=True`` the input is expected to be a Gram matrix: eigenvalues in
    ``(-1e-10, 0)`` are clamped to zero and anything more negative raises.
    """
    a = as_matrix(a)
    if a.shape[-1] != a.shape[-2]:
        raise InvalidInputError(f"hermitian_eig needs a square matrix, got {a.shape}")
    asym = frobenius_norm(a - hermitian(a))
    size = frobenius_norm(a)
    if np.any(asym > HERMITIAN_RTOL * np.maximum(size, 1e-300)):
        raise InvalidInputError("matrix is not Hermitian")
    a = 0.5 * (a + hermitian(a))
    w, v = np.linalg.eigh(a)
    w = w[..., ::-1]
    v = v[..., :, ::-1]
    if psd:
        if np.any(w < -PSD_CLAMP):
            raise InvalidInputError(
                f"matrix expected PSD has eigenvalue {np.min(w):.3e}"
            )
        w = np.where(w < 0.0, 0.0, w)
    return HermitianEigenResult(w, v)


def block_diag(blocks):
    """Assemble square or rectangular blocks along the diagonal."""
    blocks = [as_matrix(b, "block") for b in blocks]
    if not blocks:
        raise InvalidInputError("block_diag needs at least one block")
    rows = sum(b.shape[0] for b in blocks)
    cols = sum(b.shape[1] for b in blocks)
    out = np.zeros((rows, cols), dtype=np.complex128)
    r = c = 0
    for b in blocks:
        out[r : r + b.shape[0], c : c + b.shape[1]] = b
        r += b.shape[0]
        c += b.shape[1]
    return out


def batch_shape(batch):
    """Normalise ``None``/int/tuple batch arguments to a shape tuple."""
    if batch is None:
        return ()
    if isinstance(batch, (int, np.integer)):
        return (int(batch),)
    return tuple(int(b) for b in batch)


def complex_gaussian_matrix(rows, cols, variance, rng, batch=()):
    """I.i.d. circularly-symmetric complex Gaussian entries of total variance ``variance``."""
    if variance < 0:
        raise InvalidInputError("variance must be nonnegative")
    shape = batch_shape(batch) + (rows, cols)
    z = rng.standard_normal(shape + (2,))
    return np.sqrt(variance / 2.0) * (z[..., 0] + 1j * z[..., 1])
