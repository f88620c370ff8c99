"""Dense complex linear algebra used by the precoding solvers.

All routines accept either a single matrix or a stack of matrices with
leading batch dimensions, mirroring numpy.linalg.
"""

import numpy as np

__all__ = [
    "InvalidInputError",
    "NotPositiveDefiniteError",
    "svd",
    "null_space_basis",
    "herm_eig",
    "pd_threshold",
    "psd_inv_sqrt",
    "log_det_psd",
    "hermitian",
]

HERMITIAN_RTOL = 1e-12
PD_RTOL = 1e-10
NULL_TOL = 1e-9


class InvalidInputError(ValueError):
    """Raised on non-finite, malformed, or out-of-domain input."""


class NotPositiveDefiniteError(InvalidInputError):
    """A matrix expected to be positive definite is not.

    Carries the offending (smallest) eigenvalue and its unit eigenvector so
    callers can turn the failure into a cutting plane.
    """

    def __init__(self, eigenvalue, eigenvector, index=None):
        self.eigenvalue = float(eigenvalue)
        self.eigenvector = eigenvector
        self.index = index
        where = "" if index is None else f" (matrix {index})"
        super().__init__(
            f"matrix not positive definite{where}: "
            f"smallest eigenvalue {self.eigenvalue:.3e}")


def _check_finite(a):
    a = np.asarray(a)
    if a.ndim < 2:
        raise InvalidInputError(f"expected a matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidInputError("matrix has non-finite entries")
    return a


def hermitian(a):
    """Return (A + A^H) / 2."""
    return 0.5 * (a + np.swapaxes(a, -1, -2).conj())


def _check_hermitian(a):
    a = _check_finite(a)
    if a.shape[-1] != a.shape[-2]:
        raise InvalidInputError(f"expected square matrix, got {a.shape}")
    scale = np.max(np.abs(a)) if a.size else 0.0
    skew = np.max(np.abs(a - np.swapaxes(a, -1, -2).conj())) if a.size else 0.0
    if skew > HERMITIAN_RTOL * max(scale, 1e-300):
        raise InvalidInputError(
            f"matrix not Hermitian: skew {skew:.3e} vs scale {scale:.3e}")
    return a


def svd(a):
    """Thin SVD ``A = U diag(sigma) V^H`` with sigma descending.

    Returns ``(U, sigma, V)``; note V, not V^H.
    """
    a = _check_finite(a)
    u, s, vh = np.linalg.svd(a, full_matrices=False)
    return u, s, np.swapaxes(vh, -1, -2).conj()


def null_space_basis(a, tol=NULL_TOL):
    """Orthonormal basis of the null space of a single matrix.

    Singular directions with sigma <= tol * sigma_max count as null. A matrix
    with zero rows has the whole space as null space.
    """
    if tol <= 0:
        raise InvalidInputError("tol must be positive")
    a = np.asarray(a)
    n = a.shape[1]
    if a.shape[0] == 0:
        return np.eye(n, dtype=complex)
    a = _check_finite(a)
    _, s, vh = np.linalg.svd(a, full_matrices=True)
    smax = s[0] if s.size else 0.0
    rank = int(np.sum(s > tol * smax)) if smax > 0 else 0
    return vh[rank:].conj().T


def herm_eig(a):
    """Eigendecomposition of a Hermitian matrix, eigenvalues descending."""
    a = _check_hermitian(a)
    w, v = np.linalg.eigh(a)
    return w[..., ::-1], v[..., ::-1]


def pd_threshold(eigvals):
    """Positive-definiteness floor: 1e-10 times the spectral scale (floored at 1)."""
    scale = np.max(np.abs(eigvals), axis=-1)
    return PD_RTOL * np.maximum(scale, 1.0)


def psd_inv_sqrt(a):
    """Hermitian inverse square root B with B A B = I.

    Raises NotPositiveDefiniteError (with the offending eigenpair) when an
    eigenvalue falls below :func:`pd_threshold`.
    """
    a = _check_hermitian(a)
    w, v = np.linalg.eigh(a)
    floor = pd_threshold(w)
    bad = w[..., 0] < floor
    if np.any(bad):
        if bad.ndim == 0:
            raise NotPositiveDefiniteError(w[0], v[:, 0])
        idx = np.unravel_index(np.argmax(bad), bad.shape)
        raise NotPositiveDefiniteError(w[idx][0], v[idx][:, 0], index=idx)
    scaled = v * (1.0 / np.sqrt(w))[..., None, :]
    return scaled @ np.swapaxes(v, -1, -2).conj()


def log_det_psd(a):
    """Natural-log determinant of a Hermitian positive definite matrix."""
    a = _check_hermitian(a)
    w = np.linalg.eigvalsh(a)
    if np.any(w <= 0):
        raise InvalidInputError("log_det_psd: matrix has nonpositive eigenvalue")
    return np.sum(np.log(w), axis=-1)
