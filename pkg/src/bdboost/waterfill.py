"""Closed-form maximizer of  w * ln det(I + H S H^H) - Tr(A S)  over S >= 0.

With A positive definite, substitute S = A^{-1/2} T A^{-1/2}; the whitened
channel H A^{-1/2} = U diag(sigma) V^H diagonalizes the problem and the
optimal T is V diag(d) V^H with d the water-filling levels
``(w - 1/sigma^2)^+``. Both the BD dual (w = 1) and the power-minimization
dual (w = lambda_k) reduce to this kernel.
"""

from dataclasses import dataclass

import numpy as np

from .linalg import NotPositiveDefiniteError, pd_threshold

__all__ = ["water_fill", "WaterfillResult", "whitened_waterfill"]

ZERO_MODE = 1e-12


def water_fill(level, sigma):
    """Per-mode powers ``max(level - 1/sigma^2, 0)``; modes with sigma < 1e-12 get 0."""
    sigma = np.asarray(sigma, dtype=float)
    level = np.asarray(level, dtype=float)
    live = sigma > ZERO_MODE
    inv = np.where(live, 1.0 / np.where(live, sigma, 1.0) ** 2, np.inf)
    if level.ndim and level.ndim == sigma.ndim - 1:
        level = level[..., None]
    return np.maximum(level - inv, 0.0)


@dataclass
class WaterfillResult:
    X: np.ndarray       # (..., M, N) factor, S = X X^H
    sigma: np.ndarray   # (..., N) singular values of the whitened channel
    d: np.ndarray       # (..., N) water-filling levels
    logdet: np.ndarray  # (...,) ln det(I + H S H^H) = sum log1p(sigma^2 d)

    @property
    def S(self):
        return self.X @ np.swapaxes(self.X, -1, -2).conj()

    @property
    def cost(self):
        """Tr(A S), which equals sum(d) by construction."""
        return self.d.sum(axis=-1)


def whitened_waterfill(H, A, weight):
    """Solve the log-det/linear-cost subproblem for a stack of users.

    H has shape (K, N, M), A (K, M, M) Hermitian, weight (K,). Raises
    NotPositiveDefiniteError (index = user, eigenvector in the M-space) if
    some A_k is not positive definite.
    """
    w, U = np.linalg.eigh(A)
    floor = pd_threshold(w)
    bad = w[:, 0] < floor
    if np.any(bad):
        k = int(np.argmax(bad))
        raise NotPositiveDefiniteError(w[k, 0], U[k, :, 0], index=k)
    A_isqrt = (U * (1.0 / np.sqrt(w))[:, None, :]) @ np.swapaxes(U, -1, -2).conj()
    _, sigma, vh = np.linalg.svd(H @ A_isqrt, full_matrices=False)
    d = water_fill(np.asarray(weight, dtype=float), sigma)
    X = (A_isqrt @ np.swapaxes(vh, -1, -2).conj()) * np.sqrt(d)[:, None, :]
    logdet = np.log1p(sigma ** 2 * d).sum(axis=-1)
    return WaterfillResult(X=X, sigma=sigma, d=d, logdet=logdet)
