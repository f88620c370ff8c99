"""Rates, per-BS powers, leakage and rank bookkeeping.

Covariance sets are arrays of shape (K_r, M, M). Rates are in nats; divide
by ln 2 (``bits=True``) only when reporting.
"""

import numpy as np

from .linalg import InvalidInputError, hermitian, log_det_psd
from .network import ChannelSet, selector_diagonals

__all__ = [
    "user_rate",
    "user_rates",
    "sum_rate",
    "per_bs_power",
    "per_bs_powers",
    "leakage_norm",
    "effective_rank",
    "snr_boost_db",
    "covariance_to_precoder",
    "check_covariances",
    "LN2",
]

LN2 = np.log(2.0)
PSD_ATOL = 1e-9
RANK_RTOL = 1e-8


def _channels(ch):
    return ch.H if isinstance(ch, ChannelSet) else np.asarray(ch)


def check_covariances(S, max_rank=None):
    """Validate a covariance set: Hermitian, numerically PSD, rank <= max_rank."""
    S = np.asarray(S)
    if S.ndim != 3 or S.shape[1] != S.shape[2]:
        raise InvalidInputError(f"covariance set must be (K, M, M), got {S.shape}")
    if not np.all(np.isfinite(S)):
        raise InvalidInputError("covariance set has non-finite entries")
    w = np.linalg.eigvalsh(hermitian(S))
    scale = np.maximum(np.abs(w).max(axis=-1), 1.0)
    if np.any(w[:, 0] < -PSD_ATOL * scale):
        raise InvalidInputError("covariance not positive semidefinite")
    if max_rank is not None:
        for k in range(S.shape[0]):
            if effective_rank(S[k]) > max_rank:
                raise InvalidInputError(f"covariance {k} has rank above {max_rank}")
    return S


def user_rates(ch, S):
    """Rate of every user with interference treated as noise (nats)."""
    H = _channels(ch)
    S = np.asarray(S)
    total = S.sum(axis=0)
    rates = np.empty(H.shape[0])
    for k in range(H.shape[0]):
        hk = H[k]
        eye = np.eye(hk.shape[0])
        signal = hk @ S[k] @ hk.conj().T
        interf = hermitian(eye + hk @ (total - S[k]) @ hk.conj().T)
        try:
            den = log_det_psd(interf)
        except InvalidInputError as exc:
            raise InvalidInputError(f"user {k}: interference-plus-noise not PD") from exc
        num = log_det_psd(hermitian(interf + signal))
        rates[k] = max(num - den, 0.0)
    return rates


def user_rate(ch, S, k):
    """ln det(I + sum_i H_k S_i H_k^H) - ln det(I + sum_{i!=k} H_k S_i H_k^H)."""
    H = _channels(ch)
    if not 0 <= k < H.shape[0]:
        raise IndexError(f"user index {k} out of range")
    return float(user_rates(H, S)[k])


def sum_rate(ch, S, bits=False):
    r = float(np.sum(user_rates(ch, S)))
    return r / LN2 if bits else r


def per_bs_powers(cfg, S):
    """Transmit power of every base station, sum_k Tr(B_j S_k)."""
    diag = np.real(np.einsum("kii->i", np.asarray(S)))
    return selector_diagonals(cfg) @ diag


def per_bs_power(cfg, S, j):
    if not 0 <= j < cfg.num_bs:
        raise IndexError(f"base station index {j} out of range")
    return float(per_bs_powers(cfg, S)[j])


def leakage_norm(ch, S):
    """Worst normalized interference ||H_i S_k H_i^H||_F / (1 + ||S_k||_F), i != k."""
    H = _channels(ch)
    S = np.asarray(S)
    worst = 0.0
    for k in range(S.shape[0]):
        norm_k = 1.0 + np.linalg.norm(S[k])
        for i in range(H.shape[0]):
            if i != k:
                leak = np.linalg.norm(H[i] @ S[k] @ H[i].conj().T) / norm_k
                worst = max(worst, leak)
    return float(worst)


def effective_rank(S_k, rel_tol=RANK_RTOL):
    """Number of eigenvalues above rel_tol times the largest."""
    w = np.linalg.eigvalsh(hermitian(np.asarray(S_k)))
    top = w[-1]
    if top <= 0:
        return 0
    return int(np.sum(w > rel_tol * top))


def snr_boost_db(rho):
    """Effective SNR gain 10 log10(1/rho) from scaling by 1/rho."""
    if not rho > 0:
        raise InvalidInputError(f"rho must be positive, got {rho}")
    return float(-10.0 * np.log10(rho))


def covariance_to_precoder(S_k, num_streams, rel_tol=RANK_RTOL):
    """Factor S_k = W W^H with W of shape (M, num_streams).

    Columns beyond the numerical rank are zero.
    """
    S_k = hermitian(np.asarray(S_k))
    w, v = np.linalg.eigh(S_k)
    w, v = w[::-1], v[:, ::-1]
    top = max(w[0], 0.0)
    rank = int(np.sum(w > rel_tol * top)) if top > 0 else 0
    if rank > num_streams:
        raise InvalidInputError(f"covariance rank {rank} exceeds {num_streams} streams")
    W = np.zeros((S_k.shape[0], num_streams), dtype=complex)
    W[:, :rank] = v[:, :rank] * np.sqrt(w[:rank])
    return W
