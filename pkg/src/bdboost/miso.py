"""Exact power minimization for single-antenna users.

With N_r = 1 BD is zero forcing and the power-factor problem is a
second-order cone program. Rotating each w_k so that h_k w_k is real leaves
the SINR constraints as cones,

    sqrt(1 + 1/gamma_k) Re(h_k w_k) >= || [h_k w_1, ..., h_k w_K, 1] ||,

and the per-BS budgets as ||M_j||_F <= t sqrt(P) with rho = t^2. The
equalities Im(h_k w_k) = 0 are removed by parameterizing each real-stacked
w_k on an orthonormal basis of their null space; the ellipsoid method then
minimizes t over the remaining K(2M - 1) + 1 real variables.
"""

from dataclasses import dataclass, field

import numpy as np

from . import ellipsoid
from .bd import ConvergenceError
from .linalg import InvalidInputError, null_space_basis
from .network import ChannelSet, selector_diagonals

__all__ = ["zf_sinr_targets", "zf_precoders", "MisoPowerSolution", "minimize_miso_power", "tighten_powers", "sinr"]


def zf_sinr_targets(bd):
    """SINR tuple exp(R_k^BD) - 1 of the zero-forcing (BD with N_r = 1) solution."""
    if bd.ns.V.shape[2] != 1:
        raise InvalidInputError("SINR targets need single-antenna users")
    return np.expm1(np.asarray(bd.rates, dtype=float))


def sinr(H, W):
    """SINR of every user; H is (K, M) and W is (M, K) with columns w_k."""
    G = np.abs(H @ W) ** 2
    own = np.diag(G)
    return own / (1.0 + G.sum(axis=1) - own)


@dataclass
class MisoPowerSolution:
    W: np.ndarray          # (M, K) precoders at power factor rho
    rho: float
    W_prop: np.ndarray     # W / sqrt(rho), meets the per-BS budget P
    targets: np.ndarray
    iterations: int
    converged: bool
    ellipsoid_rho: float   # best feasible rho seen by the ellipsoid, before tightening
    trace: list = field(default_factory=list, repr=False)

    @property
    def covariances(self):
        return np.einsum("mk,nk->kmn", self.W_prop, self.W_prop.conj())


def _channel_rows(ch):
    H = ch.H if isinstance(ch, ChannelSet) else np.asarray(ch)
    if H.ndim == 3:
        if H.shape[1] != 1:
            raise InvalidInputError("minimize_miso_power needs single-antenna users")
        H = H[:, 0, :]
    return H


def tighten_powers(H, W, targets):
    """Rescale columns of W so every SINR constraint holds with equality.

    Solves the K x K linear power-control system for the fixed beam
    directions. If W already meets the targets, the result needs no more
    power on any column. Returns None when the system has no positive solution.
    """
    K = H.shape[0]
    norms = np.linalg.norm(W, axis=0)
    live = norms > 0
    U = np.where(live, W / np.where(live, norms, 1.0), 0.0)
    G = np.abs(H @ U) ** 2
    A = -G.copy()
    A[np.diag_indices(K)] = np.diag(G) / np.where(targets > 0, targets, 1.0)
    zero = targets <= 0
    A[zero] = 0.0
    A[zero, zero] = 1.0
    b = np.where(zero, 0.0, 1.0)
    try:
        p = np.linalg.solve(A, b)
    except np.linalg.LinAlgError:
        return None
    if np.any(p < 0):
        return None
    return U * np.sqrt(p)


def minimize_miso_power(cfg, ch, targets, W_init=None, stop_tol=1e-9, max_iter=None, tighten=True):
    """Minimum power factor meeting SINR ``targets`` under per-BS budgets.

    ``W_init`` (for example the zero-forcing precoders) is a feasible point
    at rho <= 1; it is only used as a fallback if the search never improves on
    it. With ``tighten`` the beam directions found by the ellipsoid are kept
    and their powers re-solved so that every SINR constraint is active, which
    never increases any BS load.
    """
    H = _channel_rows(ch)
    K, M = H.shape
    P = cfg.bs_power
    targets = np.asarray(targets, dtype=float)
    if targets.shape != (K,) or np.any(targets < 0):
        raise InvalidInputError("targets must be K nonnegative SINR values")
    sel = selector_diagonals(cfg)
    if not np.any(targets > 0):
        zero = np.zeros((M, K), dtype=complex)
        return MisoPowerSolution(W=zero, rho=1.0, W_prop=zero, targets=targets, iterations=0,
                          converged=True, ellipsoid_rho=0.0)

    # real stacking w -> [Re w, Im w]; h w = (a + i b) . x
    a = np.concatenate([H.real, -H.imag], axis=1)   # (K, 2M)
    b = np.concatenate([H.imag, H.real], axis=1)
    N = np.stack([null_space_basis(b[k:k + 1]) for k in range(K)])
    nz = N.shape[2]
    Hr = np.einsum("im,kmz->ikz", a, N)             # Re(h_i w_k) = Hr[i, k] . z_k
    Hi = np.einsum("im,kmz->ikz", b, N)
    sel2 = np.concatenate([sel, sel], axis=1)       # per-BS mask in stacked coords
    coef = np.where(targets > 0, np.sqrt(1.0 + 1.0 / np.where(targets > 0, targets, 1.0)), 0.0)
    active = targets > 0
    n = K * nz + 1
    sqrtP = np.sqrt(P)

    def unpack(y):
        return y[:-1].reshape(K, nz), y[-1]

    def oracle(y):
        z, t = unpack(y)
        re = np.einsum("ikz,kz->ik", Hr, z)
        im = np.einsum("ikz,kz->ik", Hi, z)
        norm = np.sqrt(np.sum(re ** 2 + im ** 2, axis=1) + 1.0)
        own = np.diag(re)
        viol_sinr = np.where(active, norm - coef * own, -np.inf)
        x = np.einsum("kmz,kz->km", N, z)           # stacked real precoders
        bs_norm = np.sqrt(sel2 @ np.sum(x ** 2, axis=0))
        viol_pow = bs_norm - t * sqrtP
        ks, js = int(np.argmax(viol_sinr)), int(np.argmax(viol_pow))
        g = np.zeros(n)
        if viol_sinr[ks] > 0 and viol_sinr[ks] >= viol_pow[js]:
            grad = (re[ks][:, None] * Hr[ks] + im[ks][:, None] * Hi[ks]) / norm[ks]
            grad[ks] -= coef[ks] * Hr[ks, ks]
            g[:-1] = grad.ravel()
            return ellipsoid.Cut(ellipsoid.FEASIBILITY, g)
        if viol_pow[js] > 0:
            if bs_norm[js] > 0:
                gx = x * sel2[js][None, :] / bs_norm[js]
                g[:-1] = np.einsum("kmz,km->kz", N, gx).ravel()
            g[-1] = -sqrtP
            return ellipsoid.Cut(ellipsoid.FEASIBILITY, g)
        if t < 0:
            g[-1] = -1.0
            return ellipsoid.Cut(ellipsoid.FEASIBILITY, g)
        g[-1] = 1.0
        return ellipsoid.Cut(ellipsoid.OBJECTIVE, g, float(t))

    # every feasible point with t <= 1 has sum_k ||w_k||^2 <= K_t P
    x0 = np.zeros(n)
    x0[-1] = 0.5
    radius = np.full(n, np.sqrt(2.0 * cfg.num_bs * P))
    radius[-1] = np.sqrt(0.5)
    res = ellipsoid.minimize(oracle, x0, radius, stop_tol=stop_tol, max_iter=max_iter)

    def to_complex(y):
        z, _ = unpack(y)
        x = np.einsum("kmz,kz->km", N, z)
        return (x[:, :M] + 1j * x[:, M:]).T       # (M, K)

    def load(W):
        return np.sqrt(np.max(sel @ np.sum(np.abs(W) ** 2, axis=1)) / P)

    W, t_best = to_complex(res.x_best), float(res.f_best)
    if W_init is not None and load(W_init) < t_best:
        W, t_best = np.asarray(W_init, dtype=complex), load(W_init)
    if tighten:
        Wt = tighten_powers(H, W, targets)
        if Wt is not None and load(Wt) <= load(W) * (1 + 1e-12):
            W = Wt
    rho = float(load(W) ** 2)
    if not res.converged:
        raise ConvergenceError(f"SOCP search did not converge in {res.iterations} iterations",
                               trace=res.trace, best=W)
    return MisoPowerSolution(W=W, rho=rho, W_prop=W / np.sqrt(rho), targets=targets,
                      iterations=res.iterations, converged=True,
                      ellipsoid_rho=t_best ** 2, trace=res.trace)


def zf_precoders(bd):
    """Zero-forcing precoders w_k = V_k sqrt(Q_k) as columns of an (M, K) matrix."""
    if bd.ns.V.shape[2] != 1:
        raise InvalidInputError("zero-forcing precoders need single-antenna users")
    q = np.sqrt(np.maximum(bd.Q[:, 0, 0].real, 0.0))
    return (bd.ns.V[:, :, 0] * q[:, None]).T
