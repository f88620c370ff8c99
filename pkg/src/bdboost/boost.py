"""Effective-SNR enhancement over BD.

Starting from the BD rate tuple R^BD, find the smallest common power factor
rho such that covariances meeting every BD rate fit within rho * P at every
BS, then divide them by rho. The resulting covariances use the full power
budget and see an effective noise level of rho, i.e. an SNR gain of
10 log10(1/rho) dB with no user losing rate.

For multi-antenna users the rate constraint is linearized around the BD
point (interference enters through the PSD matrices F_k), the rank
constraint is dropped, and the convex surrogate is solved in the dual:
per-user water-filling for fixed multipliers, ellipsoid updates of
(lambda_1..lambda_K, mu_1..mu_{K_t-1}) using the closed-form subgradients.
The last BS multiplier is eliminated through sum_j mu_j = 1/P.
"""

from dataclasses import dataclass, field

import numpy as np

from . import ellipsoid
from .bd import ConvergenceError
from .linalg import InvalidInputError, NotPositiveDefiniteError, hermitian, pd_threshold
from .metrics import LN2, user_rates
from .network import ChannelSet, selector_diagonals
from .waterfill import water_fill, whitened_waterfill

__all__ = [
    "DualPoint",
    "TaylorCoefficients",
    "DualEvaluation",
    "TraceRow",
    "BoostSolution",
    "compute_taylor",
    "assemble_Ck",
    "water_fill",
    "primal_update",
    "dual_value_and_subgradients",
    "factor_rates",
    "minimize_power_factor",
    "scale_solution",
]

LAMBDA_MAX = 1e6


@dataclass
class DualPoint:
    """Multipliers of the linearized power-minimization problem.

    ``mu`` holds the first K_t - 1 BS multipliers; the last one is implied by
    the budget identity sum_j mu_j = 1/P.
    """

    lam: np.ndarray
    mu: np.ndarray
    bs_power: float

    @classmethod
    def start(cls, cfg, lam0=0.1):
        """lambda_k = 0.1 and mu_j = 1/(P K_t), the reference initialization."""
        return cls(lam=np.full(cfg.num_users, lam0),
                   mu=np.full(cfg.num_bs - 1, 1.0 / (cfg.bs_power * cfg.num_bs)),
                   bs_power=cfg.bs_power)

    @classmethod
    def from_vector(cls, x, num_users, bs_power):
        x = np.asarray(x, dtype=float)
        return cls(lam=x[:num_users], mu=x[num_users:], bs_power=bs_power)

    def vector(self):
        return np.concatenate([self.lam, self.mu])

    @property
    def mu_last(self):
        return 1.0 / self.bs_power - float(np.sum(self.mu))

    @property
    def mu_full(self):
        return np.append(self.mu, self.mu_last)

    def is_feasible(self):
        return bool(np.all(self.lam >= 0) and np.all(self.mu >= 0) and self.mu_last >= 0)


@dataclass
class TaylorCoefficients:
    F: np.ndarray        # (K, M, M) PSD
    targets: np.ndarray  # (K,) BD rates, nats


@dataclass
class DualEvaluation:
    value: float
    s_lam: np.ndarray
    s_mu: np.ndarray
    X: np.ndarray        # (K, M, N_r), S*_k = X_k X_k^H
    logdet: np.ndarray   # ln det(I + H_k S*_k H_k^H)
    bs_power: np.ndarray  # per-BS power of S*

    @property
    def S(self):
        return self.X @ np.swapaxes(self.X, -1, -2).conj()

    @property
    def subgradient(self):
        return np.concatenate([self.s_lam, self.s_mu])


@dataclass
class TraceRow:
    iteration: int
    kind: str
    scaled_sum_rate: float  # nats, NaN on feasibility cuts or zero power
    rho: float
    width: float

    @property
    def scaled_sum_rate_bits(self):
        return self.scaled_sum_rate / LN2


@dataclass
class BoostSolution:
    S_star: np.ndarray   # converged covariances before scaling
    rho: float
    S_prop: np.ndarray   # S_star / rho
    rates: np.ndarray    # per-user rates under S_prop, nats
    dual: DualPoint
    dual_value: float
    iterations: int
    converged: bool
    trace: list = field(default_factory=list, repr=False)

    @property
    def sum_rate(self):
        return float(self.rates.sum())

    @property
    def snr_boost_db(self):
        return float(-10.0 * np.log10(self.rho))

    def best_trace_row(self):
        rows = [r for r in self.trace if np.isfinite(r.scaled_sum_rate)]
        return max(rows, key=lambda r: r.scaled_sum_rate) if rows else None


def _channels(ch):
    return ch.H if isinstance(ch, ChannelSet) else np.asarray(ch)


def compute_taylor(ch, bd):
    """F_k = H_k^H [I - (I + H_k S_k^BD H_k^H)^{-1}] H_k and the BD rate targets."""
    H = _channels(ch)
    Hh = np.swapaxes(H, -1, -2).conj()
    eye = np.eye(H.shape[1])
    R = eye + H @ bd.S @ Hh
    F = hermitian(Hh @ (eye - np.linalg.inv(R)) @ H)
    return TaylorCoefficients(F=F, targets=np.asarray(bd.rates, dtype=float).copy())


def _cost_matrices(sel, taylor, d):
    """C_k = sum_j mu_j B_j + sum_{i != k} lambda_i F_i for every user."""
    weighted = taylor.F * d.lam[:, None, None]
    C = weighted.sum(axis=0)[None] - weighted
    idx = np.arange(sel.shape[1])
    C[:, idx, idx] += sel.T @ d.mu_full
    return C


def assemble_Ck(cfg, taylor, d, k):
    """C_k and a PD-violation flag.

    Returns ``(C, violation)`` where violation is None when C_k is positive
    definite, else ``(eigenvalue, eigenvector)`` for the smallest eigenpair.
    """
    C = _cost_matrices(selector_diagonals(cfg), taylor, d)[k]
    w, U = np.linalg.eigh(C)
    if w[0] < pd_threshold(w):
        return C, (float(w[0]), U[:, 0])
    return C, None


def primal_update(cfg, ch, taylor, d, k):
    """S_k* maximizing lambda_k ln det(I + H_k S H_k^H) - Tr(C_k S) over S >= 0.

    Raises NotPositiveDefiniteError when C_k is not positive definite.
    """
    H = _channels(ch)
    C, bad = assemble_Ck(cfg, taylor, d, k)
    if bad is not None:
        raise NotPositiveDefiniteError(bad[0], bad[1], index=k)
    wf = whitened_waterfill(H[k:k + 1], C[None], d.lam[k:k + 1])
    return wf.S[0]


def dual_value_and_subgradients(cfg, ch, taylor, d, sel=None):
    """Reduced dual function value and its subgradient at ``d``.

    s_lam_k = ln det(I + H_k S_k H_k^H) - Tr(F_k sum_{i!=k} S_i) - R_k^BD
    s_mu_j  = sum_k Tr[(B_{K_t} - B_j) S_k]
    """
    H = _channels(ch)
    if sel is None:
        sel = selector_diagonals(cfg)
    C = _cost_matrices(sel, taylor, d)
    wf = whitened_waterfill(H, C, d.lam)
    S = wf.S
    total = S.sum(axis=0)
    cross = np.real(np.einsum("kab,ba->k", taylor.F, total)
                    - np.einsum("kab,kba->k", taylor.F, S))
    s_lam = wf.logdet - cross - taylor.targets
    power = sel @ np.sum(np.abs(wf.X) ** 2, axis=(0, 2))
    s_mu = power[-1] - power[:-1]
    value = float(d.lam @ s_lam + d.mu @ s_mu - power[-1] / d.bs_power)
    return DualEvaluation(value=value, s_lam=s_lam, s_mu=s_mu, X=wf.X,
                          logdet=wf.logdet, bs_power=power)


def factor_rates(H, X, noise=1.0):
    """Per-user rates (nats) for covariances X_k X_k^H at the given noise power."""
    HX = np.einsum("kam,imb->kiab", H, X)
    G = HX @ np.swapaxes(HX, -1, -2).conj()
    total = G.sum(axis=1)
    own = G[np.arange(H.shape[0]), np.arange(H.shape[0])]
    eye = noise * np.eye(H.shape[1])
    num = np.linalg.slogdet(eye + total)[1]
    den = np.linalg.slogdet(eye + total - own)[1]
    return np.maximum(num - den, 0.0)


def scale_solution(S, rho):
    """Covariances divided by the power factor rho."""
    if not rho > 0:
        raise InvalidInputError(f"rho must be positive, got {rho}")
    return np.asarray(S) / rho


def _basis(n, i, sign=1.0):
    g = np.zeros(n)
    g[i] = sign
    return g


def minimize_power_factor(cfg, ch, bd, stop_tol=1e-6, max_iter=None, track_rates=True, lam0=0.1):
    """Minimize the common power factor under linearized BD rate targets.

    The dual search starts at lambda_k = lam0, mu_j = 1/(P K_t) inside a ball
    of radius 10 max(1, 1/P, 0.1 K_r) and stops once sqrt(s^T E s) <=
    ``stop_tol``. The covariances at the converged dual point give
    rho = max_j (1/P) sum_k Tr(B_j S_k); the proposed covariances are S/rho.
    """
    H = _channels(ch)
    K, Kt, P = cfg.num_users, cfg.num_bs, cfg.bs_power
    n = K + Kt - 1
    sel = selector_diagonals(cfg)
    taylor = compute_taylor(H, bd)

    if not np.any(taylor.targets > 0):
        zero = np.zeros_like(bd.S)
        return BoostSolution(S_star=zero, rho=1.0, S_prop=zero, rates=np.zeros(K),
                             dual=DualPoint.start(cfg, lam0), dual_value=0.0,
                             iterations=0, converged=True)

    def oracle(x):
        d = DualPoint.from_vector(x, K, P)
        if np.any(d.lam < 0):
            return ellipsoid.Cut(ellipsoid.FEASIBILITY, _basis(n, int(np.argmin(d.lam)), -1.0))
        if np.any(d.mu < 0):
            return ellipsoid.Cut(ellipsoid.FEASIBILITY, _basis(n, K + int(np.argmin(d.mu)), -1.0))
        if d.mu_last < 0:
            g = np.zeros(n)
            g[K:] = 1.0
            return ellipsoid.Cut(ellipsoid.FEASIBILITY, g)
        if np.any(d.lam > LAMBDA_MAX):
            return ellipsoid.Cut(ellipsoid.FEASIBILITY, _basis(n, int(np.argmax(d.lam))))
        try:
            ev = dual_value_and_subgradients(cfg, H, taylor, d, sel)
        except NotPositiveDefiniteError as exc:
            return ellipsoid.Cut(ellipsoid.FEASIBILITY, _pd_cut(sel, taylor, exc, K))
        info = None
        if track_rates:
            rho = ev.bs_power.max() / P
            rate = factor_rates(H, ev.X, noise=rho).sum() if rho > 0 else np.nan
            info = (float(rate), float(rho))
        return ellipsoid.Cut(ellipsoid.OBJECTIVE, ev.subgradient, ev.value, info)

    x0 = DualPoint.start(cfg, lam0).vector()
    radius = 10.0 * max(1.0, 1.0 / P, 0.1 * K)
    res = ellipsoid.minimize(oracle, x0, radius, stop_tol=stop_tol, max_iter=max_iter)
    trace = [TraceRow(t.iteration, t.kind,
                      t.info[0] if t.info else np.nan,
                      t.info[1] if t.info else np.nan, t.width) for t in res.trace]
    if not res.converged:
        raise ConvergenceError(f"power minimization did not converge in {res.iterations} "
                               "iterations", trace=trace, best=res.x_best)

    d = DualPoint.from_vector(res.x, K, P)
    ev = dual_value_and_subgradients(cfg, H, taylor, d, sel)
    rho = float(ev.bs_power.max() / P)
    if not rho > 0:
        raise ConvergenceError("converged covariances carry no power", trace=trace, best=res.x)
    S_star = ev.S
    S_prop = scale_solution(S_star, rho)
    return BoostSolution(S_star=S_star, rho=rho, S_prop=S_prop, rates=user_rates(H, S_prop),
                         dual=d, dual_value=ev.value, iterations=res.iterations,
                         converged=True, trace=trace)


def _pd_cut(sel, taylor, exc, K):
    """Feasibility cut from a singular C_k: minus the gradient of q^H C_k q."""
    q, k = exc.eigenvector, exc.index
    w = np.abs(q) ** 2
    d_mu = sel[:-1] @ w - sel[-1] @ w
    d_lam = np.real(np.einsum("a,iab,b->i", q.conj(), taylor.F, q))
    d_lam[k] = 0.0
    return -np.concatenate([d_lam, d_mu])
