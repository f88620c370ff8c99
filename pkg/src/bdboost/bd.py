"""Sum-rate optimal block diagonalization under per-BS power constraints.

Each user's covariance is confined to the null space of the other users'
channels, S_k = V_k Q_k V_k^H, which removes all inter-user interference and
leaves the convex problem

    maximize   sum_k ln det(I + Heff_k Q_k Heff_k^H)
    subject to sum_k Tr(B_j V_k Q_k V_k^H) <= P  for every BS j,  Q_k >= 0.

It is solved in the dual: for fixed multipliers mu the Lagrangian splits per
user into a whitened water-filling problem, and the ellipsoid method
minimizes the dual function over mu >= 0.
"""

from dataclasses import dataclass, field

import numpy as np

from . import ellipsoid
from .linalg import InvalidInputError, NotPositiveDefiniteError, null_space_basis
from .network import ChannelSet, selector_diagonals, stack_complement
from .waterfill import whitened_waterfill

__all__ = [
    "DegenerateChannelError",
    "ConvergenceError",
    "BDNullSpace",
    "BDSolution",
    "build_null_spaces",
    "bd_primal_update",
    "bd_objective",
    "bd_solve",
]


class DegenerateChannelError(InvalidInputError):
    """A user's complement channel leaves a null space of the wrong size."""


class ConvergenceError(RuntimeError):
    """Iteration budget exhausted before the stopping rule fired."""

    def __init__(self, message, trace=None, best=None):
        super().__init__(message)
        self.trace = trace
        self.best = best


@dataclass
class BDNullSpace:
    V: np.ndarray     # (K, M, N_r) orthonormal null-space bases
    Heff: np.ndarray  # (K, N_r, N_r) effective channels H_k V_k


@dataclass
class BDSolution:
    ns: BDNullSpace
    Q: np.ndarray        # (K, N_r, N_r)
    S: np.ndarray        # (K, M, M)
    rates: np.ndarray    # (K,) nats
    mu: np.ndarray       # (K_t,) per-BS multipliers
    dual_value: float
    iterations: int
    converged: bool = True
    trace: list = field(default_factory=list, repr=False)

    @property
    def sum_rate(self):
        return float(self.rates.sum())

    @property
    def primal_value(self):
        return self.sum_rate

    @property
    def duality_gap(self):
        return abs(self.dual_value - self.primal_value)


def build_null_spaces(ch, tol=1e-9):
    """Null-space basis V_k of G_k for every user, plus H_k V_k."""
    H = ch.H if isinstance(ch, ChannelSet) else np.asarray(ch)
    K, nr, m = H.shape
    V = np.empty((K, m, nr), dtype=complex)
    for k in range(K):
        basis = null_space_basis(stack_complement(H, k), tol)
        if basis.shape[1] != nr:
            raise DegenerateChannelError(
                f"user {k}: null space has dimension {basis.shape[1]}, expected {nr}")
        V[k] = basis
    return BDNullSpace(V=V, Heff=H @ V)


def _reduced_cost(ns, cost_diag):
    """A_k = V_k^H diag(cost_diag) V_k."""
    Vh = np.swapaxes(ns.V, -1, -2).conj()
    return Vh @ (ns.V * cost_diag[None, :, None])


def bd_primal_update(ns, cost_diag):
    """Water-filling Q_k for per-antenna cost ``cost_diag`` (= sum_j mu_j diag B_j).

    Returns the :class:`~bdboost.waterfill.WaterfillResult` in the reduced
    N_r-dimensional coordinates; ``.S`` is Q. A singular A_k raises
    NotPositiveDefiniteError whose eigenvector is mapped back to antenna space.
    """
    A = _reduced_cost(ns, np.asarray(cost_diag, dtype=float))
    try:
        return whitened_waterfill(ns.Heff, A, np.ones(ns.V.shape[0]))
    except NotPositiveDefiniteError as exc:
        q = ns.V[exc.index] @ exc.eigenvector
        raise NotPositiveDefiniteError(exc.eigenvalue, q, index=exc.index) from None


def bd_objective(ns, Q):
    """Sum over users of ln det(I + Heff_k Q_k Heff_k^H)."""
    G = ns.Heff @ Q @ np.swapaxes(ns.Heff, -1, -2).conj()
    eye = np.eye(G.shape[-1])
    return float(np.sum(np.linalg.slogdet(eye + G)[1]))


def _antenna_power(ns, wf):
    """Per-antenna power of S_k = V_k Q_k V_k^H summed over users."""
    Y = ns.V @ wf.X
    return np.sum(np.abs(Y) ** 2, axis=(0, 2))


def bd_solve(cfg, ch, stop_tol=1e-12, max_iter=None, gap_rtol=1e-3):
    """Optimal BD covariances and the rate tuple they achieve.

    The dual is minimized from mu_j = 1/(P K_t) inside a ball of radius
    10 max(1, 1/P). The primal is recovered at the best dual point and scaled
    so that the most loaded BS transmits exactly P.
    """
    ns = build_null_spaces(ch)
    sel = selector_diagonals(cfg)
    P = cfg.bs_power
    n = cfg.num_bs

    def oracle(mu):
        if np.any(mu < 0):
            j = int(np.argmin(mu))
            g = np.zeros(n)
            g[j] = -1.0
            return ellipsoid.Cut(ellipsoid.FEASIBILITY, g)
        try:
            wf = bd_primal_update(ns, sel.T @ mu)
        except NotPositiveDefiniteError as exc:
            # min-eigenvalue of A_k is concave in mu; cut along minus its gradient
            g = -(sel @ np.abs(exc.eigenvector) ** 2)
            return ellipsoid.Cut(ellipsoid.FEASIBILITY, g)
        power = sel @ _antenna_power(ns, wf)
        value = float(np.sum(wf.logdet - wf.cost) + P * mu.sum())
        return ellipsoid.Cut(ellipsoid.OBJECTIVE, P - power, value)

    x0 = np.full(n, 1.0 / (P * n))
    radius = 10.0 * max(1.0, 1.0 / P)
    res = ellipsoid.minimize(oracle, x0, radius, stop_tol=stop_tol, max_iter=max_iter)
    if not res.converged:
        raise ConvergenceError(f"BD dual did not converge in {res.iterations} iterations",
                               trace=res.trace, best=res.x_best)

    mu = res.x_best
    wf = bd_primal_update(ns, sel.T @ mu)
    power = sel @ _antenna_power(ns, wf)
    scale = P / power.max()
    Q = scale * wf.S
    rates = np.log1p(scale * wf.sigma ** 2 * wf.d).sum(axis=-1)
    S = ns.V @ Q @ np.swapaxes(ns.V, -1, -2).conj()
    sol = BDSolution(ns=ns, Q=Q, S=S, rates=rates, mu=mu, dual_value=res.f_best,
                     iterations=res.iterations, trace=res.trace)
    if sol.duality_gap > gap_rtol * (1.0 + abs(sol.dual_value)):
        raise ConvergenceError(
            f"BD duality gap {sol.duality_gap:.3e} above tolerance", trace=res.trace, best=mu)
    return sol
