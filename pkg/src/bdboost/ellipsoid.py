"""Central-cut ellipsoid method for constrained convex minimization.

The ellipsoid is ``{y : (y - x)^T E^{-1} (y - x) <= 1}``. An oracle maps a
point to a :class:`Cut`: a feasibility cut (any g with g^T (y - x) <= 0 for
every feasible y) or an objective cut carrying a subgradient and the value.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .linalg import InvalidInputError

__all__ = [
    "OBJECTIVE",
    "FEASIBILITY",
    "Cut",
    "EllipsoidState",
    "MinimizeResult",
    "InfeasibleError",
    "init_ellipsoid",
    "cut_update",
    "minimize",
]

OBJECTIVE = "objective"
FEASIBILITY = "feasibility"


@dataclass
class Cut:
    kind: str
    g: np.ndarray
    value: Optional[float] = None
    info: object = None


@dataclass
class EllipsoidState:
    x: np.ndarray
    E: np.ndarray
    iteration: int = 0

    @property
    def n(self):
        return self.x.shape[0]

    def width(self, g):
        """sqrt(g^T E g): half-width of the ellipsoid along g."""
        return float(np.sqrt(max(g @ self.E @ g, 0.0)))


@dataclass
class TraceEntry:
    iteration: int
    kind: str
    value: Optional[float]
    width: float
    info: object = None


@dataclass
class MinimizeResult:
    x_best: Optional[np.ndarray]
    f_best: float
    x: np.ndarray
    converged: bool
    iterations: int
    state: EllipsoidState
    trace: list = field(default_factory=list)


class InfeasibleError(RuntimeError):
    """No feasible point was visited within the iteration budget."""

    def __init__(self, message, trace):
        super().__init__(message)
        self.trace = trace


def init_ellipsoid(x0, radius):
    """Ball (or axis-aligned ellipsoid for vector radius) centered at x0."""
    x0 = np.atleast_1d(np.asarray(x0, dtype=float)).copy()
    r = np.broadcast_to(np.asarray(radius, dtype=float), x0.shape)
    if not np.all(np.isfinite(r)) or np.any(r <= 0):
        raise InvalidInputError(f"radius must be positive, got {radius}")
    return EllipsoidState(x=x0, E=np.diag(r ** 2), iteration=0)


def _repair(E):
    E = 0.5 * (E + E.T)
    try:
        np.linalg.cholesky(E)
    except np.linalg.LinAlgError:
        E = E + 1e-14 * np.trace(E) / E.shape[0] * np.eye(E.shape[0])
    return E


def cut_update(st, g):
    """Minimum-volume ellipsoid containing the half {y : g^T (y - x) <= 0}."""
    g = np.asarray(g, dtype=float)
    if g.shape != st.x.shape or not np.all(np.isfinite(g)) or not np.any(g):
        raise InvalidInputError("cut vector must be finite, nonzero and match the dimension")
    Eg = st.E @ g
    gEg = float(g @ Eg)
    if gEg <= 0:
        raise InvalidInputError("degenerate ellipsoid: g^T E g <= 0")
    n = st.n
    b = Eg / np.sqrt(gEg)
    if n == 1:
        return EllipsoidState(x=st.x - 0.5 * b, E=st.E / 4.0, iteration=st.iteration + 1)
    x = st.x - b / (n + 1)
    E = (n * n / (n * n - 1.0)) * (st.E - (2.0 / (n + 1)) * np.outer(b, b))
    return EllipsoidState(x=x, E=_repair(E), iteration=st.iteration + 1)


def minimize(oracle: Callable[[np.ndarray], Cut], x0, radius, stop_tol=1e-6,
             max_iter=None, state=None):
    """Minimize a convex function over a convex set with central cuts.

    Stops at the first objective cut whose width sqrt(g^T E g) is at most
    ``stop_tol`` (an upper bound on the suboptimality of the current center),
    or after ``max_iter`` cuts (default 200 n^2). Raises InfeasibleError if no
    feasible center was ever seen.
    """
    st = state if state is not None else init_ellipsoid(x0, radius)
    n = st.n
    if max_iter is None:
        max_iter = 200 * n * n
    if stop_tol <= 0:
        raise InvalidInputError("stop_tol must be positive")

    trace = []
    x_best, f_best = None, np.inf
    converged = False
    for _ in range(max_iter):
        cut = oracle(st.x)
        g = np.asarray(cut.g, dtype=float)
        feasible = cut.kind == OBJECTIVE
        if feasible and cut.value < f_best:
            x_best, f_best = st.x.copy(), float(cut.value)
        width = st.width(g)
        trace.append(TraceEntry(st.iteration, cut.kind, cut.value if feasible else None,
                                width, cut.info))
        if feasible and (width <= stop_tol or not np.any(g)):
            converged = True
            break
        st = cut_update(st, g)

    if x_best is None:
        raise InfeasibleError(f"no feasible point in {len(trace)} iterations", trace)
    return MinimizeResult(x_best=x_best, f_best=f_best, x=st.x.copy(), converged=converged,
                          iterations=len(trace), state=st, trace=trace)
