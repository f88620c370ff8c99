"""Improved precoding over BD: power-factor minimization followed by rescaling."""

from dataclasses import dataclass

import numpy as np

from .boost import minimize_power_factor
from .metrics import user_rates
from .miso import minimize_miso_power, zf_precoders, zf_sinr_targets

__all__ = ["Improvement", "improve_over_bd"]


@dataclass
class Improvement:
    S_prop: np.ndarray
    rho: float
    rates: np.ndarray
    iterations: int
    detail: object

    @property
    def sum_rate(self):
        return float(self.rates.sum())


def improve_over_bd(cfg, ch, bd, exact_miso=True):
    """Proposed covariances for a solved BD instance.

    Single-antenna users go through the exact cone program (unless
    ``exact_miso`` is False); otherwise the linearized problem is solved in
    the dual.
    """
    if exact_miso and cfg.antennas_per_user == 1:
        sol = minimize_miso_power(cfg, ch, zf_sinr_targets(bd), W_init=zf_precoders(bd))
        S = sol.covariances
        return Improvement(S_prop=S, rho=sol.rho, rates=user_rates(ch, S),
                           iterations=sol.iterations, detail=sol)
    sol = minimize_power_factor(cfg, ch, bd, track_rates=False)
    return Improvement(S_prop=sol.S_prop, rho=sol.rho, rates=sol.rates,
                       iterations=sol.iterations, detail=sol)
