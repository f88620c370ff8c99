"""Sum-rate boosting over block-diagonalization precoding for cooperative downlinks."""

from .bd import BDSolution, ConvergenceError, DegenerateChannelError, bd_solve
from .boost import BoostSolution, minimize_power_factor
from .ellipsoid import InfeasibleError
from .improve import Improvement, improve_over_bd
from .linalg import InvalidInputError, NotPositiveDefiniteError
from .metrics import leakage_norm, per_bs_powers, snr_boost_db, sum_rate, user_rates
from .miso import MisoPowerSolution, minimize_miso_power, zf_sinr_targets
from .network import ChannelSet, NetworkConfig, derive_seed, sample_channels

__version__ = "0.1.0"

__all__ = [
    "NetworkConfig", "ChannelSet", "sample_channels", "derive_seed",
    "bd_solve", "BDSolution", "minimize_power_factor", "BoostSolution", "minimize_miso_power", "MisoPowerSolution",
    "zf_sinr_targets", "improve_over_bd", "Improvement",
    "user_rates", "sum_rate", "per_bs_powers", "leakage_norm", "snr_boost_db",
    "InvalidInputError", "NotPositiveDefiniteError", "DegenerateChannelError",
    "ConvergenceError", "InfeasibleError",
]
