"""Network dimensions, per-BS antenna selectors and Rayleigh channel draws.

Indices for base stations and users are zero-based throughout the package.
"""

from dataclasses import dataclass, field

import numpy as np

from .linalg import InvalidInputError

__all__ = [
    "NetworkConfig",
    "ChannelSet",
    "make_bs_selector",
    "selector_diagonals",
    "sample_channels",
    "stack_complement",
    "substream",
    "derive_seed",
]

RANK_RTOL = 1e-9
_MAX_REDRAWS = 16


@dataclass(frozen=True)
class NetworkConfig:
    """Cooperative downlink with ``num_bs`` base stations serving ``num_users``.

    Noise power is normalized to one, so ``bs_power`` doubles as the system
    SNR in linear scale.
    """

    num_bs: int
    antennas_per_bs: int
    num_users: int
    antennas_per_user: int
    bs_power: float = 1.0

    noise_power = 1.0

    def __post_init__(self):
        counts = (self.num_bs, self.antennas_per_bs, self.num_users,
                  self.antennas_per_user)
        if any(int(c) != c or c < 1 for c in counts):
            raise InvalidInputError(f"network counts must be positive integers, got {counts}")
        if not (np.isfinite(self.bs_power) and self.bs_power > 0):
            raise InvalidInputError(f"bs_power must be positive, got {self.bs_power}")
        if self.num_tx != self.num_users * self.antennas_per_user:
            raise InvalidInputError(
                "total transmit antennas must equal total receive antennas: "
                f"{self.num_bs}*{self.antennas_per_bs} != "
                f"{self.num_users}*{self.antennas_per_user}")

    @classmethod
    def from_dims(cls, dims, snr_db=None, bs_power=1.0):
        """Build from ``[K_t, N_t, K_r, N_r]``; ``snr_db`` sets the per-BS power."""
        if len(dims) != 4:
            raise InvalidInputError(f"dims must have 4 entries, got {list(dims)}")
        if snr_db is not None:
            bs_power = 10.0 ** (snr_db / 10.0)
        return cls(*(int(d) for d in dims), bs_power=float(bs_power))

    @property
    def dims(self):
        return (self.num_bs, self.antennas_per_bs, self.num_users,
                self.antennas_per_user)

    @property
    def num_tx(self):
        """Total number of transmit antennas M."""
        return self.num_bs * self.antennas_per_bs

    def with_power(self, bs_power):
        return NetworkConfig(*self.dims, bs_power=bs_power)


@dataclass(frozen=True)
class ChannelSet:
    """Per-user channels stacked as an array of shape (K_r, N_r, M)."""

    H: np.ndarray
    seed: int | None = None
    redraws: tuple = field(default=())

    @property
    def num_users(self):
        return self.H.shape[0]

    def __getitem__(self, k):
        return self.H[k]

    def stacked(self):
        """All users' channels as one (K_r N_r) x M matrix."""
        k, nr, m = self.H.shape
        return self.H.reshape(k * nr, m)


def selector_diagonals(cfg):
    """0/1 array of shape (K_t, M); row j is the diagonal of selector B_j."""
    sel = np.zeros((cfg.num_bs, cfg.num_tx))
    for j in range(cfg.num_bs):
        sel[j, j * cfg.antennas_per_bs:(j + 1) * cfg.antennas_per_bs] = 1.0
    return sel


def make_bs_selector(cfg, j):
    """Diagonal selector B_j picking out the antennas of base station j."""
    if not 0 <= j < cfg.num_bs:
        raise IndexError(f"base station index {j} out of range [0, {cfg.num_bs})")
    return np.diag(selector_diagonals(cfg)[j])


def substream(seed, *key):
    """Independent numpy Generator for ``(seed, *key)``.

    Philox (counter-based) keyed through SeedSequence, so a given
    ``(seed, key)`` reproduces the same stream on every platform.
    """
    if int(seed) != seed or not 0 <= seed < 2**64:
        raise InvalidInputError(f"seed must be an integer in [0, 2**64), got {seed}")
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(x) for x in key))
    return np.random.Generator(np.random.Philox(ss))


def derive_seed(seed, *key):
    """Hash ``(seed, *key)`` to a new 64-bit seed."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(x) for x in key))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _full_row_rank(h):
    s = np.linalg.svd(h, compute_uv=False)
    return s[-1] > RANK_RTOL * s[0]


def sample_channels(cfg, seed):
    """Draw i.i.d. CN(0, 1) channels, one Philox substream per user.

    User k reads substream ``(seed, k, attempt)``; ``attempt`` increments only
    on the (probability zero) rank-deficient draw.
    """
    nr, m = cfg.antennas_per_user, cfg.num_tx
    H = np.empty((cfg.num_users, nr, m), dtype=complex)
    redraws = []
    for k in range(cfg.num_users):
        for attempt in range(_MAX_REDRAWS):
            rng = substream(seed, k, attempt)
            re = rng.standard_normal((nr, m))
            im = rng.standard_normal((nr, m))
            h = (re + 1j * im) * np.sqrt(0.5)
            if _full_row_rank(h):
                break
            redraws.append((k, attempt))
        else:  # pragma: no cover
            raise RuntimeError(f"user {k}: no full-rank channel after {_MAX_REDRAWS} draws")
        H[k] = h
    return ChannelSet(H=H, seed=int(seed), redraws=tuple(redraws))


def stack_complement(ch, k):
    """G_k: every user's channel except user k, stacked in index order."""
    H = ch.H if isinstance(ch, ChannelSet) else np.asarray(ch)
    if not 0 <= k < H.shape[0]:
        raise IndexError(f"user index {k} out of range [0, {H.shape[0]})")
    others = np.delete(H, k, axis=0)
    return others.reshape(-1, H.shape[2])
