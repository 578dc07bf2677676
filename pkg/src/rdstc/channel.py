"""Quasi-static Rayleigh block fading for the source/relay/destination links."""

from dataclasses import dataclass, field

import numpy as np

from rdstc.errors import InvalidInputError
from rdstc.numerics import batch_shape, complex_gaussian_matrix

__all__ = [
    "ChannelSet",
    "NoiseModel",
    "SystemDims",
    "draw_channel_set",
    "draw_noise",
    "snr_to_gamma",
    "substream",
]


@dataclass(frozen=True)
class SystemDims:
    """Antenna count, relay count, code length and direct-link switch."""

    n_antennas: int = 2
    n_relays: int = 1
    codeword_slots: int = 2
    direct_link: bool = False

    def __post_init__(self):
        if self.n_antennas < 1 or self.codeword_slots < 1:
            raise InvalidInputError("n_antennas and codeword_slots must be positive")
        if self.n_relays < 0:
            raise InvalidInputError("n_relays must be nonnegative")
        if self.n_relays == 0 and not self.direct_link:
            raise InvalidInputError("no relay and no direct link: no signal path")

    @property
    def N(self):
        return self.n_antennas

    @property
    def T(self):
        return self.codeword_slots


@dataclass(frozen=True)
class NoiseModel:
    """Per-link noise variance; ``sigma2`` applies wherever no override is given."""

    sigma2: float = 1.0
    sigma2_sr: float | None = None
    sigma2_rd: float | None = None

    def __post_init__(self):
        for v in (self.sigma2, self.sigma2_sr, self.sigma2_rd):
            if v is not None and not v > 0:
                raise InvalidInputError("noise variances must be positive")

    @property
    def sd(self):
        return self.sigma2

    @property
    def sr(self):
        return self.sigma2 if self.sigma2_sr is None else self.sigma2_sr

    @property
    def rd(self):
        return self.sigma2 if self.sigma2_rd is None else self.sigma2_rd

    @classmethod
    def from_snr_db(cls, snr_db, symbol_power=1.0):
        return cls(sigma2=symbol_power / snr_to_gamma(snr_db))


@dataclass(frozen=True)
class ChannelSet:
    """Channel matrices of one block (or a batch of blocks along axis 0).

    ``F[k]`` is source->relay k, ``H`` source->destination, ``G[k]``
    relay k->destination. All are ``N x N`` per block.
    """

    F: list
    H: np.ndarray
    G: list
    block_index: int = 0
    batch: tuple = field(default=())


def substream(master_seed, *key):
    """Independent generator for the work unit identified by ``key``.

    Keys are folded into the ``SeedSequence`` spawn key, so a unit's stream
    depends only on ``(master_seed, key)`` and never on execution order.
    """
    seq = np.random.SeedSequence(int(master_seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(seq))


def draw_channel_set(dims, rng, batch=None, block_index=0, fading=True):
    """Draw unit-variance Rayleigh matrices for every link.

    With ``fading=False`` every link is the identity (AWGN-only sanity channel).
    """
    n = dims.N
    shape = batch_shape(batch)
    if not fading:
        eye = np.broadcast_to(np.eye(n, dtype=np.complex128), shape + (n, n)).copy()
        return ChannelSet(
            F=[eye.copy() for _ in range(dims.n_relays)],
            H=eye,
            G=[eye.copy() for _ in range(dims.n_relays)],
            block_index=block_index,
            batch=shape,
        )
    # fixed draw order: F_1..F_nr, H, G_1..G_nr
    F = [complex_gaussian_matrix(n, n, 1.0, rng, shape) for _ in range(dims.n_relays)]
    H = complex_gaussian_matrix(n, n, 1.0, rng, shape)
    G = [complex_gaussian_matrix(n, n, 1.0, rng, shape) for _ in range(dims.n_relays)]
    return ChannelSet(F=F, H=H, G=G, block_index=block_index, batch=shape)


def draw_noise(rows, sigma2, rng, batch=None):
    """Circularly-symmetric AWGN vector(s) with per-entry variance ``sigma2``."""
    if isinstance(sigma2, NoiseModel):
        sigma2 = sigma2.sigma2
    return complex_gaussian_matrix(rows, 1, sigma2, rng, batch)[..., 0]


def snr_to_gamma(snr_db):
    """Linear SNR from decibels."""
    return 10.0 ** (np.asarray(snr_db, dtype=float) / 10.0)
