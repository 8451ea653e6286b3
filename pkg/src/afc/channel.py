"""AWGN and quasi-static Rayleigh fading channels.

SNR is defined as gamma = 1/sigma^2 for unit-power coded symbols.  Fading
draws a single real gain per block with E[h^2] = 1 (average received SNR
equals gamma); the gain is recorded in the observation, i.e. the receiver
has channel state information.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidConfigurationError


@dataclass(frozen=True)
class ChannelObservation:
    y: np.ndarray
    h: float
    sigma2: float

    def __post_init__(self):
        if self.sigma2 <= 0:
            raise InvalidConfigurationError("noise variance must be positive")
        if self.h <= 0:
            raise InvalidConfigurationError("fading gain must be positive")


def snr_db_to_linear(snr_db: float) -> float:
    return 10.0 ** (snr_db / 10.0)


def snr_linear_to_db(snr: float) -> float:
    return 10.0 * math.log10(snr)


def _rng(rng_seed) -> np.random.Generator:
    if isinstance(rng_seed, np.random.Generator):
        return rng_seed
    return np.random.default_rng(rng_seed)


def awgn(c: np.ndarray, snr: float, rng_seed) -> ChannelObservation:
    """y = c + n with n ~ Normal(0, 1/snr)."""
    if snr <= 0:
        raise InvalidConfigurationError("SNR must be positive")
    c = np.asarray(c, dtype=np.float64)
    sigma2 = 1.0 / snr
    noise = _rng(rng_seed).normal(0.0, math.sqrt(sigma2), size=c.shape)
    return ChannelObservation(y=c + noise, h=1.0, sigma2=sigma2)


NOISE_CHUNK = 64


def keyed_noise(seed: int, count: int, sigma: float) -> np.ndarray:
    """Gaussian noise where value ``i`` depends only on ``(seed, i)``.

    Generated in fixed blocks keyed by ``(seed, block index)``, so prefixes
    are reproducible no matter how incrementally they are consumed.
    """
    blocks = (count + NOISE_CHUNK - 1) // NOISE_CHUNK
    out = np.empty(blocks * NOISE_CHUNK)
    for b in range(blocks):
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence((int(seed), b))))
        out[b * NOISE_CHUNK:(b + 1) * NOISE_CHUNK] = rng.normal(0.0, sigma, NOISE_CHUNK)
    return out[:count]


class GrowableNoise:
    """Incrementally extended keyed-noise buffer (same values as
    ``keyed_noise`` at every prefix length)."""

    def __init__(self, seed: int, sigma: float):
        self.seed, self.sigma = int(seed), float(sigma)
        self.buf = np.empty(0)

    def prefix(self, count: int) -> np.ndarray:
        have = len(self.buf)
        if count > have:
            blocks = (count + NOISE_CHUNK - 1) // NOISE_CHUNK
            first = have // NOISE_CHUNK
            parts = [self.buf[: first * NOISE_CHUNK]]
            for b in range(first, blocks):
                rng = np.random.Generator(
                    np.random.PCG64(np.random.SeedSequence((self.seed, b))))
                parts.append(rng.normal(0.0, self.sigma, NOISE_CHUNK))
            self.buf = np.concatenate(parts)
        return self.buf[:count]


def rayleigh_gain(rng_seed) -> float:
    """One Rayleigh-distributed block gain with E[h^2] = 1."""
    return float(_rng(rng_seed).rayleigh(scale=1.0 / math.sqrt(2.0)))


def rayleigh_block(c: np.ndarray, snr: float, rng_seed,
                   gain_override: float | None = None) -> ChannelObservation:
    """y = h*c + n with one gain per block.

    ``gain_override`` is a test hook that forces the gain while keeping the
    noise stream identical; fading and noise use independent substreams.
    """
    if snr <= 0:
        raise InvalidConfigurationError("SNR must be positive")
    ss = rng_seed if isinstance(rng_seed, np.random.SeedSequence) else np.random.SeedSequence(rng_seed)
    fade_ss, noise_ss = ss.spawn(2)
    h = rayleigh_gain(np.random.default_rng(fade_ss)) if gain_override is None else float(gain_override)
    obs = awgn(h * np.asarray(c, dtype=np.float64), snr, np.random.default_rng(noise_ss))
    return ChannelObservation(y=obs.y, h=h, sigma2=obs.sigma2)
