"""Monte-Carlo density evolution for the BP decoder.

The check-node update has no tractable closed form, so per-weight message
densities are estimated by sampling: draw received values under the
all-zero codeword with random adapter signs, draw incoming messages from
the current variable-output density, push them through the exact check
update, and histogram the results.  Variable-node densities follow by
mixing the per-weight densities (each edge carries one weight of the set,
uniformly) and convolving the mixture across the variable's other edges.

Under the adapter ensemble the message law along an edge does not depend
on the edge's sign (flipping the sign together with the symmetric noise
and the other edges' signs is measure preserving), so the mixture over the
2*d_c signed coefficients reduces to the mixture over the d_c positive
weights.  A literal signed mixture of reflected densities would be
symmetric around zero and could never track the decoder, whose densities
drift to the correct side; finite-length simulation agreement is the
arbiter here and confirms the unsigned mixture.

Densities live on a uniform grid of bin centres k*delta for
k in [-K, +K]; having zero as a bin centre keeps every convolution exactly
on-grid.  The extreme bins double as saturation tails at +/-LMAX.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.signal import fftconvolve

from .bp import LLR_MAX, _check_update
from .errors import InvalidConfigurationError
from .weights import WeightSet

DEFAULT_LMAX = 60.0
DEFAULT_BINS = 4097  # odd so that zero is a bin centre
MASS_TOL = 1e-9


@dataclass(frozen=True)
class LlrDensity:
    """Histogram of an LLR density: mass ``mass[i]`` at centre
    ``(i - K) * delta`` with ``K = (len(mass) - 1) / 2``; the end bins hold
    the saturated tail mass at -lmax and +lmax."""

    lmax: float
    mass: np.ndarray

    def __post_init__(self):
        if len(self.mass) % 2 != 1 or len(self.mass) < 3:
            raise InvalidConfigurationError("bin count must be odd and >= 3")
        if self.lmax <= 0:
            raise InvalidConfigurationError("support bound must be positive")

    @property
    def bins(self) -> int:
        return len(self.mass)

    @property
    def delta(self) -> float:
        return 2.0 * self.lmax / (self.bins - 1)

    @property
    def centers(self) -> np.ndarray:
        k = (self.bins - 1) // 2
        return (np.arange(self.bins) - k) * self.delta

    @property
    def tail_neg(self) -> float:
        return float(self.mass[0])

    @property
    def tail_pos(self) -> float:
        return float(self.mass[-1])

    def total_mass(self) -> float:
        return float(self.mass.sum())

    def mean(self) -> float:
        return float(np.dot(self.centers, self.mass))

    def cdf(self) -> np.ndarray:
        return np.cumsum(self.mass)

    def ber(self) -> float:
        """Mass below zero; the bin straddling zero is split proportionally
        to its sub-interval below zero."""
        edges_hi = self.centers + self.delta / 2.0
        edges_lo = self.centers - self.delta / 2.0
        frac = np.clip((0.0 - edges_lo) / self.delta, 0.0, 1.0)
        frac[edges_hi <= 0.0] = 1.0
        frac[edges_lo >= 0.0] = 0.0
        # saturation tails are point masses, not intervals
        frac[0], frac[-1] = 1.0, 0.0
        return float(np.dot(frac, self.mass))

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        cum = np.cumsum(self.mass)
        cum /= cum[-1]
        return self.centers[np.searchsorted(cum, rng.random(size))]

    def convolve(self, other: "LlrDensity") -> "LlrDensity":
        if self.bins != other.bins or self.lmax != other.lmax:
            raise InvalidConfigurationError("densities live on different bin grids")
        full = fftconvolve(self.mass, other.mass)
        k = (self.bins - 1) // 2
        out = full[k:3 * k + 1].copy()
        out[0] += full[:k].sum()
        out[-1] += full[3 * k + 1:].sum()
        np.clip(out, 0.0, None, out=out)
        return LlrDensity(self.lmax, out)

    def self_convolve(self, folds: int) -> "LlrDensity":
        """``folds``-fold convolution of the density with itself; zero folds
        give the identity (a point mass at zero)."""
        if folds < 0:
            raise InvalidConfigurationError("fold count must be non-negative")
        out = point_mass(0.0, self.lmax, self.bins)
        for _ in range(folds):
            out = out.convolve(self)
        return out


def point_mass(value: float, lmax: float = DEFAULT_LMAX, bins: int = DEFAULT_BINS) -> LlrDensity:
    mass = np.zeros(bins)
    k = (bins - 1) // 2
    delta = 2.0 * lmax / (bins - 1)
    idx = int(np.clip(round(value / delta), -k, k)) + k
    mass[idx] = 1.0
    return LlrDensity(lmax, mass)


def from_samples(samples: np.ndarray, lmax: float = DEFAULT_LMAX,
                 bins: int = DEFAULT_BINS) -> LlrDensity:
    k = (bins - 1) // 2
    delta = 2.0 * lmax / (bins - 1)
    idx = np.clip(np.rint(np.asarray(samples) / delta), -k, k).astype(np.int64) + k
    mass = np.bincount(idx, minlength=bins).astype(np.float64)
    return LlrDensity(lmax, mass / mass.sum())


def mix_densities(densities, proportions=None) -> LlrDensity:
    first = densities[0]
    for d in densities[1:]:
        if d.bins != first.bins or d.lmax != first.lmax:
            raise InvalidConfigurationError("densities live on different bin grids")
    if proportions is None:
        proportions = np.full(len(densities), 1.0 / len(densities))
    mass = sum(p * d.mass for p, d in zip(proportions, densities))
    return LlrDensity(first.lmax, mass)


def fractional_fold(density: LlrDensity, folds: float) -> LlrDensity:
    """Non-integer fold counts mix the floor and ceiling convolutions with
    the matching mean (regular-ensemble surrogate for fractional degrees)."""
    lo = math.floor(folds)
    frac = folds - lo
    low = density.self_convolve(lo)
    if frac < 1e-12:
        return low
    high = low.convolve(density)
    return mix_densities([low, high], [1.0 - frac, frac])


@dataclass
class DEState:
    """Evolving densities for one (d_c, d_v, weights, snr) operating point."""

    weights: WeightSet
    d_v: float
    snr: float
    f_vc: LlrDensity
    check_densities: list[LlrDensity] = field(default_factory=list)
    iteration: int = 0

    @property
    def d_c(self) -> int:
        return self.weights.degree

    @property
    def sigma2(self) -> float:
        return 1.0 / self.snr

    @classmethod
    def initial(cls, weights: WeightSet, r_afc: float, snr: float,
                lmax: float = DEFAULT_LMAX, bins: int = DEFAULT_BINS) -> "DEState":
        if r_afc <= 0 or snr <= 0:
            raise InvalidConfigurationError("rate and SNR must be positive")
        d_v = weights.degree / r_afc
        return cls(weights=weights, d_v=d_v, snr=snr,
                   f_vc=point_mass(0.0, lmax, bins))


def sample_check_density(state: DEState, samples: int, rng_seed) -> list[LlrDensity]:
    """Monte-Carlo estimate of the check-output density for each weight.

    For weight ``w`` the target edge carries ``w`` and the remaining edges
    carry the other weights of the set; all edge signs are uniform, the
    transmitted block is all-zero, and incoming messages are drawn from the
    current variable-output density (a point mass at zero before the first
    round).
    """
    if samples < 100:
        raise InvalidConfigurationError("need at least 100 samples per density")
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)
    w = np.asarray(state.weights.weights)
    d = state.d_c
    sigma2 = state.sigma2
    out = []
    for t in range(d):
        order = np.concatenate(([t], np.delete(np.arange(d), t)))
        amps = np.tile(w[order], (samples, 1))
        signs = 2 * rng.integers(0, 2, size=(samples, d)) - 1
        amps *= signs
        y = amps.sum(axis=1) + rng.normal(0.0, math.sqrt(sigma2), size=samples)
        incoming = np.zeros((samples, d))
        if d > 1:
            draws = state.f_vc.sample(rng, samples * (d - 1)).reshape(samples, d - 1)
            incoming[:, 1:] = np.clip(draws, -LLR_MAX, LLR_MAX)
        msgs = _check_update(y[None, :], amps[None, :, :], incoming[None, :, :],
                             sigma2)[0, :, 0]
        out.append(from_samples(msgs, state.f_vc.lmax, state.f_vc.bins))
    return out


def mix_and_convolve_variable(state: DEState) -> tuple[LlrDensity, LlrDensity]:
    """Per-edge mixture of the check densities, then the (d_v - 1)-fold
    convolution for variable-output messages and the d_v-fold convolution
    for the decision density."""
    if len(state.check_densities) != state.d_c:
        raise InvalidConfigurationError("check densities missing for some weights")
    f_mix = mix_densities(state.check_densities)
    f_vc = fractional_fold(f_mix, max(state.d_v - 1.0, 0.0))
    f_dec = fractional_fold(f_mix, state.d_v)
    return f_vc, f_dec


def ber_estimate(decision_density: LlrDensity) -> float:
    return decision_density.ber()


@dataclass(frozen=True)
class DEResult:
    ber: float
    decision_density: LlrDensity
    ber_history: list[float]
    iterations_run: int
    decision_trace: dict[int, LlrDensity] = field(default_factory=dict, repr=False)


def run_de(weights: WeightSet, r_afc: float, snr: float, iters: int = 100,
           samples: int = 1000, rng_seed=0, lmax: float = DEFAULT_LMAX,
           bins: int = DEFAULT_BINS, rel_tol: float = 1e-2,
           record_iters=None) -> DEResult:
    """Iterate check sampling and variable convolution.

    Stops after ``iters`` rounds or once the BER changes by less than
    ``rel_tol`` relative between rounds.  ``iters=0`` still performs one
    round with zero-point priors, i.e. returns the channel-only densities.
    ``record_iters`` keeps the decision density of the listed rounds.
    """
    state = DEState.initial(weights, r_afc, snr, lmax=lmax, bins=bins)
    rng = np.random.default_rng(rng_seed)
    rounds = max(1, iters)
    history: list[float] = []
    trace: dict[int, LlrDensity] = {}
    f_dec = point_mass(0.0, lmax, bins)
    for it in range(1, rounds + 1):
        state.check_densities = sample_check_density(state, samples, rng)
        state.f_vc, f_dec = mix_and_convolve_variable(state)
        state.iteration = it
        history.append(f_dec.ber())
        if record_iters and it in record_iters:
            trace[it] = f_dec
        if len(history) >= 2:
            prev, cur = history[-2], history[-1]
            if abs(cur - prev) < rel_tol * max(prev, 1e-12):
                break
    return DEResult(ber=history[-1], decision_density=f_dec, ber_history=history,
                    iterations_run=state.iteration, decision_trace=trace)
