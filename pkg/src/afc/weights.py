"""Weight sets for analog fountain codes.

A weight set is the ordered tuple of positive amplitudes that multiply the
selected BPSK symbols in each coded symbol.  Feasible sets are positive
(C1) and unit-power (C2): sum(w_i^2) = 1 up to a small tolerance, so the
average coded-symbol energy is 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import InvalidConfigurationError

POWER_TOL = 1e-3


@dataclass(frozen=True)
class WeightSet:
    """Ordered positive weight coefficients with unit total power.

    ``check_power=False`` skips the unit-power check; used only for
    benchmark sets published without power normalisation.
    """

    weights: tuple[float, ...]
    check_power: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        w = tuple(float(x) for x in self.weights)
        object.__setattr__(self, "weights", w)
        if len(w) < 1:
            raise InvalidConfigurationError("weight set must contain at least one weight")
        if any(x <= 0 for x in w):
            raise InvalidConfigurationError(f"weights must be positive, got {w}")
        if self.check_power and abs(self.power() - 1.0) > POWER_TOL:
            raise InvalidConfigurationError(
                f"weight power {self.power():.6f} deviates from 1 by more than {POWER_TOL}"
            )

    @property
    def degree(self) -> int:
        return len(self.weights)

    def power(self) -> float:
        return sum(x * x for x in self.weights)

    def signed(self) -> tuple[float, ...]:
        """All positive and negative coefficients (2*degree values)."""
        return tuple(self.weights) + tuple(-x for x in self.weights)

    def normalized(self) -> "WeightSet":
        norm = math.sqrt(self.power())
        return WeightSet(tuple(x / norm for x in self.weights))


# Sets found by the weight search in this package at a high operating SNR
# (15 dB) and transmission rate 2, one per check-node degree.
OPTIMIZED_WEIGHTS: dict[int, tuple[float, ...]] = {
    2: (0.7202, 0.6938),
    3: (0.7050, 0.5234, 0.4786),
    4: (0.8632, 0.4495, 0.2300, 0.0004831),
    5: (0.7272, 0.5014, 0.3151, 0.2921, 0.0754),
    6: (0.8006, 0.4914, 0.2357, 0.1802, 0.1713, 0.0174),
    7: (0.7846, 0.4197, 0.4023, 0.1522, 0.1151, 0.0739, 0.0676),
}

# Degree-4 set optimised instead at a low SNR (5 dB) and rate 1/2; the
# coefficients come out nearly equal in that regime.
OPTIMIZED_WEIGHTS_LOW_SNR: dict[int, tuple[float, ...]] = {
    4: (0.5097, 0.4992, 0.4960, 0.4949),
}

# Degree-4 sets from earlier designs, used as comparison baselines.
# Set 6 is published without power normalisation (sum w^2 = 0.9595) and is
# kept verbatim; construct it with check_power=False.
BENCHMARK_WEIGHTS: dict[int, tuple[float, ...]] = {
    1: (0.9103, 0.3641, 0.1655, 0.1071),
    2: (0.8902, 0.3815, 0.2054, 0.1406),
    3: (0.7303, 0.5477, 0.3651, 0.1826),
    4: (0.6576, 0.6576, 0.3288, 0.1644),
    5: (0.8686, 0.4329, 0.2159, 0.1075),
    6: (0.6325, 0.6576, 0.3162, 0.1644),
}


def optimized_weight_set(d_c: int) -> WeightSet:
    if d_c not in OPTIMIZED_WEIGHTS:
        raise InvalidConfigurationError(f"no optimised weight set for degree {d_c}")
    return WeightSet(OPTIMIZED_WEIGHTS[d_c])


def benchmark_weight_set(index: int) -> WeightSet:
    if index not in BENCHMARK_WEIGHTS:
        raise InvalidConfigurationError(f"benchmark weight sets are numbered 1..6, got {index}")
    return WeightSet(BENCHMARK_WEIGHTS[index], check_power=False)
