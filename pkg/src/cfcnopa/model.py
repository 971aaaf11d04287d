"""Parameter containers and result records shared by all modules.

Quadrature normalization: a single-mode vacuum quadrature has variance 1, so a
pairwise difference of vacuum quadratures has variance 2 and a sum over N modes
has variance N.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

#: Collective quadrature combinations, in the order m1..m4 / n1..n4.
AMPLITUDE_DIFFERENCE = "amplitude_difference"
PHASE_SUM = "phase_sum"
AMPLITUDE_SUM = "amplitude_sum"
PHASE_DIFFERENCE = "phase_difference"
COMBINATIONS = (AMPLITUDE_DIFFERENCE, PHASE_SUM, AMPLITUDE_SUM, PHASE_DIFFERENCE)

#: Pump normalizations: ``k = beta * chi``.
#:   "pair"       chi = gamma1 + gamma2, beta = 1 is the two-mode (pair) threshold
#:   "collective" chi = (gamma1 + gamma2) / (N - 1), beta = 1 is the N-mode threshold
PUMP_NORMALIZATIONS = ("pair", "collective")

CRITERION_BOUND = 4.0


@dataclass(frozen=True)
class NopaParams:
    """Cavity and pump configuration of the NOPA.

    ``gamma1`` and ``gamma2`` are per-round-trip fractions (input coupler and
    intracavity loss), ``tau`` the round-trip time in seconds and ``beta`` the
    square root of pump power over threshold power.
    """

    gamma1: float = 0.1
    gamma2: float = 0.003
    tau: float = 6.7e-10
    n_modes: int = 4
    beta: float = 0.15
    pump_normalization: str = "pair"

    def __post_init__(self):
        if not 0.0 < self.gamma1 <= 1.0:
            raise ValueError(f"gamma1 must lie in (0, 1], got {self.gamma1}")
        if not 0.0 <= self.gamma2 < 1.0:
            raise ValueError(f"gamma2 must lie in [0, 1), got {self.gamma2}")
        if self.gamma1 + self.gamma2 >= 1.0:
            raise ValueError("gamma1 + gamma2 must be < 1")
        if not self.tau > 0.0:
            raise ValueError(f"tau must be positive, got {self.tau}")
        if isinstance(self.n_modes, bool) or int(self.n_modes) != self.n_modes or self.n_modes < 2:
            raise ValueError(f"n_modes must be an integer >= 2, got {self.n_modes}")
        if not 0.0 <= self.beta < 1.0:
            raise ValueError(f"beta must lie in [0, 1), got {self.beta}")
        if self.pump_normalization not in PUMP_NORMALIZATIONS:
            raise ValueError(f"unknown pump normalization {self.pump_normalization!r}")
        object.__setattr__(self, "n_modes", int(self.n_modes))

    @property
    def total_loss(self) -> float:
        return self.gamma1 + self.gamma2


@dataclass(frozen=True)
class LoopParams:
    """Coherent feedback loop: CBS transmissivity ``t`` and loop loss ``l``."""

    t: float = 0.8
    l: float = 0.01

    def __post_init__(self):
        if not 0.0 <= self.t <= 1.0:
            raise ValueError(f"t must lie in [0, 1], got {self.t}")
        if not 0.0 <= self.l < 1.0:
            raise ValueError(f"l must lie in [0, 1), got {self.l}")

    @property
    def r(self) -> float:
        return 1.0 - self.t

    @property
    def s(self) -> float:
        return 1.0 - self.l

    @property
    def loop_gain(self) -> float:
        """Round-trip field amplitude returned to the cavity, sqrt(s r)."""
        return math.sqrt(self.s * self.r)


@dataclass(frozen=True)
class AnalysisPoint:
    """Sideband analysis frequency, stored in Hz."""

    freq_hz: float = 1e6

    def __post_init__(self):
        if not (math.isfinite(self.freq_hz) and self.freq_hz >= 0.0):
            raise ValueError(f"freq_hz must be finite and >= 0, got {self.freq_hz}")

    @property
    def omega(self) -> float:
        return 2.0 * math.pi * self.freq_hz


@dataclass(frozen=True)
class TransferSet:
    """Output = m * (cavity input) + n * (loss vacuum), per combination."""

    m1: complex
    n1: complex
    m2: complex
    n2: complex
    m3: complex
    n3: complex
    m4: complex
    n4: complex

    def pair(self, combination: str) -> tuple[complex, complex]:
        i = COMBINATIONS.index(combination) + 1
        return getattr(self, f"m{i}"), getattr(self, f"n{i}")

    def gains(self) -> tuple[float, float, float, float]:
        """|m_i|^2 + |n_i|^2 for i = 1..4."""
        return tuple(abs(m) ** 2 + abs(n) ** 2 for m, n in map(self.pair, COMBINATIONS))

    def as_array(self) -> np.ndarray:
        return np.array([self.m1, self.n1, self.m2, self.n2, self.m3, self.n3, self.m4, self.n4])


def combination_weight(combination: str, n_modes: int) -> int:
    """Vacuum variance of a combination: 2 for pairwise differences, N for sums."""
    return n_modes if combination in (PHASE_SUM, AMPLITUDE_SUM) else 2


@dataclass(frozen=True)
class VarianceReport:
    """Variances of the four collective combinations of the output field.

    A combination whose linearized dynamics is unstable (beyond its oscillation
    threshold) has divergent fluctuations and is reported as ``inf``; its name
    is listed in ``unstable``.
    """

    v_xdiff: float
    v_ysum: float
    v_xsum: float
    v_ydiff: float
    n_modes: int
    feedback: bool
    unstable: tuple[str, ...] = field(default=())

    @property
    def combined_squeezed(self) -> float:
        return self.v_xdiff + self.v_ysum

    @property
    def combined_antisqueezed(self) -> float:
        return self.v_xsum + self.v_ydiff

    @property
    def vacuum_reference(self) -> float:
        return float(self.n_modes + 2)

    @property
    def criterion_bound(self) -> float:
        return CRITERION_BOUND

    @property
    def stable(self) -> bool:
        return not self.unstable

    def by_combination(self) -> dict[str, float]:
        return dict(zip(COMBINATIONS, (self.v_xdiff, self.v_ysum, self.v_xsum, self.v_ydiff)))

    def as_dict(self) -> dict:
        return {
            "v_xdiff": self.v_xdiff,
            "v_ysum": self.v_ysum,
            "v_xsum": self.v_xsum,
            "v_ydiff": self.v_ydiff,
            "combined_squeezed": self.combined_squeezed,
            "combined_antisqueezed": self.combined_antisqueezed,
            "vacuum_reference": self.vacuum_reference,
            "criterion_bound": self.criterion_bound,
            "stable": self.stable,
        }

    @classmethod
    def from_combinations(cls, values: dict[str, float], n_modes: int, feedback: bool) -> VarianceReport:
        unstable = tuple(c for c in COMBINATIONS if math.isinf(values[c]))
        return cls(
            v_xdiff=values[AMPLITUDE_DIFFERENCE],
            v_ysum=values[PHASE_SUM],
            v_xsum=values[AMPLITUDE_SUM],
            v_ydiff=values[PHASE_DIFFERENCE],
            n_modes=n_modes,
            feedback=feedback,
            unstable=unstable,
        )
