"""Frequency-domain input-output transfer of the multimode NOPA.

Each collective quadrature combination of the N modes is an eigenmode of the
all-to-all parametric coupling, with effective coupling

    amplitude difference  +k        phase sum       +(N-1) k
    amplitude sum         -(N-1) k  phase difference -k

A combination with effective coupling ``kappa`` leaves the cavity as

    out = m * in + n * loss,
    m = (-kappa + g1 - g2 - i w tau) / (kappa + g1 + g2 + i w tau)
    n = 2 sqrt(g1 g2) / (kappa + g1 + g2 + i w tau)

``langevin_oracle`` recovers the same coefficients from the full 2N-quadrature
drift matrix without using these formulas.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import SingularSystem, ThresholdReached
from .model import (
    AMPLITUDE_DIFFERENCE,
    AMPLITUDE_SUM,
    COMBINATIONS,
    PHASE_DIFFERENCE,
    PHASE_SUM,
    AnalysisPoint,
    NopaParams,
    TransferSet,
    VarianceReport,
    combination_weight,
)

POLE_TOLERANCE = 1e-12
_CONDITION_LIMIT = 1e13


def pump_scale(params: NopaParams) -> float:
    """chi in k = beta * chi."""
    chi = params.total_loss
    if params.pump_normalization == "collective":
        chi /= params.n_modes - 1
    return chi


def coupling_from_beta(params: NopaParams) -> float:
    """Parametric coupling k per round trip for the configured pump."""
    return params.beta * pump_scale(params)


def effective_coupling(params: NopaParams, combination: str) -> float:
    k = coupling_from_beta(params)
    collective = (params.n_modes - 1) * k
    return {
        AMPLITUDE_DIFFERENCE: k,
        PHASE_SUM: collective,
        AMPLITUDE_SUM: -collective,
        PHASE_DIFFERENCE: -k,
    }[combination]


def stand_alone_threshold(params: NopaParams) -> float:
    """Pump parameter at which the amplitude-sum combination starts to oscillate."""
    if params.pump_normalization == "collective":
        return 1.0
    return 1.0 / (params.n_modes - 1)


def is_combination_stable(params: NopaParams, combination: str) -> bool:
    """True when the bare cavity damps this combination (decay rate > 0)."""
    return effective_coupling(params, combination) + params.total_loss > 0.0


def transfer_coefficients(params: NopaParams, at: AnalysisPoint) -> TransferSet:
    """Closed-form m1..m4, n1..n4 at one analysis frequency."""
    return transfer_at_omega(params, at.omega)


def transfer_at_omega(params: NopaParams, omega: float) -> TransferSet:
    """As ``transfer_coefficients`` for a signed angular frequency (rad/s)."""
    g1, g2 = params.gamma1, params.gamma2
    iwt = 1j * omega * params.tau
    loss_gain = 2.0 * math.sqrt(g1 * g2)
    coeffs = {}
    for i, combination in enumerate(COMBINATIONS, start=1):
        kappa = effective_coupling(params, combination)
        den = kappa + g1 + g2 + iwt
        if abs(den) < POLE_TOLERANCE:
            raise ThresholdReached(
                f"{combination} pole at beta={params.beta}, omega={omega} rad/s"
            )
        coeffs[f"m{i}"] = complex((-kappa + g1 - g2 - iwt) / den)
        coeffs[f"n{i}"] = complex(loss_gain / den)
    return TransferSet(**coeffs)


def one_minus_transfer(params: NopaParams, at: AnalysisPoint, combination: str) -> complex:
    """1 - m for one combination, 2 (kappa + g2 + i w tau) / (kappa + g1 + g2 + i w tau)."""
    kappa = effective_coupling(params, combination)
    iwt = 1j * at.omega * params.tau
    return complex(2.0 * (kappa + params.gamma2 + iwt) / (kappa + params.total_loss + iwt))


def drift_matrix(params: NopaParams) -> np.ndarray:
    """Drift of the quadrature vector (X_1..X_N, Y_1..Y_N), in units of 1/tau.

    From tau da_i/dt = k sum_{j != i} a_j^+ - (g1 + g2) a_i + ..., with
    X = a + a^+ and Y = -i (a - a^+).
    """
    n = params.n_modes
    k = coupling_from_beta(params)
    coupling = k * (np.ones((n, n)) - np.eye(n))
    damping = params.total_loss * np.eye(n)
    zero = np.zeros((n, n))
    return np.block([[coupling - damping, zero], [zero, -coupling - damping]])


def combination_vector(combination: str, n_modes: int) -> np.ndarray:
    """Quadrature-space direction of a collective combination (modes 1 and 2 for differences)."""
    u = np.zeros(2 * n_modes)
    if combination == AMPLITUDE_DIFFERENCE:
        u[0], u[1] = 1.0, -1.0
    elif combination == PHASE_DIFFERENCE:
        u[n_modes], u[n_modes + 1] = 1.0, -1.0
    elif combination == AMPLITUDE_SUM:
        u[:n_modes] = 1.0
    elif combination == PHASE_SUM:
        u[n_modes:] = 1.0
    else:
        raise ValueError(f"unknown combination {combination!r}")
    return u


def cavity_response(params: NopaParams, at: AnalysisPoint) -> tuple[np.ndarray, np.ndarray]:
    """Full 2N x 2N output response to the coupler input and to the loss port.

    Solves (i w tau - A) x = sqrt(2 g1) x_in + sqrt(2 g2) x_loss and applies
    x_out = sqrt(2 g1) x - x_in.
    """
    dim = 2 * params.n_modes
    lhs = 1j * at.omega * params.tau * np.eye(dim) - drift_matrix(params)
    if np.linalg.cond(lhs) > _CONDITION_LIMIT:
        raise SingularSystem(f"drift system singular at beta={params.beta}, freq={at.freq_hz} Hz")
    rhs = np.hstack(
        [math.sqrt(2 * params.gamma1) * np.eye(dim), math.sqrt(2 * params.gamma2) * np.eye(dim)]
    )
    intracavity = np.linalg.solve(lhs, rhs)
    out = math.sqrt(2 * params.gamma1) * intracavity
    out[:, :dim] -= np.eye(dim)
    return out[:, :dim], out[:, dim:]


def langevin_oracle(params: NopaParams, at: AnalysisPoint) -> TransferSet:
    """Transfer coefficients projected out of the full Langevin solution."""
    from_input, from_loss = cavity_response(params, at)
    coeffs = {}
    for i, combination in enumerate(COMBINATIONS, start=1):
        u = combination_vector(combination, params.n_modes)
        norm = u @ u
        coeffs[f"m{i}"] = complex(u @ from_input @ u / norm)
        coeffs[f"n{i}"] = complex(u @ from_loss @ u / norm)
    return TransferSet(**coeffs)


def transfer_deviation(a: TransferSet, b: TransferSet) -> float:
    """Largest coefficient difference, each relative to the larger of its own
    modulus and the gain norm sqrt(|m|^2 + |n|^2) of its combination."""
    worst = 0.0
    for combination in COMBINATIONS:
        pair_a, pair_b = a.pair(combination), b.pair(combination)
        norm = math.sqrt(max(sum(abs(c) ** 2 for c in pair_a), sum(abs(c) ** 2 for c in pair_b)))
        for x, y in zip(pair_a, pair_b):
            scale = max(abs(x), abs(y), norm)
            if scale > 0.0:
                worst = max(worst, abs(x - y) / scale)
    return worst


def nopa_only_variances(
    params: NopaParams, at: AnalysisPoint, *, strict: bool = False
) -> VarianceReport:
    """Output variances of the bare NOPA with vacuum at every input.

    Combinations past their oscillation threshold come back as ``inf``; with
    ``strict`` they raise ThresholdReached instead.
    """
    transfer = transfer_coefficients(params, at)
    values = {}
    for combination, gain in zip(COMBINATIONS, transfer.gains()):
        if is_combination_stable(params, combination):
            values[combination] = combination_weight(combination, params.n_modes) * gain
        elif strict:
            raise ThresholdReached(f"{combination} above threshold at beta={params.beta}")
        else:
            values[combination] = math.inf
    return VarianceReport.from_combinations(values, params.n_modes, feedback=False)
