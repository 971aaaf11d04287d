"""Coherent feedback loop closed around the NOPA.

The control beam splitter (CBS, transmissivity t) mixes the injected field c_in
with the returning loop field d_in; the loss beam splitter (LBS) adds vacuum
e_in with weight sqrt(l):

    a_in  = sqrt(t) c_in + sqrt(r) d_in          r = 1 - t
    c_out = sqrt(t) d_in - sqrt(r) c_in
    d_in  = sqrt(s) a_out + sqrt(l) e_in         s = 1 - l

Every input is a coherent state or vacuum, so its quadrature variance is 1 and
the output variance of a combination is its weight times the sum of squared
moduli of the three amplitudes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import brentq

from .errors import LoopUnstable, SingularSystem
from .model import (
    COMBINATIONS,
    AnalysisPoint,
    LoopParams,
    NopaParams,
    VarianceReport,
    combination_weight,
)
from .nopa import (
    one_minus_transfer,
    combination_vector,
    drift_matrix,
    effective_coupling,
    langevin_oracle,
    stand_alone_threshold,
    transfer_coefficients,
)

LOOP_TOLERANCE = 1e-9


@dataclass(frozen=True)
class LoopAmplitudes:
    coeff_c: complex
    coeff_b: complex
    coeff_e: complex
    combination: str = ""

    @property
    def gain(self) -> float:
        return abs(self.coeff_c) ** 2 + abs(self.coeff_b) ** 2 + abs(self.coeff_e) ** 2


def cbs_matrix(loop: LoopParams) -> np.ndarray:
    """(d_out, c_out) = M @ (c_in, d_in) for the control beam splitter."""
    st, sr = math.sqrt(loop.t), math.sqrt(loop.r)
    return np.array([[st, sr], [-sr, st]])


def closed_loop_amplitudes(
    m: complex,
    n: complex,
    loop: LoopParams,
    combination: str = "",
    one_minus_m: complex | None = None,
) -> LoopAmplitudes:
    """Final-output amplitudes for one combination with NOPA transfer (m, n).

    Solving the loop gives, with D = 1 - m sqrt(s r),

        coeff_c = m t sqrt(s) / D - sqrt(r)                = (m sqrt(s) - sqrt(r)) / D
        coeff_b = sqrt(t s) n / D
        coeff_e = sqrt(t l) + m sqrt(t s r l) / D          = sqrt(t l) / D

    The right-hand forms are evaluated, with D and the numerator of coeff_c
    rearranged so that nothing cancels for nearly closed lossless loops.
    ``one_minus_m`` may be supplied when 1 - m is known more accurately than m.
    """
    t, r, s, l = loop.t, loop.r, loop.s, loop.l
    if t == 0.0:
        # total reflection: the output never sees the cavity
        return LoopAmplitudes(-1.0 + 0j, 0j, 0j, combination)
    g = math.sqrt(s * r)
    if one_minus_m is None:
        one_minus_m = 1.0 - m
    # 1 - g = (1 - s r) / (1 + g) and sqrt(s) - sqrt(r) = (s - r) / (sqrt(s) + sqrt(r))
    den = (t + l - t * l) / (1.0 + g) + g * one_minus_m
    if abs(den) <= LOOP_TOLERANCE:
        raise LoopUnstable(f"loop denominator |1 - m sqrt(sr)| = {abs(den):.3g}")
    num_c = (t - l) / (math.sqrt(s) + math.sqrt(r)) - math.sqrt(s) * one_minus_m
    return LoopAmplitudes(
        coeff_c=complex(num_c / den),
        coeff_b=complex(math.sqrt(t * s) * n / den),
        coeff_e=complex(math.sqrt(t * l) / den),
        combination=combination,
    )


def closed_loop_decay_rate(params: NopaParams, loop: LoopParams, combination: str) -> float:
    """Damping rate (per round trip) of a combination with the loop closed.

    The bare rate kappa + g1 + g2 is lowered by the fraction of the output that
    re-enters the cavity; the loop is stable only while the result is positive.
    """
    g = loop.loop_gain
    # 1 - g written without cancellation: 1 - s r = t + l - t l
    one_minus_g = (loop.t + loop.l - loop.t * loop.l) / (1.0 + g)
    returned = (params.gamma1 * one_minus_g + params.gamma2 * (1.0 + g)) / (1.0 + g)
    return effective_coupling(params, combination) + returned


def _assemble(values: dict[str, float], params: NopaParams) -> VarianceReport:
    return VarianceReport.from_combinations(values, params.n_modes, feedback=True)


def cfc_variance(
    params: NopaParams, loop: LoopParams, at: AnalysisPoint, *, strict: bool = False
) -> VarianceReport:
    """Output variances of the CFC-NOPA system.

    A combination whose closed loop does not decay (the amplitude sum first)
    has divergent fluctuations and is reported as ``inf``; the remaining
    combinations are independent linear subsystems and stay well defined.
    With ``strict`` any unstable combination raises LoopUnstable. At t = 0
    the output is decoupled from the cavity and is never unstable.
    """
    transfer = transfer_coefficients(params, at)
    values = {}
    for combination in COMBINATIONS:
        if loop.t > 0.0 and closed_loop_decay_rate(params, loop, combination) <= 0.0:
            if strict:
                raise LoopUnstable(f"{combination} beyond the feedback-modified threshold")
            values[combination] = math.inf
            continue
        m, n = transfer.pair(combination)
        amps = closed_loop_amplitudes(m, n, loop, combination, one_minus_transfer(params, at, combination))
        values[combination] = combination_weight(combination, params.n_modes) * amps.gain
    return _assemble(values, params)


def _network_system(m: complex, n: complex, loop: LoopParams) -> tuple[np.ndarray, np.ndarray]:
    # unknowns: a_in, a_out, c_out, d_in, d_out; sources: c_in, b_in, e_in
    cbs = cbs_matrix(loop)
    sl, ss = math.sqrt(loop.l), math.sqrt(loop.s)
    lhs = np.zeros((5, 5), dtype=complex)
    rhs = np.zeros((5, 3), dtype=complex)
    # NOPA: a_out = m a_in + n b_in
    lhs[0, [0, 1]] = [-m, 1.0]
    rhs[0, 1] = n
    # LBS: d_in = sqrt(s) a_out + sqrt(l) e_in
    lhs[1, [1, 3]] = [-ss, 1.0]
    rhs[1, 2] = sl
    # CBS: (d_out, c_out) = M (c_in, d_in)
    lhs[2, [3, 4]] = [-cbs[0, 1], 1.0]
    rhs[2, 0] = cbs[0, 0]
    lhs[3, [2, 3]] = [1.0, -cbs[1, 1]]
    rhs[3, 0] = cbs[1, 0]
    # the CBS output d_out is the NOPA input
    lhs[4, [0, 4]] = [1.0, -1.0]
    return lhs, rhs


def _loop_drift_correction(params: NopaParams, loop: LoopParams) -> tuple[float, float]:
    """Extra drift on the cavity field from the instantaneous loop, solved numerically.

    Drives the network with a unit intracavity amplitude (a_out = sqrt(2 g1) a - a_in,
    external inputs off). Returns sqrt(2 g1) * a_in and the final output c_out it
    produces; a zero c_out means the cavity is unobservable from the output.
    """
    lhs, _ = _network_system(0.0, 0.0, loop)
    # replace the NOPA row by the cavity boundary condition a_out + a_in = sqrt(2 g1) a
    lhs[0, :] = 0.0
    lhs[0, [0, 1]] = [1.0, 1.0]
    rhs = np.zeros(5, dtype=complex)
    rhs[0] = math.sqrt(2 * params.gamma1)
    fields = np.linalg.solve(lhs, rhs)
    return float((math.sqrt(2 * params.gamma1) * fields[0]).real), abs(fields[2])


def network_oracle(params: NopaParams, loop: LoopParams, at: AnalysisPoint) -> VarianceReport:
    """Independent route to ``cfc_variance`` by generic linear solves.

    The loop is assembled from the beam-splitter relations and the NOPA transfer
    of ``langevin_oracle``; stability comes from the closed-loop drift matrix.
    """
    transfer = langevin_oracle(params, at)
    drift = drift_matrix(params)
    correction, observed = _loop_drift_correction(params, loop)
    values = {}
    for combination in COMBINATIONS:
        u = combination_vector(combination, params.n_modes)
        rate = u @ drift @ u / (u @ u) + correction
        if observed > 0.0 and rate >= 0.0:
            values[combination] = math.inf
            continue
        m, n = transfer.pair(combination)
        lhs, rhs = _network_system(m, n, loop)
        if observed > 0.0:
            if np.linalg.cond(lhs) > 1e13:
                raise SingularSystem(f"loop network singular for {combination}")
            amplitudes = np.linalg.solve(lhs, rhs)[2]
        else:
            # the cavity loop may be degenerate, but c_out is still fixed uniquely
            amplitudes = np.linalg.lstsq(lhs, rhs, rcond=None)[0][2]
        gain = float(np.sum(np.abs(amplitudes) ** 2))
        values[combination] = combination_weight(combination, params.n_modes) * gain
    return _assemble(values, params)


def modified_threshold(params: NopaParams, loop: LoopParams) -> float:
    """Pump parameter at which the amplitude-sum loop reaches threshold.

    Root of 1 - m3(w=0) sqrt(s r) in beta, found by bracketing on
    (0, stand-alone threshold). ``params.beta`` is ignored. Without a loop
    path the stand-alone threshold is returned.
    """
    upper = stand_alone_threshold(params)
    g = loop.loop_gain
    if g == 0.0:
        return upper
    dc = AnalysisPoint(0.0)

    def f(beta: float) -> float:
        trial = _with_beta(params, beta)
        m3 = transfer_coefficients(trial, dc).m3.real
        return 1.0 - m3 * g

    hi = upper * (1.0 - 1e-9)
    if f(hi) > 0.0:
        return upper
    return brentq(f, 0.0, hi, xtol=1e-13, rtol=4 * np.finfo(float).eps)


def _with_beta(params: NopaParams, beta: float) -> NopaParams:
    return replace(params, beta=beta)
