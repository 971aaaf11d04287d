"""One-dimensional sweeps, crossover/optimum location and joint optimization."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .errors import CfcNopaError, EmptyResult
from .feedback import cfc_variance
from .model import AnalysisPoint, LoopParams, NopaParams
from .nopa import nopa_only_variances, stand_alone_threshold

AXES = ("t", "freq_hz", "beta")
AXIS_ALIASES = {
    "transmissivity_t": "t",
    "frequency_hz": "freq_hz",
    "frequency": "freq_hz",
    "freq": "freq_hz",
}
AXIS_TOLERANCE = 1e-6
DEFAULT_POINTS = 501
_ZERO = 1e-12
_TIE = 1e-12


def canonical_axis(axis: str) -> str:
    axis = AXIS_ALIASES.get(axis, axis)
    if axis not in AXES:
        raise ValueError(f"unknown sweep axis {axis!r}; expected one of {AXES}")
    return axis


def with_axis(nopa: NopaParams, loop: LoopParams, at: AnalysisPoint, axis: str, value: float):
    """Copy of the configuration with one field replaced."""
    if axis == "t":
        return nopa, replace(loop, t=value), at
    if axis == "beta":
        return replace(nopa, beta=value), loop, at
    return nopa, loop, replace(at, freq_hz=value)


@dataclass(frozen=True)
class SamplePoint:
    cfc: float
    bare: float
    stable: bool

    @property
    def is_gap(self) -> bool:
        return math.isnan(self.cfc) or math.isnan(self.bare)


_GAP = SamplePoint(math.nan, math.nan, False)


def evaluate(nopa: NopaParams, loop: LoopParams, at: AnalysisPoint) -> SamplePoint:
    """combined_squeezed with and without feedback; a gap if either is undefined."""
    try:
        cfc = cfc_variance(nopa, loop, at)
        bare = nopa_only_variances(nopa, at)
    except CfcNopaError:
        return _GAP
    if math.isinf(cfc.combined_squeezed) or math.isinf(bare.combined_squeezed):
        return _GAP
    return SamplePoint(cfc.combined_squeezed, bare.combined_squeezed, cfc.stable and bare.stable)


@dataclass(frozen=True)
class SweepSpec:
    axis: str
    from_value: float
    to_value: float
    points: int = DEFAULT_POINTS
    nopa: NopaParams = field(default_factory=NopaParams)
    loop: LoopParams = field(default_factory=LoopParams)
    at: AnalysisPoint = field(default_factory=AnalysisPoint)

    def __post_init__(self):
        object.__setattr__(self, "axis", canonical_axis(self.axis))
        if not self.from_value < self.to_value:
            raise ValueError("from_value must be < to_value")
        if self.points < 2:
            raise ValueError("points must be >= 2")
        lo, hi = {"t": (0.0, 1.0), "beta": (0.0, 1.0), "freq_hz": (0.0, math.inf)}[self.axis]
        if self.from_value < lo or self.to_value > hi or (self.axis == "beta" and self.to_value >= 1.0):
            raise ValueError(f"sweep bounds outside the valid range of {self.axis}")

    def grid(self) -> np.ndarray:
        return np.linspace(self.from_value, self.to_value, self.points)

    def at_value(self, value: float) -> SamplePoint:
        try:
            config = with_axis(self.nopa, self.loop, self.at, self.axis, float(value))
        except ValueError:
            return _GAP
        return evaluate(*config)


@dataclass
class SweepResult:
    axis: str
    axis_values: np.ndarray
    cfc_values: np.ndarray
    bare_values: np.ndarray
    stable: np.ndarray
    crossovers: list[float]
    optimum: tuple[float, float]

    @property
    def gaps(self) -> np.ndarray:
        return np.isnan(self.cfc_values)

    def best_window(self, fraction: float = 0.1) -> tuple[float, float]:
        """Contiguous axis range around the optimum where cfc <= (1 + fraction) * minimum."""
        limit = self.optimum[1] * (1.0 + fraction)
        ok = np.where(np.isnan(self.cfc_values), False, self.cfc_values <= limit)
        centre = int(np.argmin(np.abs(self.axis_values - self.optimum[0])))
        lo = hi = centre
        while lo > 0 and ok[lo - 1]:
            lo -= 1
        while hi < len(ok) - 1 and ok[hi + 1]:
            hi += 1
        return float(self.axis_values[lo]), float(self.axis_values[hi])


def _sign(d: float) -> int:
    if math.isnan(d) or abs(d) <= _ZERO:
        return 0
    return 1 if d > 0 else -1


def _difference(spec: SweepSpec, x: float) -> float:
    p = spec.at_value(x)
    return p.cfc - p.bare


def _crossovers(spec: SweepSpec, xs: np.ndarray, diff: np.ndarray) -> list[float]:
    found = []
    last = None  # (index, sign) of the previous nonzero finite sample
    for i, d in enumerate(diff):
        if math.isnan(d):
            last = None
            continue
        sign = _sign(d)
        if sign == 0:
            continue
        if last is not None and last[1] != sign:
            j = last[0]
            if j + 1 < i:
                # an exact zero sample sits between the two signs
                found.append(float(xs[j + 1]))
            else:
                root = brentq(lambda x: _difference(spec, x), xs[j], xs[i], xtol=1e-13, rtol=1e-15)
                found.append(float(root))
        last = (i, sign)
    return found


def _refine_minimum(objective, xs: np.ndarray, values: np.ndarray) -> tuple[float, float]:
    """Grid minimum, then bounded Brent refinement inside the neighbouring cells.

    Values within ``_TIE`` (relative) of the minimum count as ties and the
    smallest axis value wins.
    """
    lowest = np.nanmin(values)
    tie = _TIE * max(abs(lowest), 1.0)
    i = int(np.flatnonzero(np.where(np.isnan(values), np.inf, values) <= lowest + tie)[0])
    best = (float(xs[i]), float(values[i]))
    lo, hi = xs[max(i - 1, 0)], xs[min(i + 1, len(xs) - 1)]
    res = minimize_scalar(objective, bounds=(lo, hi), method="bounded", options={"xatol": AXIS_TOLERANCE / 10})
    if res.success and math.isfinite(res.fun) and res.fun < min(best[1], lowest) - tie:
        best = (float(res.x), float(res.fun))
    return best


def run_sweep(spec: SweepSpec, workers: int | None = None) -> SweepResult:
    """Evaluate the sweep grid and locate crossovers (cfc = bare) and the cfc optimum.

    Points where either variance is undefined are kept as NaN gaps.
    """
    xs = spec.grid()
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            samples = list(pool.map(spec.at_value, xs))
    else:
        samples = [spec.at_value(x) for x in xs]
    cfc = np.array([p.cfc for p in samples])
    bare = np.array([p.bare for p in samples])
    stable = np.array([p.stable for p in samples])
    if np.all(np.isnan(cfc)):
        raise EmptyResult(f"every {spec.axis} sample is unstable")

    def objective(x: float) -> float:
        value = spec.at_value(x).cfc
        return math.inf if math.isnan(value) else value

    return SweepResult(
        axis=spec.axis,
        axis_values=xs,
        cfc_values=cfc,
        bare_values=bare,
        stable=stable,
        crossovers=_crossovers(spec, xs, cfc - bare),
        optimum=_refine_minimum(objective, xs, cfc),
    )


@dataclass(frozen=True)
class JointOptimum:
    t: float
    beta: float
    value: float


def default_beta_max(nopa: NopaParams) -> float:
    """Largest pump kept in the search: just below the bare amplitude-sum threshold."""
    return min(stand_alone_threshold(nopa), 1.0) * (1.0 - 1e-6)


def _objective(nopa: NopaParams, loop: LoopParams, at: AnalysisPoint, t: float, beta: float) -> float:
    try:
        point = evaluate(replace(nopa, beta=beta), replace(loop, t=t), at)
    except ValueError:
        return math.inf
    return math.inf if point.is_gap else point.cfc


def optimize_joint(
    nopa: NopaParams,
    loop: LoopParams,
    at: AnalysisPoint,
    free=("t",),
    *,
    points: int = DEFAULT_POINTS,
    seed_points: int = 101,
    beta_max: float | None = None,
) -> JointOptimum:
    """Minimize combined_squeezed over the free subset of {t, beta}.

    One free variable: grid of ``points`` plus bounded refinement. Two: best
    seed of a ``seed_points`` x ``seed_points`` grid, then coordinate descent
    confined to the neighbouring grid cells. Ties resolve to the smallest axis
    value.
    """
    free = tuple(sorted(set(free), key=("t", "beta").index))
    if not free or any(f not in ("t", "beta") for f in free):
        raise ValueError("free must be a non-empty subset of {'t', 'beta'}")
    beta_max = default_beta_max(nopa) if beta_max is None else beta_max

    if len(free) == 1:
        axis = free[0]
        hi = 1.0 if axis == "t" else beta_max
        result = run_sweep(SweepSpec(axis, 0.0, hi, points, nopa, loop, at))
        x, value = result.optimum
        if axis == "t":
            return JointOptimum(x, nopa.beta, value)
        return JointOptimum(loop.t, x, value)

    ts = np.linspace(0.0, 1.0, seed_points)
    betas = np.linspace(0.0, beta_max, seed_points)
    grid = np.array([[_objective(nopa, loop, at, t, b) for b in betas] for t in ts])
    if not np.isfinite(grid).any():
        raise EmptyResult("no stable configuration on the seed grid")
    i, j = np.unravel_index(int(np.argmin(grid)), grid.shape)
    t, beta, value = float(ts[i]), float(betas[j]), float(grid[i, j])
    dt, db = ts[1] - ts[0], betas[1] - betas[0]

    for _ in range(200):
        previous = value
        res = minimize_scalar(
            lambda x: _objective(nopa, loop, at, x, beta),
            bounds=(max(0.0, t - dt), min(1.0, t + dt)),
            method="bounded",
            options={"xatol": AXIS_TOLERANCE / 10},
        )
        if res.fun < value:
            t, value = float(res.x), float(res.fun)
        res = minimize_scalar(
            lambda x: _objective(nopa, loop, at, t, x),
            bounds=(max(0.0, beta - db), min(beta_max, beta + db)),
            method="bounded",
            options={"xatol": AXIS_TOLERANCE / 10},
        )
        if res.fun < value:
            beta, value = float(res.x), float(res.fun)
        if previous - value <= 1e-13:
            break
    return JointOptimum(t, beta, value)
