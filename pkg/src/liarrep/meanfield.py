"""Mean-field ODE of the reputation process: exact solutions and fixed points.

The drift is linear on either side of the switching line ``alpha/(alpha+beta) = d``
and both counters relax at the common rate ``1 - u``.  Within a region the
solution is ``x(t) = c * exp(-(1-u)(t - t0)) + x_inf`` and the switching
function ``(1-d)*alpha - d*beta`` is a single exponential plus a constant, so
crossing times have a closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import ChatterDetected, DegenerateDenominator, DegenerateState
from .model import ModelParams, ratio


class Region(Enum):
    ABOVE = "Above"  # reputation > d, lies rejected
    BELOW = "Below"  # reputation <= d, lies accepted


class FixedPointKind(Enum):
    TRUE = "True"
    FALSE = "False"


class Regime(Enum):
    SUBCRITICAL = "Subcritical"
    BISTABLE = "Bistable"
    FALSE_ONLY = "FalseOnly"


def region_of(alpha: float, beta: float, d: float) -> Region:
    return Region.BELOW if ratio(alpha, beta) <= d else Region.ABOVE


def asymptote(region: Region, params: ModelParams) -> tuple[float, float]:
    k = 1.0 - params.u
    a_inf = params.p * params.theta / k
    if region is Region.ABOVE:
        return a_inf, params.p * (1.0 - params.theta) / k
    return a_inf, (params.p * (1.0 - params.theta) + params.omega * params.pbar) / k


def ode_rhs(state, params: ModelParams) -> tuple[float, float]:
    alpha, beta = state
    lie = params.omega * params.pbar if region_of(alpha, beta, params.d) is Region.BELOW else 0.0
    da = (params.u - 1.0) * alpha + params.p * params.theta
    db = (params.u - 1.0) * beta + params.p * (1.0 - params.theta) + lie
    return da, db


@dataclass(frozen=True)
class Segment:
    """Closed-form piece of the ODE solution valid from ``t_start``.

    ``t_end`` is None for the final, open-ended segment.
    """

    t_start: float
    t_end: float | None
    region: Region
    c_alpha: float
    c_beta: float
    asymptote_alpha: float
    asymptote_beta: float
    rate: float

    def state_at(self, t):
        decay = np.exp(-self.rate * (np.asarray(t, dtype=float) - self.t_start))
        return (self.c_alpha * decay + self.asymptote_alpha,
                self.c_beta * decay + self.asymptote_beta)

    @property
    def start_state(self) -> tuple[float, float]:
        return self.c_alpha + self.asymptote_alpha, self.c_beta + self.asymptote_beta

    def ended(self, t_end: float) -> "Segment":
        return Segment(self.t_start, t_end, self.region, self.c_alpha, self.c_beta,
                       self.asymptote_alpha, self.asymptote_beta, self.rate)


def segment_solution(initial, region: Region, params: ModelParams, t_start: float = 0.0) -> Segment:
    a0, b0 = initial
    a_inf, b_inf = asymptote(region, params)
    return Segment(t_start, None, region, a0 - a_inf, b0 - b_inf, a_inf, b_inf, 1.0 - params.u)


def _switching_constants(seg: Segment, d: float) -> tuple[float, float]:
    C = (1.0 - d) * seg.c_alpha - d * seg.c_beta
    K = (1.0 - d) * seg.asymptote_alpha - d * seg.asymptote_beta
    return C, K


def crossing_time(seg: Segment, d: float) -> float | None:
    """Time after ``seg.t_start`` at which the path leaves the segment's region.

    None when it never does; 0.0 when the start sits on the switching line and
    the field points out of the region.  Leaving Below requires the switching
    function to tend to a positive limit, leaving Above a negative one.
    """
    C, K = _switching_constants(seg, d)
    if C == 0.0:
        return None
    if seg.region is Region.BELOW and not K > 0.0:
        return None
    if seg.region is Region.ABOVE and not K < 0.0:
        return None
    r = -K / C
    if r >= 1.0:
        # starts on the line (up to rounding) with the field pointing out
        return 0.0
    if not r > 0.0:
        return None
    return -math.log(r) / seg.rate


@dataclass(frozen=True)
class PiecewiseSolution:
    segments: tuple[Segment, ...]
    t_end: float
    params: ModelParams = field(repr=False)

    def segment_index(self, t) -> np.ndarray:
        starts = np.array([s.t_start for s in self.segments])
        return np.searchsorted(starts, np.asarray(t, dtype=float), side="right") - 1

    def evaluate(self, t):
        """Closed-form (alpha, beta) at time(s) ``t >= 0``."""
        t = np.asarray(t, dtype=float)
        idx = np.clip(self.segment_index(t), 0, None)
        alpha = np.empty_like(t)
        beta = np.empty_like(t)
        for k, seg in enumerate(self.segments):
            mask = idx == k
            if np.any(mask):
                alpha[mask], beta[mask] = seg.state_at(t[mask])
        return alpha, beta

    def state_at(self, t: float) -> tuple[float, float]:
        a, b = self.evaluate(np.array([t]))
        return float(a[0]), float(b[0])

    def reputation_at(self, t):
        a, b = self.evaluate(t)
        return a / (a + b)

    @property
    def crossings(self) -> list[float]:
        return [s.t_start for s in self.segments[1:]]


def _starting_region(a0: float, b0: float, params: ModelParams) -> Region:
    region = region_of(a0, b0, params.d)
    if region is Region.BELOW and ratio(a0, b0) == params.d:
        # exactly on the line with the Below field pointing up: leaves at once
        _, K = _switching_constants(segment_solution((a0, b0), region, params), params.d)
        if K > 0.0:
            return Region.ABOVE
    return region


def solve(initial, params: ModelParams, t_end: float, max_crossings: int = 64) -> PiecewiseSolution:
    """Exact event-driven solution of the mean ODE on ``[0, t_end]``."""
    a0, b0 = float(initial[0]), float(initial[1])
    if a0 + b0 == 0.0:
        raise DegenerateState("alpha + beta == 0")
    if not t_end > 0.0:
        raise ValueError(f"t_end must be positive, got {t_end!r}")
    region = _starting_region(a0, b0, params)
    seg = segment_solution((a0, b0), region, params)
    segments = []
    crossings = 0
    while True:
        tau = crossing_time(seg, params.d)
        if tau is None or seg.t_start + tau >= t_end:
            segments.append(seg)
            break
        t_cross = seg.t_start + tau
        crossings += 1
        if crossings > max_crossings:
            raise ChatterDetected(f"more than {max_crossings} crossings before t={t_cross}")
        if tau > 0.0:
            segments.append(seg.ended(t_cross))
        a, b = seg.state_at(t_cross)
        nxt = Region.ABOVE if seg.region is Region.BELOW else Region.BELOW
        seg = segment_solution((float(a), float(b)), nxt, params, t_start=t_cross)
    return PiecewiseSolution(tuple(segments), float(t_end), params)


@dataclass(frozen=True)
class FixedPoint:
    alpha: float
    beta: float
    reputation_value: float
    kind: FixedPointKind
    region: Region
    stable: bool = True  # asymptotically stable within its region
    decay_rate: float = 0.0  # both eigenvalues equal -decay_rate

    def as_dict(self) -> dict:
        return {"kind": self.kind.value, "alpha": self.alpha, "beta": self.beta,
                "reputation": self.reputation_value, "region": self.region.value,
                "stable": self.stable, "decay_rate": self.decay_rate}


def critical_pbar(theta: float, d: float, omega: float) -> float | None:
    """Lying probability at which the false fixed point appears; None if theta <= d."""
    if not theta > d:
        return None
    return (theta - d) / (theta - d + omega * d)


def false_reputation(params: ModelParams) -> float:
    denom = params.p + params.omega * params.pbar
    if denom == 0.0:
        raise DegenerateDenominator("p + omega*pbar == 0")
    # pi <= theta holds exactly; rounding can break it for subnormal theta
    return min(params.p * params.theta / denom, params.theta)


def _settle(a: float, b: float, region: Region, d: float) -> tuple[float, float]:
    """Shift ``b`` by ulps until the rounded ratio lies in ``region``.

    A point within rounding of the line can otherwise be evaluated in the
    wrong vector field.
    """
    if a + b == 0.0:
        return a, b
    toward = math.inf if region is Region.BELOW else 0.0
    for _ in range(64):
        if region_of(a, b, d) is region:
            break
        b = math.nextafter(b, toward)
    return a, b


def critical_d(params: ModelParams) -> tuple[float, float]:
    return false_reputation(params), params.theta


def _false_exists(params: ModelParams) -> bool:
    pc = critical_pbar(params.theta, params.d, params.omega)
    return pc is None or params.pbar >= pc


def fixed_points(params: ModelParams) -> list[FixedPoint]:
    k = 1.0 - params.u
    points = []
    if params.theta > params.d:
        a, b = _settle(*asymptote(Region.ABOVE, params), Region.ABOVE, params.d)
        points.append(FixedPoint(a, b, params.theta, FixedPointKind.TRUE, Region.ABOVE, True, k))
    if _false_exists(params):
        a, b = _settle(*asymptote(Region.BELOW, params), Region.BELOW, params.d)
        points.append(FixedPoint(a, b, false_reputation(params), FixedPointKind.FALSE,
                                 Region.BELOW, True, k))
    return points


def two_sided_unique(params: ModelParams) -> bool:
    """Whether the true point stays unique when lies may be extreme either way."""
    m = min(params.theta, 1.0 - params.theta)
    if not m > params.d:
        return False
    return params.pbar < critical_pbar(m, params.d, params.omega)


@dataclass(frozen=True)
class RegimeReport:
    regime: Regime
    pbar_critical: float | None
    d_c1: float
    d_c2: float
    fixed_points: tuple[FixedPoint, ...]
    two_sided_unique: bool

    @property
    def false_reputation(self) -> float:
        return self.d_c1

    def reputation_of(self, kind: FixedPointKind) -> float | None:
        for fp in self.fixed_points:
            if fp.kind is kind:
                return fp.reputation_value
        return None

    def as_dict(self) -> dict:
        return {"regime": self.regime.value, "pbar_critical": self.pbar_critical,
                "d_c1": self.d_c1, "d_c2": self.d_c2, "pi": self.d_c1,
                "two_sided_unique": self.two_sided_unique,
                "fixed_points": [fp.as_dict() for fp in self.fixed_points]}


def classify_regime(params: ModelParams) -> RegimeReport:
    pc = critical_pbar(params.theta, params.d, params.omega)
    if pc is None:
        regime = Regime.FALSE_ONLY
    elif params.pbar < pc:
        regime = Regime.SUBCRITICAL
    else:
        regime = Regime.BISTABLE
    d_c1, d_c2 = critical_d(params)
    return RegimeReport(regime, pc, d_c1, d_c2, tuple(fixed_points(params)),
                        two_sided_unique(params))


def regime_from_thresholds(params: ModelParams) -> Regime:
    """Same classification phrased through the critical deviation thresholds."""
    d_c1, d_c2 = critical_d(params)
    if params.d < d_c1:
        return Regime.SUBCRITICAL
    if params.d < d_c2:
        return Regime.BISTABLE
    return Regime.FALSE_ONLY
