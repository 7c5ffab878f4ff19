"""Parameters, counter state and the deviation test."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DegenerateState, NonFinite, OutOfRange


def _finite(field: str, value) -> float:
    try:
        x = float(value)
    except (TypeError, ValueError):
        raise NonFinite(field, value) from None
    if not math.isfinite(x):
        raise NonFinite(field, value)
    return x


@dataclass(frozen=True)
class ModelParams:
    """System parameters of the honest node facing one maximal liar.

    theta : probability that the subject behaves positively
    p     : probability that an observation is direct (``pbar = 1 - p`` is
            the probability that it is an indirect report from the liar)
    d     : deviation-test threshold
    omega : weight of an accepted indirect report
    u     : discount factor applied to both counters at every event
    """

    theta: float
    p: float
    d: float
    omega: float
    u: float

    def __post_init__(self):
        for name in ("theta", "p", "d", "omega", "u"):
            object.__setattr__(self, name, _finite(name, getattr(self, name)))
        if not 0.0 <= self.theta <= 1.0:
            raise OutOfRange("theta", self.theta, "0 <= theta <= 1")
        if not 0.0 <= self.p <= 1.0:
            raise OutOfRange("p", self.p, "0 <= p <= 1")
        if not 0.0 < self.d < 1.0:
            raise OutOfRange("d", self.d, "0 < d < 1")
        if not self.omega > 0.0:
            raise OutOfRange("omega", self.omega, "omega > 0")
        if not 0.0 < self.u < 1.0:
            raise OutOfRange("u", self.u, "0 < u < 1")

    @property
    def pbar(self) -> float:
        return 1.0 - self.p

    @classmethod
    def from_pbar(cls, theta, pbar, d, omega, u) -> "ModelParams":
        pbar = _finite("pbar", pbar)
        if not 0.0 <= pbar <= 1.0:
            raise OutOfRange("pbar", pbar, "0 <= pbar <= 1")
        return cls(theta, 1.0 - pbar, d, omega, u)

    def replace(self, **changes) -> "ModelParams":
        fields = {"theta": self.theta, "p": self.p, "d": self.d,
                  "omega": self.omega, "u": self.u}
        if "pbar" in changes:
            changes["p"] = 1.0 - _finite("pbar", changes.pop("pbar"))
        fields.update(changes)
        return ModelParams(**fields)

    def as_dict(self) -> dict:
        return {"theta": self.theta, "p": self.p, "pbar": self.pbar,
                "d": self.d, "omega": self.omega, "u": self.u}


def validate_params(theta, p, d, omega, u) -> ModelParams:
    """Validate the five raw parameters; raises OutOfRange or NonFinite."""
    return ModelParams(theta, p, d, omega, u)


@dataclass(frozen=True)
class ReputationState:
    """Discounted positive (alpha) and negative (beta) observation mass."""

    alpha: float
    beta: float

    def __post_init__(self):
        a = _finite("alpha", self.alpha)
        b = _finite("beta", self.beta)
        if a < 0.0:
            raise OutOfRange("alpha", a, "alpha >= 0")
        if b < 0.0:
            raise OutOfRange("beta", b, "beta >= 0")
        if a + b <= 0.0:
            raise DegenerateState("alpha + beta must be positive")
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "beta", b)

    @property
    def reputation(self) -> float:
        return self.alpha / (self.alpha + self.beta)

    @property
    def mass(self) -> float:
        return self.alpha + self.beta


def initial_state(R0: float, u: float) -> ReputationState:
    """State of converged mass ``1/(1-u)`` with reputation ``R0``."""
    R0 = _finite("R0", R0)
    u = _finite("u", u)
    if not 0.0 <= R0 <= 1.0:
        raise OutOfRange("R0", R0, "0 <= R0 <= 1")
    if not 0.0 < u < 1.0:
        raise OutOfRange("u", u, "0 < u < 1")
    scale = 1.0 / (1.0 - u)
    return ReputationState(R0 * scale, (1.0 - R0) * scale)


def ratio(alpha: float, beta: float) -> float:
    total = alpha + beta
    if total == 0.0:
        raise DegenerateState("alpha + beta == 0")
    return alpha / total


def reputation(state: ReputationState) -> float:
    return ratio(state.alpha, state.beta)


def accepts(alpha: float, beta: float, d: float) -> bool:
    """Deviation test on raw counters; the boundary ``R == d`` accepts."""
    return ratio(alpha, beta) <= d


def deviation_test(state: ReputationState, d: float) -> bool:
    """True when an extremely negative report would be believed."""
    return accepts(state.alpha, state.beta, d)


def triangle_bound(omega: float, u: float) -> float:
    return max(1.0, omega) / (1.0 - u)


def in_triangle(state: ReputationState, omega: float, u: float, rtol: float = 1e-12) -> bool:
    w = max(1.0, omega)
    bound = triangle_bound(omega, u)
    return w * state.alpha + state.beta <= bound * (1.0 + rtol)
