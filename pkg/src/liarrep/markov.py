"""The seeded two-counter process driven by direct observations and lies.

Random stream discipline (fixed so that seeds are portable):

* generator: MT19937 via ``numpy.random.MT19937(seed)`` wrapped in
  ``numpy.random.Generator``; uniforms come from ``Generator.random``;
* one uniform ``v`` per event: PositiveDirect if ``v < p*theta``,
  NegativeDirect if ``v < p``, IndirectReport otherwise;
* with timestamps on, one more uniform ``w`` right after each event draw,
  turned into an Exp(N) interarrival as ``-log1p(-w) / N``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum
from typing import Iterator, NamedTuple

import numpy as np

from .errors import InvalidScale, OutOfRange
from .model import ModelParams, ReputationState, initial_state

GENERATOR_NAME = f"MT19937/numpy-{np.__version__}"
SEED_MAX = 2**64 - 1


class EventKind(IntEnum):
    POSITIVE_DIRECT = 0
    NEGATIVE_DIRECT = 1
    INDIRECT_REPORT = 2

    @property
    def label(self) -> str:
        return _LABELS[self]


_LABELS = {
    EventKind.POSITIVE_DIRECT: "PositiveDirect",
    EventKind.NEGATIVE_DIRECT: "NegativeDirect",
    EventKind.INDIRECT_REPORT: "IndirectReport",
}


def make_rng(seed: int) -> np.random.Generator:
    if isinstance(seed, bool) or int(seed) != seed or not 0 <= seed <= SEED_MAX:
        raise OutOfRange("seed", seed, "integer in [0, 2**64)")
    return np.random.Generator(np.random.MT19937(int(seed)))


def event_probabilities(params: ModelParams) -> tuple[float, float, float]:
    return (params.p * params.theta, params.p * (1.0 - params.theta), params.pbar)


def classify_uniform(v: float, params: ModelParams) -> EventKind:
    if v < params.p * params.theta:
        return EventKind.POSITIVE_DIRECT
    if v < params.p:
        return EventKind.NEGATIVE_DIRECT
    return EventKind.INDIRECT_REPORT


def sample_event(params: ModelParams, rng: np.random.Generator) -> EventKind:
    """Draw one event, consuming exactly one uniform from ``rng``."""
    return classify_uniform(rng.random(), params)


def sample_interarrival(rng: np.random.Generator, rate: float) -> float:
    return -math.log1p(-rng.random()) / rate


def _coefficients(params: ModelParams, N: int) -> tuple[float, float, float]:
    # N == 1 must reproduce the unscaled update bit for bit.
    if N == 1:
        return params.u, 1.0, params.omega
    return 1.0 - (1.0 - params.u) / N, 1.0 / N, params.omega / N


def _check_scale(N) -> int:
    if isinstance(N, bool) or int(N) != N or N < 1:
        raise InvalidScale(f"scaling index must be an integer >= 1, got {N!r}")
    return int(N)


def scaled_step(state: ReputationState, event: EventKind, params: ModelParams,
                N: int = 1) -> tuple[ReputationState, bool]:
    """One event of the process sped up by ``N`` with impact shrunk by ``1/N``.

    The deviation test is evaluated on the pre-discount state; the ratio is
    invariant under the uniform discount so the ordering does not matter.
    """
    N = _check_scale(N)
    disc, inc, winc = _coefficients(params, N)
    a, b = state.alpha, state.beta
    if event == EventKind.POSITIVE_DIRECT:
        return ReputationState(disc * a + inc, disc * b), True
    if event == EventKind.NEGATIVE_DIRECT:
        return ReputationState(disc * a, disc * b + inc), True
    ok = a / (a + b) <= params.d
    return ReputationState(disc * a, disc * b + (winc if ok else 0.0)), ok


def step(state: ReputationState, event: EventKind,
         params: ModelParams) -> tuple[ReputationState, bool]:
    return scaled_step(state, event, params, 1)


@dataclass(frozen=True)
class SimulationConfig:
    params: ModelParams
    R0: float
    n_steps: int
    seed: int
    record_timestamps: bool = False
    scaling_N: int = 1

    def __post_init__(self):
        if not 0.0 <= self.R0 <= 1.0:
            raise OutOfRange("R0", self.R0, "0 <= R0 <= 1")
        if isinstance(self.n_steps, bool) or int(self.n_steps) != self.n_steps or self.n_steps < 1:
            raise OutOfRange("n_steps", self.n_steps, "integer >= 1")
        if isinstance(self.seed, bool) or int(self.seed) != self.seed or not 0 <= self.seed <= SEED_MAX:
            raise OutOfRange("seed", self.seed, "integer in [0, 2**64)")
        _check_scale(self.scaling_N)
        object.__setattr__(self, "n_steps", int(self.n_steps))
        object.__setattr__(self, "seed", int(self.seed))
        object.__setattr__(self, "scaling_N", int(self.scaling_N))

    def with_(self, **changes) -> "SimulationConfig":
        fields = dict(params=self.params, R0=self.R0, n_steps=self.n_steps, seed=self.seed,
                      record_timestamps=self.record_timestamps, scaling_N=self.scaling_N)
        fields.update(changes)
        return SimulationConfig(**fields)


class StepRecord(NamedTuple):
    step: int
    t: float | None
    alpha: float
    beta: float
    event: EventKind
    accepted: bool


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Post-event states ``(alpha_n, beta_n)`` for ``n = 1..n_steps``."""

    config: SimulationConfig
    alpha: np.ndarray
    beta: np.ndarray
    event: np.ndarray
    accepted: np.ndarray
    t: np.ndarray | None = None

    def __len__(self) -> int:
        return len(self.alpha)

    @property
    def step(self) -> np.ndarray:
        return np.arange(1, len(self.alpha) + 1)

    @property
    def reputation(self) -> np.ndarray:
        return self.alpha / (self.alpha + self.beta)

    def records(self) -> Iterator[StepRecord]:
        times = self.t if self.t is not None else [None] * len(self)
        for i, (a, b, e, ok, t) in enumerate(
                zip(self.alpha.tolist(), self.beta.tolist(), self.event.tolist(),
                    self.accepted.tolist(), times)):
            yield StepRecord(i + 1, t, a, b, EventKind(e), bool(ok))

    def final_state(self) -> ReputationState:
        return ReputationState(float(self.alpha[-1]), float(self.beta[-1]))


def _run(alpha: float, beta: float, draws: list[float], params: ModelParams, N: int):
    disc, inc, winc = _coefficients(params, N)
    pos = params.p * params.theta
    p = params.p
    d = params.d
    n = len(draws)
    al = [0.0] * n
    be = [0.0] * n
    ev = bytearray(n)
    acc = bytearray(n)
    a, b = alpha, beta
    for i, v in enumerate(draws):
        if v < pos:
            a = disc * a + inc
            b = disc * b
            acc[i] = 1
        elif v < p:
            a = disc * a
            b = disc * b + inc
            ev[i] = 1
            acc[i] = 1
        else:
            ev[i] = 2
            if a / (a + b) <= d:
                a = disc * a
                b = disc * b + winc
                acc[i] = 1
            else:
                a = disc * a
                b = disc * b
        al[i] = a
        be[i] = b
    return (np.array(al), np.array(be), np.frombuffer(bytes(ev), dtype=np.int8).copy(),
            np.frombuffer(bytes(acc), dtype=np.bool_).copy())


def simulate(config: SimulationConfig) -> Trajectory:
    """Sample path of ``config.n_steps`` events; a pure function of ``config``."""
    params = config.params
    start = initial_state(config.R0, params.u)
    rng = make_rng(config.seed)
    n = config.n_steps
    t = None
    if config.record_timestamps:
        pairs = rng.random(2 * n).reshape(n, 2)
        draws = pairs[:, 0].tolist()
        t = np.cumsum(-np.log1p(-pairs[:, 1]) / config.scaling_N)
    else:
        draws = rng.random(n).tolist()
    al, be, ev, acc = _run(start.alpha, start.beta, draws, params, config.scaling_N)
    return Trajectory(config=config, alpha=al, beta=be, event=ev, accepted=acc, t=t)
