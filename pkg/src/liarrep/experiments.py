"""Monte Carlo ensembles, occupancy statistics, parameter sweeps and the
scaling-limit convergence study."""

from __future__ import annotations

import math
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations
from typing import Sequence

import numpy as np

from .errors import BurnInTooLarge, OutOfRange, OverlappingTargets
from .markov import SimulationConfig, Trajectory, simulate
from .meanfield import FixedPointKind, Regime, RegimeReport, classify_regime, false_reputation, solve
from .model import ModelParams, initial_state

DEFAULT_EPSILON = 0.05
DEFAULT_BURN_IN_FRACTION = 0.2

_MASK64 = 0xFFFFFFFFFFFFFFFF
_GOLDEN = 0x9E3779B97F4A7C15


def splitmix64(x: int) -> int:
    """SplitMix64 output function (an invertible 64-bit avalanche)."""
    z = x & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def run_seed(base_seed: int, run_index: int) -> int:
    """Per-run seed: ``splitmix64(base_seed + (run_index + 1) * 0x9E3779B97F4A7C15 mod 2**64)``.

    Distinct for distinct run indices below 2**64 because the increment is odd
    and the avalanche is a bijection.
    """
    return splitmix64((base_seed + (run_index + 1) * _GOLDEN) & _MASK64)


def default_burn_in(n_steps: int) -> int:
    return int(n_steps * DEFAULT_BURN_IN_FRACTION)


def default_targets(params: ModelParams, epsilon: float = DEFAULT_EPSILON) -> tuple[float, ...]:
    """Fixed-point reputations (pi, theta), dropping pi when the two neighbourhoods touch."""
    pi = false_reputation(params)
    if abs(params.theta - pi) > 2.0 * epsilon:
        return (pi, params.theta)
    return (params.theta,)


@dataclass(frozen=True)
class OccupancyStats:
    targets: tuple[float, ...]
    epsilon: float
    burn_in: int
    fractions: tuple[float, ...]
    elsewhere: float

    def as_dict(self) -> dict:
        return {"targets": list(self.targets), "epsilon": self.epsilon, "burn_in": self.burn_in,
                "fractions": list(self.fractions), "elsewhere": self.elsewhere}


def _check_targets(targets: Sequence[float], epsilon: float) -> None:
    if not epsilon > 0.0:
        raise OutOfRange("epsilon", epsilon, "epsilon > 0")
    for x, y in combinations(targets, 2):
        if not abs(x - y) > 2.0 * epsilon:
            raise OverlappingTargets(f"targets {x} and {y} are within 2*epsilon={2 * epsilon}")


def occupancy(trajectory, targets: Sequence[float], epsilon: float = DEFAULT_EPSILON,
              burn_in: int | None = None) -> OccupancyStats:
    """Fraction of post-burn-in steps with reputation within ``epsilon`` of each target.

    ``trajectory`` is a Trajectory or a plain sequence of reputation values.
    """
    R = trajectory.reputation if isinstance(trajectory, Trajectory) else np.asarray(trajectory, dtype=float)
    targets = tuple(float(x) for x in targets)
    _check_targets(targets, epsilon)
    if burn_in is None:
        burn_in = default_burn_in(len(R))
    if not 0 <= burn_in < len(R):
        raise BurnInTooLarge(f"burn_in={burn_in} must be in [0, {len(R)})")
    tail = R[burn_in:]
    n = len(tail)
    counts = [int(np.count_nonzero(np.abs(tail - x) <= epsilon)) for x in targets]
    fractions = tuple(c / n for c in counts)
    elsewhere = (n - sum(counts)) / n
    return OccupancyStats(targets, float(epsilon), int(burn_in), fractions, elsewhere)


def hitting_time(R: np.ndarray, low: float, high: float) -> int | None:
    """First step index n (1-based) with ``low <= R_n <= high``."""
    hits = np.flatnonzero((R >= low) & (R <= high))
    return int(hits[0]) + 1 if len(hits) else None


@dataclass(frozen=True)
class RunRecord:
    run_index: int
    seed: int
    mean_R: float
    std_R: float
    hitting_time: int | None
    occupancy: OccupancyStats

    def as_dict(self) -> dict:
        return {"run_index": self.run_index, "seed": self.seed, "mean_R": self.mean_R,
                "std_R": self.std_R, "hitting_time": self.hitting_time,
                "occupancy": list(self.occupancy.fractions),
                "elsewhere": self.occupancy.elsewhere}


@dataclass(frozen=True)
class RunPredicate:
    """Per-run pass criteria counted in a Monte Carlo summary.

    ``mean_band`` bounds the post-burn-in mean reputation (inclusive);
    ``occupancy_threshold`` is the cut used for the per-target counts.
    """

    mean_band: tuple[float, float] = (0.75, 0.85)
    occupancy_threshold: float = 0.01

    def in_band(self, rec: RunRecord) -> bool:
        return self.mean_band[0] <= rec.mean_R <= self.mean_band[1]


@dataclass(frozen=True)
class Aggregate:
    n_mean_in_band: int
    n_occupancy_above: tuple[int, ...]
    n_occupancy_below: tuple[int, ...]
    n_all_occupancy_above: int
    mean_of_means: float
    min_of_means: float
    max_of_means: float
    mean_occupancy: tuple[float, ...]
    mean_elsewhere: float

    def as_dict(self) -> dict:
        return {"n_mean_in_band": self.n_mean_in_band,
                "n_occupancy_above": list(self.n_occupancy_above),
                "n_occupancy_below": list(self.n_occupancy_below),
                "n_all_occupancy_above": self.n_all_occupancy_above,
                "mean_of_means": self.mean_of_means, "min_of_means": self.min_of_means,
                "max_of_means": self.max_of_means, "mean_occupancy": list(self.mean_occupancy),
                "mean_elsewhere": self.mean_elsewhere}


def aggregate(runs: Sequence[RunRecord], predicate: RunPredicate) -> Aggregate:
    thr = predicate.occupancy_threshold
    n_targets = len(runs[0].occupancy.fractions)
    means = [r.mean_R for r in runs]
    occ = [r.occupancy.fractions for r in runs]
    return Aggregate(
        n_mean_in_band=sum(predicate.in_band(r) for r in runs),
        n_occupancy_above=tuple(sum(o[j] > thr for o in occ) for j in range(n_targets)),
        n_occupancy_below=tuple(sum(o[j] < thr for o in occ) for j in range(n_targets)),
        n_all_occupancy_above=sum(all(f > thr for f in o) for o in occ),
        mean_of_means=math.fsum(means) / len(means),
        min_of_means=min(means),
        max_of_means=max(means),
        mean_occupancy=tuple(math.fsum(o[j] for o in occ) / len(occ) for j in range(n_targets)),
        mean_elsewhere=math.fsum(r.occupancy.elsewhere for r in runs) / len(runs),
    )


@dataclass(frozen=True)
class MonteCarloSummary:
    config: SimulationConfig
    n_runs: int
    base_seed: int
    targets: tuple[float, ...]
    epsilon: float
    burn_in: int
    predicate: RunPredicate
    runs: tuple[RunRecord, ...]
    aggregate: Aggregate = field(repr=False)

    def as_dict(self) -> dict:
        return {"n_runs": self.n_runs, "base_seed": self.base_seed,
                "targets": list(self.targets), "epsilon": self.epsilon, "burn_in": self.burn_in,
                "mean_band": list(self.predicate.mean_band),
                "occupancy_threshold": self.predicate.occupancy_threshold,
                "aggregate": self.aggregate.as_dict(),
                "runs": [r.as_dict() for r in self.runs]}


def summarize_run(traj: Trajectory, run_index: int, targets, epsilon: float, burn_in: int,
                  band: tuple[float, float]) -> RunRecord:
    R = traj.reputation
    tail = R[burn_in:]
    return RunRecord(
        run_index=run_index,
        seed=traj.config.seed,
        mean_R=math.fsum(tail.tolist()) / len(tail),
        std_R=float(np.std(tail)),
        hitting_time=hitting_time(R, *band),
        occupancy=occupancy(R, targets, epsilon, burn_in),
    )


def _one_run(job):
    config, run_index, targets, epsilon, burn_in, band = job
    return summarize_run(simulate(config), run_index, targets, epsilon, burn_in, band)


def monte_carlo(config: SimulationConfig, n_runs: int, base_seed: int,
                predicate: RunPredicate | None = None, targets: Sequence[float] | None = None,
                epsilon: float = DEFAULT_EPSILON, burn_in: int | None = None,
                workers: int = 1) -> MonteCarloSummary:
    """Run ``n_runs`` independent simulations of ``config`` with derived seeds.

    ``config.seed`` is ignored; run ``i`` uses ``run_seed(base_seed, i)``.
    Results are keyed by run index, so ``workers`` never changes the output.
    """
    if isinstance(n_runs, bool) or int(n_runs) != n_runs or n_runs < 1:
        raise OutOfRange("n_runs", n_runs, "integer >= 1")
    predicate = predicate or RunPredicate()
    targets = tuple(default_targets(config.params, epsilon) if targets is None else targets)
    _check_targets(targets, epsilon)
    if burn_in is None:
        burn_in = default_burn_in(config.n_steps)
    if not 0 <= burn_in < config.n_steps:
        raise BurnInTooLarge(f"burn_in={burn_in} must be in [0, {config.n_steps})")
    jobs = [(config.with_(seed=run_seed(base_seed, i)), i, targets, epsilon, burn_in,
             predicate.mean_band) for i in range(int(n_runs))]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            runs = list(pool.map(_one_run, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        runs = [_one_run(job) for job in jobs]
    runs.sort(key=lambda r: r.run_index)
    return MonteCarloSummary(config, int(n_runs), int(base_seed), targets, float(epsilon),
                             int(burn_in), predicate, tuple(runs), aggregate(runs, predicate))


@dataclass(frozen=True)
class SweepRow:
    value: float
    report: RegimeReport

    @property
    def regime(self) -> Regime:
        return self.report.regime

    @property
    def n_fixed_points(self) -> int:
        return len(self.report.fixed_points)

    @property
    def rep_true(self) -> float | None:
        return self.report.reputation_of(FixedPointKind.TRUE)

    @property
    def rep_false(self) -> float | None:
        return self.report.reputation_of(FixedPointKind.FALSE)


@dataclass(frozen=True)
class SweepResult:
    swept_parameter: str
    grid: tuple[float, ...]
    rows: tuple[SweepRow, ...]
    base: dict

    def regimes(self) -> list[Regime]:
        return [r.regime for r in self.rows]


def _check_grid(grid, lo: float, hi: float, closed: bool, name: str) -> tuple[float, ...]:
    grid = tuple(float(x) for x in grid)
    if not grid:
        raise OutOfRange(name, grid, "non-empty grid")
    for x in grid:
        ok = lo <= x <= hi if closed else lo < x < hi
        if not ok:
            raise OutOfRange(name, x, f"grid values in {'[' if closed else '('}{lo}, {hi}{']' if closed else ')'}")
    if any(b < a for a, b in zip(grid, grid[1:])):
        raise OutOfRange(name, grid, "sorted grid")
    return grid


def sweep_d(theta: float, p: float, omega: float, u: float, grid: Sequence[float]) -> SweepResult:
    grid = _check_grid(grid, 0.0, 1.0, False, "d")
    rows = tuple(SweepRow(d, classify_regime(ModelParams(theta, p, d, omega, u))) for d in grid)
    return SweepResult("d", grid, rows, {"theta": theta, "p": p, "omega": omega, "u": u})


def sweep_pbar(theta: float, d: float, omega: float, u: float, grid: Sequence[float]) -> SweepResult:
    grid = _check_grid(grid, 0.0, 1.0, True, "pbar")
    rows = tuple(SweepRow(pb, classify_regime(ModelParams.from_pbar(theta, pb, d, omega, u)))
                 for pb in grid)
    return SweepResult("pbar", grid, rows, {"theta": theta, "d": d, "omega": omega, "u": u})


def sup_deviation(traj: Trajectory, R0: float, t_horizon: float) -> float:
    """Sup over ``[0, t_horizon]`` of the Euclidean distance between the
    piecewise-constant simulated path and the ODE solution.

    Checked at every event time on both sides of the jump and at the horizon.
    """
    params = traj.config.params
    start = initial_state(R0, params.u)
    sol = solve((start.alpha, start.beta), params, t_horizon)
    t = traj.t
    keep = t <= t_horizon
    times = t[keep]
    a_after, b_after = traj.alpha[keep], traj.beta[keep]
    a_before = np.concatenate(([start.alpha], a_after[:-1]))
    b_before = np.concatenate(([start.beta], b_after[:-1]))
    oa, ob = sol.evaluate(times)
    dev = max(np.max(np.hypot(a_after - oa, b_after - ob), initial=0.0),
              np.max(np.hypot(a_before - oa, b_before - ob), initial=0.0))
    last_a = a_after[-1] if len(a_after) else start.alpha
    last_b = b_after[-1] if len(b_after) else start.beta
    ha, hb = sol.state_at(t_horizon)
    return float(max(dev, math.hypot(last_a - ha, last_b - hb)))


@dataclass(frozen=True)
class ConvergenceRow:
    N: int
    median_deviation: float
    deviations: tuple[float, ...]


def convergence_study(params: ModelParams, R0: float, t_horizon: float, N_list: Sequence[int],
                      runs: int, base_seed: int) -> list[ConvergenceRow]:
    """Median sup-deviation of the N-scaled process from the mean ODE, per N."""
    if not t_horizon > 0.0:
        raise OutOfRange("t_horizon", t_horizon, "t_horizon > 0")
    N_list = [int(N) for N in N_list]
    if not N_list or any(b <= a for a, b in zip(N_list, N_list[1:])):
        raise OutOfRange("N_list", N_list, "non-empty strictly increasing")
    table = []
    for N in N_list:
        n_events = math.ceil(N * t_horizon)
        devs = []
        for i in range(runs):
            cfg = SimulationConfig(params, R0, n_events, run_seed(base_seed, i),
                                   record_timestamps=True, scaling_N=N)
            devs.append(sup_deviation(simulate(cfg), R0, t_horizon))
        table.append(ConvergenceRow(N, statistics.median(devs), tuple(devs)))
    return table
