"""Command-line front end: ``liarrep {analyze,simulate,montecarlo,sweep,ode}``.

Exit codes: 0 success, 2 configuration error, 3 runtime/numerical error,
4 I/O error.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__, config as cfgmod, emit, svg
from .config import EXECUTION_ONLY, SCHEMA, ConfigError, Scenario
from .errors import ReputationError
from .experiments import (RunPredicate, default_burn_in, default_targets, hitting_time,
                          monte_carlo, occupancy, sweep_d, sweep_pbar)
from .markov import GENERATOR_NAME, EventKind, SimulationConfig, simulate
from .meanfield import classify_regime, false_reputation, solve
from .model import initial_state

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME, EXIT_IO = 0, 2, 3, 4

TRAJECTORY_COLUMNS = ("step", "t", "alpha", "beta", "R", "event", "accepted")
SWEEP_COLUMNS = ("swept_value", "regime", "n_fixed_points", "rep_true", "rep_false")
SEGMENT_COLUMNS = ("segment", "t_start", "t_end", "region", "c_alpha", "c_beta",
                   "asymptote_alpha", "asymptote_beta")


class Resolved:
    """Scenario with every ``auto`` value replaced and every range checked."""

    def __init__(self, scenario: Scenario):
        self.s = scenario
        v = scenario.values
        self.params = scenario.params()
        self.values = dict(v)
        self.values["p"] = self.params.p
        self.values["pbar"] = None
        n = v["n_steps"]
        try:
            self.sim = SimulationConfig(self.params, v["R0"], n, v["seed"],
                                        v["timestamps"], v["scaling_N"])
        except ReputationError as exc:
            raise scenario.fail(exc.field if hasattr(exc, "field") else "scaling_N", str(exc)) from None
        if not v["epsilon"] > 0.0:
            raise scenario.fail("epsilon", "must be positive")
        self.values["burn_in"] = default_burn_in(n) if v["burn_in"] is None else v["burn_in"]
        if not 0 <= self.values["burn_in"] < n:
            raise scenario.fail("burn_in", f"must be in [0, n_steps={n})")
        targets = v["targets"]
        if targets is None:
            targets = default_targets(self.params, v["epsilon"])
        self.values["targets"] = tuple(targets)
        for x, y in zip(targets, targets[1:]):
            if not abs(x - y) > 2 * v["epsilon"]:
                raise scenario.fail("targets", "neighbourhoods of width epsilon overlap")
        if v["n_runs"] < 1:
            raise scenario.fail("n_runs", "must be >= 1")
        if v["workers"] < 1:
            raise scenario.fail("workers", "must be >= 1")
        if not 0 <= v["base_seed"] < 2**64:
            raise scenario.fail("base_seed", "must be in [0, 2**64)")
        if not v["band_low"] <= v["band_high"]:
            raise scenario.fail("band_low", "must not exceed band_high")
        if v["grid"] is None:
            if v["sweep"] == "d":
                grid = tuple(i / 100 for i in range(1, 100))
            else:
                grid = tuple(i / 100 for i in range(0, 101))
        else:
            grid = v["grid"]
        self.values["grid"] = grid
        if not v["t_end"] > 0.0 or not math.isfinite(v["t_end"]):
            raise scenario.fail("t_end", "must be a positive finite number")
        if v["ode_samples"] < 2:
            raise scenario.fail("ode_samples", "must be >= 2")

    def __getitem__(self, key):
        return self.values[key]

    def echo(self) -> dict:
        return {k: self.values[k] for k in SCHEMA if k not in EXECUTION_ONLY}

    def echo_text(self) -> str:
        lines = [f"# liarrep {__version__} resolved configuration"]
        for k in self.echo():
            lines.append(f"{k} = {cfgmod._json_value_text(_plain(self.values[k]))}")
        return "\n".join(lines) + "\n"


def _plain(v):
    return list(v) if isinstance(v, tuple) else v


def _base_report(command: str, r: Resolved) -> dict:
    start = initial_state(r["R0"], r.params.u)
    return {
        "tool": "liarrep",
        "version": __version__,
        "command": command,
        "generator": GENERATOR_NAME,
        "config": {k: _plain(v) for k, v in r.echo().items()},
        "initial_state": {"alpha": start.alpha, "beta": start.beta},
        "analysis": classify_regime(r.params).as_dict(),
    }


def _reference_lines(params):
    return [(params.theta, "theta", "#2ca02c"), (false_reputation(params), "pi", "#d62728")]


def cmd_analyze(r: Resolved, out: Path, log) -> dict:
    report = _base_report("analyze", r)
    a = report["analysis"]
    log(f"regime        {a['regime']}")
    log(f"pbar_c        {a['pbar_critical'] if a['pbar_critical'] is not None else 'none (theta <= d)'}")
    log(f"d_c1 (pi)     {a['d_c1']:.12g}")
    log(f"d_c2 (theta)  {a['d_c2']:.12g}")
    log(f"two-sided     {'unique' if a['two_sided_unique'] else 'not unique'}")
    for fp in a["fixed_points"]:
        log(f"fixed point   {fp['kind']:<5} alpha={fp['alpha']:.12g} beta={fp['beta']:.12g} "
            f"R={fp['reputation']:.12g} ({fp['region']})")
    report["results"] = {}
    return report


def _trajectory_rows(traj):
    R = traj.reputation.tolist()
    t = traj.t.tolist() if traj.t is not None else [None] * len(traj)
    labels = {int(k): k.label for k in EventKind}
    for i, (ti, a, b, rep, e, ok) in enumerate(zip(t, traj.alpha.tolist(), traj.beta.tolist(), R,
                                                    traj.event.tolist(), traj.accepted.tolist())):
        yield (i + 1, ti, a, b, rep, labels[e], bool(ok))


def write_trajectory_csv(path: Path, traj) -> None:
    emit.write_csv(path, TRAJECTORY_COLUMNS, _trajectory_rows(traj))


def cmd_simulate(r: Resolved, out: Path, log) -> dict:
    report = _base_report("simulate", r)
    traj = simulate(r.sim)
    write_trajectory_csv(out / "trajectory.csv", traj)
    R = traj.reputation
    burn = r["burn_in"]
    occ = occupancy(R, r["targets"], r["epsilon"], burn)
    tail = R[burn:]
    x = traj.t if traj.t is not None else traj.step
    fig = svg.Figure("Reputation sample path", "time t" if traj.t is not None else "step n",
                     "reputation R", (0.0, float(x[-1])), hlines=_reference_lines(r.params))
    fig.add(*svg.thin(x, R), label="simulated R")
    (out / "trajectory.svg").write_text(fig.render(), encoding="utf-8")
    final = traj.final_state()
    report["results"] = {
        "n_steps": len(traj),
        "final_alpha": final.alpha, "final_beta": final.beta, "final_R": final.reputation,
        "mean_R": math.fsum(tail.tolist()) / len(tail),
        "std_R": float(np.std(tail)),
        "hitting_time": hitting_time(R, r["band_low"], r["band_high"]),
        "occupancy": occ.as_dict(),
        "files": ["trajectory.csv", "trajectory.svg"],
    }
    log(f"simulated {len(traj)} steps, final R = {final.reputation:.6f}, "
        f"post-burn-in mean R = {report['results']['mean_R']:.6f}")
    return report


def cmd_montecarlo(r: Resolved, out: Path, log) -> dict:
    report = _base_report("montecarlo", r)
    pred = RunPredicate((r["band_low"], r["band_high"]), r["occupancy_threshold"])
    summary = monte_carlo(r.sim, r["n_runs"], r["base_seed"], pred, r["targets"],
                          r["epsilon"], r["burn_in"], workers=r["workers"])
    k = len(summary.targets)
    header = ("run_index", "seed", "mean_R", "std_R", "hitting_time",
              *(f"occupancy_{j}" for j in range(k)), "elsewhere")
    emit.write_csv(out / "runs.csv", header,
                   ((rec.run_index, rec.seed, rec.mean_R, rec.std_R, rec.hitting_time,
                     *rec.occupancy.fractions, rec.occupancy.elsewhere) for rec in summary.runs))
    files = ["runs.csv"]
    if r["per_run_csv"]:
        (out / "runs").mkdir(exist_ok=True)
        width = len(str(summary.n_runs - 1))
        for rec in summary.runs:
            name = f"runs/run_{rec.run_index:0{width}d}.csv"
            write_trajectory_csv(out / name, simulate(r.sim.with_(seed=rec.seed)))
            files.append(name)
    report["results"] = summary.as_dict()
    report["results"]["files"] = files
    agg = summary.aggregate
    log(f"{summary.n_runs} runs: {agg.n_mean_in_band} with mean R in "
        f"[{r['band_low']}, {r['band_high']}]; mean of means {agg.mean_of_means:.6f}")
    for j, target in enumerate(summary.targets):
        log(f"  target {target:.6g}: mean occupancy {agg.mean_occupancy[j]:.4f}, "
            f"{agg.n_occupancy_above[j]} runs above {r['occupancy_threshold']}")
    return report


def cmd_sweep(r: Resolved, out: Path, log) -> dict:
    report = _base_report("sweep", r)
    p = r.params
    try:
        if r["sweep"] == "d":
            result = sweep_d(p.theta, p.p, p.omega, p.u, r["grid"])
        else:
            result = sweep_pbar(p.theta, p.d, p.omega, p.u, r["grid"])
    except ReputationError as exc:
        raise r.s.fail("grid", str(exc)) from None
    emit.write_csv(out / "sweep.csv", SWEEP_COLUMNS,
                   ((row.value, row.regime.value, row.n_fixed_points, row.rep_true, row.rep_false)
                    for row in result.rows))
    (out / "bifurcation.svg").write_text(bifurcation_svg(result, p), encoding="utf-8")
    transitions = [{"between": [a.value, b.value], "from": a.regime.value, "to": b.regime.value}
                   for a, b in zip(result.rows, result.rows[1:]) if a.regime is not b.regime]
    report["results"] = {"swept_parameter": result.swept_parameter, "n_rows": len(result.rows),
                         "transitions": transitions, "files": ["sweep.csv", "bifurcation.svg"]}
    for tr in transitions:
        log(f"{tr['from']} -> {tr['to']} between {r['sweep']} = {tr['between'][0]:.6g} "
            f"and {tr['between'][1]:.6g}")
    return report


def _branch_series(fig, xs, ys, present, label, color):
    """Solid where the branch exists, dashed where it does not."""
    start = 0
    for i in range(1, len(xs) + 1):
        if i == len(xs) or present[i] != present[start]:
            end = min(i + 1, len(xs)) if i < len(xs) else i
            fig.add(xs[start:end], ys[start:end], label=label if present[start] else f"{label} (absent)",
                    color=color, dashed=not present[start], width=2.0)
            start = i


def bifurcation_svg(result, params) -> str:
    xs = list(result.grid)
    true_y, false_y, true_on, false_on = [], [], [], []
    for row in result.rows:
        rp = row.report
        true_y.append(params.theta)
        false_y.append(rp.d_c1)
        true_on.append(row.rep_true is not None)
        false_on.append(row.rep_false is not None)
    name = "d" if result.swept_parameter == "d" else "pbar"
    lo, hi = (xs[0], xs[-1]) if xs[-1] > xs[0] else (xs[0] - 0.5, xs[0] + 0.5)
    fig = svg.Figure(f"Fixed-point reputations versus {name}", name, "reputation", (lo, hi))
    _branch_series(fig, xs, true_y, true_on, "true fixed point (theta)", "#2ca02c")
    _branch_series(fig, xs, false_y, false_on, "false fixed point (pi)", "#d62728")
    return fig.render()


def cmd_ode(r: Resolved, out: Path, log) -> dict:
    report = _base_report("ode", r)
    p = r.params
    start = initial_state(r["R0"], p.u)
    sol = solve((start.alpha, start.beta), p, r["t_end"])
    emit.write_csv(out / "segments.csv", SEGMENT_COLUMNS,
                   ((i, s.t_start, s.t_end, s.region.value, s.c_alpha, s.c_beta,
                     s.asymptote_alpha, s.asymptote_beta) for i, s in enumerate(sol.segments)))
    ts = np.linspace(0.0, r["t_end"], r["ode_samples"])
    a, b = sol.evaluate(ts)
    R = a / (a + b)
    emit.write_csv(out / "ode.csv", ("t", "alpha", "beta", "R"),
                   zip(ts.tolist(), a.tolist(), b.tolist(), R.tolist()))
    fig = svg.Figure("Mean-field solution", "time t", "reputation R", (0.0, r["t_end"]),
                     hlines=_reference_lines(p))
    files = ["segments.csv", "ode.csv", "overlay.svg"]
    if r["overlay"]:
        N = r["scaling_N"]
        sim = r.sim.with_(n_steps=math.ceil(N * r["t_end"]), record_timestamps=True)
        traj = simulate(sim)
        keep = traj.t <= r["t_end"]
        tx = np.concatenate(([0.0], traj.t[keep]))
        ty = np.concatenate(([start.reputation], traj.reputation[keep]))
        fig.add(*svg.thin(tx, ty), label="simulated R", color="#7f7f7f", width=1.0, step=True)
    fig.add(*svg.thin(ts, R), label="ODE R", color="#1f77b4", width=2.0)
    (out / "overlay.svg").write_text(fig.render(), encoding="utf-8")
    fa, fb = sol.state_at(r["t_end"])
    report["results"] = {
        "n_segments": len(sol.segments),
        "crossings": sol.crossings,
        "segments": [{"t_start": s.t_start, "t_end": s.t_end, "region": s.region.value,
                      "c_alpha": s.c_alpha, "c_beta": s.c_beta,
                      "asymptote_alpha": s.asymptote_alpha, "asymptote_beta": s.asymptote_beta}
                     for s in sol.segments],
        "terminal": {"t": r["t_end"], "alpha": fa, "beta": fb, "R": fa / (fa + fb)},
        "files": files,
    }
    log(f"{len(sol.segments)} segment(s); crossings at {', '.join(f'{c:.6f}' for c in sol.crossings) or 'none'}; "
        f"R(t_end) = {fa / (fa + fb):.6f}")
    return report


COMMANDS = {
    "analyze": (cmd_analyze, "closed-form regime, thresholds and fixed points"),
    "simulate": (cmd_simulate, "one seeded sample path to trajectory.csv"),
    "montecarlo": (cmd_montecarlo, "ensemble of seeded runs with occupancy statistics"),
    "sweep": (cmd_sweep, "regime sweep over d or pbar with a bifurcation plot"),
    "ode": (cmd_ode, "exact piecewise mean-field solution with an overlay plot"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="liarrep", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"liarrep {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    keys = ", ".join(SCHEMA)
    for name, (_, help_text) in COMMANDS.items():
        sp = sub.add_parser(name, help=help_text, description=help_text)
        sp.add_argument("--config", help="scenario file (key = value lines) or a JSON run report")
        sp.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help=f"override one key; keys: {keys}")
        sp.add_argument("--out", default="out", help="output directory (default: out)")
        sp.add_argument("--quiet", action="store_true", help="suppress the summary on stdout")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    log = (lambda *a: None) if args.quiet else print
    handler = COMMANDS[args.command][0]
    try:
        scenario = cfgmod.load(args.config, args.set)
        resolved = Resolved(scenario)
    except ConfigError as exc:
        print(f"liarrep: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"liarrep: cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        (out / "resolved.cfg").write_text(resolved.echo_text(), encoding="utf-8")
        report = handler(resolved, out, log)
        emit.write_json(out / "report.json", report)
    except ConfigError as exc:
        print(f"liarrep: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"liarrep: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ReputationError, ArithmeticError) as exc:
        print(f"liarrep: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
