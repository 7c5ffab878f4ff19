import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from liarrep import (ChatterDetected, FixedPointKind, ModelParams, Regime, Region, classify_regime,
                     critical_d, critical_pbar, crossing_time, false_reputation, fixed_points,
                     ode_rhs, segment_solution, solve, two_sided_unique)
from liarrep.meanfield import regime_from_thresholds, region_of

from conftest import model_params, set1
from oracles import bisection_crossing, integrate


@pytest.mark.parametrize("params, state, expected", [
    (set1(), (64.0, 16.0), (0.0, 0.0)),
    (set1(), (0.0, 100.0), (0.64, -0.64)),
    (ModelParams(0.8, 0.2, 0.4, 1.0, 0.95), (3.2, 16.8), (0.0, 0.0)),
])
def test_ode_rhs(params, state, expected):
    assert ode_rhs(state, params) == pytest.approx(expected, abs=1e-12)


def test_ode_rhs_boundary_counts_as_below(params):
    # R == d exactly: lies are accepted
    assert region_of(40.0, 60.0, 0.4) is Region.BELOW
    da, db = ode_rhs((40.0, 60.0), params)
    assert db == pytest.approx(-0.6 + 0.16 + 0.2)


def test_segment_below_from_empty_start(params):
    seg = segment_solution((0.0, 100.0), Region.BELOW, params)
    assert (seg.asymptote_alpha, seg.asymptote_beta) == pytest.approx((64.0, 36.0), abs=1e-12)
    assert (seg.c_alpha, seg.c_beta) == pytest.approx((-64.0, 64.0), abs=1e-12)
    # the closed form solves the Below vector field: derivative equals the drift
    for t in (0.0, 10.0, 50.0, 90.0):
        a, b = seg.state_at(t)
        da = -seg.rate * seg.c_alpha * math.exp(-seg.rate * t)
        db = -seg.rate * seg.c_beta * math.exp(-seg.rate * t)
        assert (da, db) == pytest.approx(ode_rhs((float(a), float(b)), params), abs=1e-12)


def test_segment_at_fixed_point_is_constant(params):
    seg = segment_solution((0.64 / 0.01, 0.16 / 0.01), Region.ABOVE, params)
    assert abs(seg.c_alpha) < 1e-12 and abs(seg.c_beta) < 1e-12


@given(model_params(), st.floats(0, 500), st.floats(0, 500), st.sampled_from(list(Region)))
def test_segment_starts_at_initial(p, a, b, region):
    seg = segment_solution((a, b), region, p)
    sa, sb = seg.state_at(0.0)
    assert float(sa) == pytest.approx(a, abs=1e-12) and float(sb) == pytest.approx(b, abs=1e-12)


def test_crossing_time_canonical(params):
    seg = segment_solution((0.0, 100.0), Region.BELOW, params)
    t_star = crossing_time(seg, params.d)
    assert t_star == pytest.approx(-math.log(24.0 / 64.0) / 0.01, rel=1e-12)
    assert t_star == pytest.approx(98.083, abs=1e-3)
    assert t_star == pytest.approx(bisection_crossing((0.0, 100.0), params, 120.0), abs=1e-6)


def test_crossing_time_at_fixed_point(params):
    seg = segment_solution((64.0, 16.0), Region.ABOVE, params)
    assert crossing_time(seg, params.d) is None


def test_crossing_time_supercritical_stays_above():
    p = set1(pbar=0.8, u=0.95)
    seg = segment_solution((16.0, 4.0), Region.ABOVE, p)
    C = 0.6 * seg.c_alpha - 0.4 * seg.c_beta
    K = 0.6 * seg.asymptote_alpha - 0.4 * seg.asymptote_beta
    assert C == pytest.approx(6.4) and K == pytest.approx(1.6)  # f(t) = C e^{-kt} + K > 0
    assert crossing_time(seg, p.d) is None


def test_solve_canonical(params):
    sol = solve((0.0, 100.0), params, 2000.0)
    assert [s.region for s in sol.segments] == [Region.BELOW, Region.ABOVE]
    assert sol.state_at(2000.0) == pytest.approx((64.0, 16.0), abs=1e-6)
    ts, path, _ = integrate((0.0, 100.0), params, 2000.0)
    a, b = sol.evaluate(ts)
    assert np.max(np.abs(a - path[:, 0])) < 1e-6 and np.max(np.abs(b - path[:, 1])) < 1e-6


def test_solve_from_fixed_point_is_one_constant_segment(params):
    fp = fixed_points(params)[0]
    sol = solve((fp.alpha, fp.beta), params, 100.0)
    assert len(sol.segments) == 1
    assert sol.state_at(100.0) == pytest.approx((fp.alpha, fp.beta), abs=1e-12)


def test_solve_false_only_regime():
    p = ModelParams(0.3, 0.5, 0.4, 1.0, 0.99)
    # (30, 70) has R = 0.3 <= d, already in Below: no crossing
    sol = solve((30.0, 70.0), p, 3000.0)
    assert len(sol.segments) == 1 and sol.segments[0].region is Region.BELOW
    assert sol.state_at(3000.0) == pytest.approx((15.0, 85.0), abs=1e-6)
    # a start that really is Above crosses into Below
    sol = solve((70.0, 30.0), p, 3000.0)
    assert [s.region for s in sol.segments] == [Region.ABOVE, Region.BELOW]
    assert sol.state_at(3000.0) == pytest.approx((15.0, 85.0), abs=1e-6)
    assert sol.reputation_at(3000.0) == pytest.approx(0.15, abs=1e-8)


def test_solve_start_on_line_moving_up(params):
    sol = solve((40.0, 60.0), params, 500.0)
    assert len(sol.segments) == 1 and sol.segments[0].region is Region.ABOVE


def test_crossing_cap(params):
    with pytest.raises(ChatterDetected):
        solve((0.0, 100.0), params, 2000.0, max_crossings=0)


def test_solve_rejects_bad_horizon(params):
    with pytest.raises(ValueError):
        solve((0.0, 100.0), params, 0.0)


@settings(max_examples=200)
@given(model_params(), st.floats(0, 1))
def test_piecewise_invariants(p, R0):
    scale = 1.0 / (1.0 - p.u)
    sol = solve((R0 * scale, (1 - R0) * scale), p, 20.0 / (1.0 - p.u))
    for prev, nxt in zip(sol.segments, sol.segments[1:]):
        end = tuple(float(x) for x in prev.state_at(prev.t_end))
        assert nxt.start_state == pytest.approx(end, abs=1e-12 * max(1.0, scale))
        a, b = nxt.start_state
        # states are asymptote + c*exp(-kt): absolute error ~ eps*scale, so relative to a tiny mass it grows
        assert abs(a / (a + b) - p.d) <= 1e-12 * max(1.0, scale / (a + b))
        assert nxt.region is not prev.region
    for seg in sol.segments:
        from liarrep.meanfield import asymptote
        assert (seg.asymptote_alpha, seg.asymptote_beta) == asymptote(seg.region, p)
    assert len(sol.segments) <= 2


@settings(max_examples=300)
@given(model_params(), st.floats(0, 1))
def test_solve_converges_to_a_fixed_point(p, R0):
    # near the critical point the exit from the losing region is arbitrarily slow;
    # with p == 0 the true point collapses onto the origin
    assume(p.p > 1e-3 and abs(false_reputation(p) - p.d) > 0.02 and abs(p.theta - p.d) > 0.02)
    scale = 1.0 / (1.0 - p.u)
    sol = solve((R0 * scale, (1 - R0) * scale), p, 20.0 / (1.0 - p.u))
    end = float(sol.reputation_at(sol.t_end))
    dists = [abs(end - fp.reputation_value) for fp in fixed_points(p)]
    assert min(dists) < 1e-4


@pytest.mark.parametrize("seed", range(8))
def test_solve_matches_rk4_at_random_times(seed):
    rng = np.random.default_rng(1000 + seed)
    p = ModelParams(rng.uniform(0, 1), rng.uniform(0, 1), rng.uniform(0.05, 0.95),
                    rng.uniform(0.2, 2.0), rng.uniform(0.95, 0.995))
    R0 = rng.uniform(0, 1)
    init = (R0 / (1 - p.u), (1 - R0) / (1 - p.u))
    ts, path, _ = integrate(init, p, 1000.0)
    idx = rng.integers(0, len(ts), 100)
    a, b = solve(init, p, 1000.0).evaluate(ts[idx])
    assert np.max(np.abs(a - path[idx, 0])) < 1e-6
    assert np.max(np.abs(b - path[idx, 1])) < 1e-6


def test_fixed_points_subcritical(params):
    (fp,) = fixed_points(params)
    assert fp.kind is FixedPointKind.TRUE and fp.region is Region.ABOVE
    assert fp.reputation_value == 0.8
    assert (fp.alpha, fp.beta) == pytest.approx((64.0, 16.0), abs=1e-10)


def test_fixed_points_bistable():
    fps = fixed_points(set1(pbar=0.8, u=0.95))
    assert [f.kind for f in fps] == [FixedPointKind.TRUE, FixedPointKind.FALSE]
    assert (fps[0].alpha, fps[0].beta) == pytest.approx((3.2, 0.8), abs=1e-12)
    assert (fps[1].alpha, fps[1].beta) == pytest.approx((3.2, 16.8), abs=1e-12)
    assert fps[1].reputation_value == pytest.approx(0.16, abs=1e-15)


def test_fixed_points_false_only():
    (fp,) = fixed_points(ModelParams(0.3, 0.5, 0.4, 1.0, 0.99))
    assert fp.kind is FixedPointKind.FALSE and fp.reputation_value == pytest.approx(0.15)


@pytest.mark.parametrize("args, expected", [((0.8, 0.4, 1.0), 0.5), ((0.8, 0.4, 2.0), 1 / 3),
                                            ((0.4, 0.4, 1.0), None), ((0.3, 0.4, 1.0), None)])
def test_critical_pbar(args, expected):
    got = critical_pbar(*args)
    assert got == (None if expected is None else pytest.approx(expected, abs=1e-12))


@pytest.mark.parametrize("p, expected", [(0.8, (0.64, 0.8)), (0.2, (0.16, 0.8)), (1.0, (0.8, 0.8))])
def test_critical_d(p, expected):
    assert critical_d(ModelParams(0.8, p, 0.4, 1.0, 0.99)) == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("p, expected", [(0.4, 0.32), (0.45, 0.36), (1.0, 0.8), (0.2, 0.16)])
def test_false_reputation(p, expected):
    assert false_reputation(ModelParams(0.8, p, 0.4, 1.0, 0.99)) == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("params, regime", [
    (set1(pbar=0.45), Regime.SUBCRITICAL),
    (set1(pbar=0.55, u=0.95), Regime.BISTABLE),
    (ModelParams(0.3, 0.5, 0.4, 1.0, 0.99), Regime.FALSE_ONLY),
    (ModelParams(0.3, 1.0, 0.4, 2.0, 0.9), Regime.FALSE_ONLY),
])
def test_classify_regime(params, regime):
    rep = classify_regime(params)
    assert rep.regime is regime


def test_boundary_pbar_is_bistable():
    p = ModelParams(0.8, 0.5, 0.4, 1.0, 0.99)  # pbar == pbar_c == 0.5 exactly
    rep = classify_regime(p)
    assert rep.pbar_critical == 0.5 and rep.regime is Regime.BISTABLE
    false = [f for f in rep.fixed_points if f.kind is FixedPointKind.FALSE][0]
    assert false.reputation_value == pytest.approx(0.4) and false.region is Region.BELOW


def test_two_sided_unique():
    assert not any(two_sided_unique(ModelParams(0.8, 1 - pb, 0.4, 1.0, 0.99)) for pb in np.linspace(0, 1, 11))
    p = ModelParams(0.5, 0.5, 0.2, 1.0, 0.99)
    assert two_sided_unique(p)
    assert critical_pbar(min(p.theta, 1 - p.theta), p.d, p.omega) == pytest.approx(0.6)
    assert two_sided_unique(ModelParams(0.6, 1.0, 0.3, 1.0, 0.99))


@settings(max_examples=500)
@given(model_params())
def test_fixed_point_properties(p):
    assume(p.p > 1e-300)  # p -> 0 puts the true point at (or underflows to) the origin
    rep = classify_regime(p)
    assert rep.fixed_points
    for fp in rep.fixed_points:
        assert max(abs(x) for x in ode_rhs((fp.alpha, fp.beta), p)) <= 1e-9
        if fp.kind is FixedPointKind.TRUE:
            assert fp.reputation_value > p.d
        else:
            assert fp.reputation_value <= p.d + 1e-12
    assert rep.regime is regime_from_thresholds(p)
    assert rep.d_c1 <= rep.d_c2
    kinds = {f.kind for f in rep.fixed_points}
    expected = {Regime.SUBCRITICAL: {FixedPointKind.TRUE}, Regime.FALSE_ONLY: {FixedPointKind.FALSE},
                Regime.BISTABLE: {FixedPointKind.TRUE, FixedPointKind.FALSE}}[rep.regime]
    assert kinds == expected


@given(model_params(), st.floats(0, 1), st.floats(0, 1))
def test_false_reputation_monotone_in_pbar(p, x, y):
    lo, hi = sorted((x, y))
    assert false_reputation(p.replace(pbar=hi)) <= false_reputation(p.replace(pbar=lo)) + 1e-15


@given(model_params(), st.floats(0.05, 5), st.floats(0.05, 5))
def test_monotone_in_omega(p, x, y):
    lo, hi = sorted((x, y))
    assert false_reputation(p.replace(omega=hi)) <= false_reputation(p.replace(omega=lo)) + 1e-15
    if p.theta > p.d:
        assert critical_pbar(p.theta, p.d, hi) <= critical_pbar(p.theta, p.d, lo) + 1e-15


@given(st.floats(0.01, 0.99), st.floats(0, 1), st.floats(0, 1), st.floats(0.05, 5))
def test_critical_pbar_monotone_in_theta(d, x, y, omega):
    # map both draws into (d, 1]
    lo, hi = sorted((d + (1 - d) * max(x, 1e-9), d + (1 - d) * max(y, 1e-9)))
    assert critical_pbar(hi, d, omega) >= critical_pbar(lo, d, omega) - 1e-15
