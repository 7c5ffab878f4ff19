"""Deviation-test reputation system under maximal lying: stochastic
simulation, exact mean-field analysis and experiment harness."""

__version__ = "0.1.0"

from .errors import (BurnInTooLarge, ChatterDetected, DegenerateDenominator, DegenerateState,
                     InvalidScale, NonFinite, OutOfRange, OverlappingTargets, ReputationError)
from .experiments import (MonteCarloSummary, OccupancyStats, RunPredicate, SweepResult,
                          convergence_study, monte_carlo, occupancy, run_seed, sweep_d, sweep_pbar)
from .markov import (EventKind, SimulationConfig, Trajectory, sample_event, scaled_step, simulate,
                     step)
from .meanfield import (FixedPoint, FixedPointKind, PiecewiseSolution, Regime, RegimeReport, Region,
                        classify_regime, critical_d, critical_pbar, crossing_time, false_reputation,
                        fixed_points, ode_rhs, segment_solution, solve, two_sided_unique)
from .model import (ModelParams, ReputationState, deviation_test, initial_state, reputation,
                    validate_params)
