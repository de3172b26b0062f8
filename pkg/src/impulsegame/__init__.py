"""Closed-form equilibria for scalar linear-state games where one player acts by impulses."""

from .coefficients import (solve_alpha1, solve_alpha2, solve_costate, solve_lambda1,
                           solve_lambda2, solve_m1, solve_m2, solve_offsets)
from .errors import (BoundaryDegenerate, GameError, GridTooCoarse, InconsistentClassification,
                     NonFiniteState, ParameterError, ScheduleError, SignViolation,
                     ZeroCoefficient)
from .exogenous import (CoincidenceReport, ExogenousSolution, check_coincidence,
                        solve_exogenous_fne, solve_exogenous_olne)
from .fne import (FneRegime, FneSolution, apply_R_operator, classify_fne_regime,
                  evaluate_value1, evaluate_value2, fne_candidate_times, fne_impulse_levels,
                  gamma, solve_endogenous_fne)
from .model import (GameParameters, ImpulseAction, ImpulseSchedule, PayoffPair, Trajectory,
                    evaluate_payoffs, params_from_mapping, simulate_and_evaluate,
                    simulate_trajectory, validate_params)
from .olne import (OlneRegime, OlneSolution, classify_olne_regime, delta,
                   hamiltonian_continuity_residual, solve_endogenous_olne)
from .segments import ExponentialSegment, Jump, OffsetSegment, PiecewiseCoefficient
from .verification import (best_response_player1, best_response_player2, compare_equilibria,
                           qvi_residual_scan)

__version__ = "0.1.0"
