"""Importance sampling for exit probabilities of small-noise diffusions.

The sampler drives Euler-Maruyama trajectories with controls taken from
subsolutions of the exit-time Hamilton-Jacobi-Bellman equation; ``verify``
checks the subsolution inequalities and the second-moment bounds numerically.
"""
from .errors import (ComplexRoots, ConfigError, DegenerateDiffusion, HypothesisViolation,
                     InvalidDomain, InvalidM, LemmaViolation, NonFiniteState,
                     NonStableRestPoint, QuadratureFailure, RareExitError)
from .model import (EscapeProblem, ExitDomain, ProcessModel, double_well_model, exit_level,
                    linear_model, linearize, polynomial_model, quasipotential)
from .sampler import (EstimatorReport, GridResult, SchemeRule, SimConfig, estimate,
                      experiment_grid, simulate_trajectory)
from .subsolution import SCHEME_KINDS, SchemeParams, Subsolution, control, tstar
from .verify import AnalysisParams, certify_region_lemmas, check_region_lemmas, theorem_bound

__version__ = "0.1.0"
