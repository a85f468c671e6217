"""Adaptive methods with decoupled weight decay on nonsmooth finite sums.

The package implements a family of momentum steppers with elementwise
preconditioning, online verification of the hypotheses behind their
convergence guarantees, and an Euler integrator for the limiting
differential inclusions the iterates track.
"""

from ._backend import BACKEND_NAME, COMPILED
from .core import (
    ConstantSchedule,
    DiagnosticsConfig,
    EpochLogSchedule,
    OptimizerState,
    PowerSchedule,
    RunConfig,
    ScaledSchedule,
    ValidationReport,
    config_echo,
    load_config,
    make_schedule,
    parse_schedule,
    validate_config,
)
from .engine import (
    RunResult,
    StepRecord,
    adam_coupled_step,
    adamd_run,
    adamw_step,
    afmdw_step,
    replay_step,
    run,
    single_timescale_step,
)
from .errors import (
    AfmdwError,
    ConfigError,
    ConfigViolation,
    DegenerateFit,
    DimensionMismatch,
    MalformedGraph,
    OutputExists,
    QueryOutOfRange,
    UnsupportedProblem,
)
from .estimators import EstimatorScheme, bound_certificate, precondition, update_estimator
from .problems import make_problem

__version__ = "0.1.0"

__all__ = [
    "AfmdwError",
    "BACKEND_NAME",
    "COMPILED",
    "ConfigError",
    "ConfigViolation",
    "ConstantSchedule",
    "DegenerateFit",
    "DiagnosticsConfig",
    "DimensionMismatch",
    "EpochLogSchedule",
    "EstimatorScheme",
    "MalformedGraph",
    "OptimizerState",
    "OutputExists",
    "PowerSchedule",
    "QueryOutOfRange",
    "RunConfig",
    "RunResult",
    "ScaledSchedule",
    "StepRecord",
    "UnsupportedProblem",
    "ValidationReport",
    "adam_coupled_step",
    "adamd_run",
    "adamw_step",
    "afmdw_step",
    "bound_certificate",
    "config_echo",
    "load_config",
    "make_problem",
    "make_schedule",
    "parse_schedule",
    "precondition",
    "replay_step",
    "run",
    "single_timescale_step",
    "update_estimator",
    "validate_config",
    "__version__",
]
