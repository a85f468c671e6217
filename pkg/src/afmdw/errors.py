"""Exception types shared across the package."""


class AfmdwError(Exception):
    """Base class for package errors."""


class ConfigError(AfmdwError):
    """Bad configuration value, unknown key, or malformed config file."""


class ConfigViolation(AfmdwError):
    """A run was requested whose config fails hypothesis validation in strict mode."""

    def __init__(self, violated, report):
        self.violated = tuple(violated)
        self.report = report
        super().__init__(
            "hypothesis check failed for: "
            + ", ".join(self.violated)
            + " (rerun with --force / strict=false to downgrade to a warning)"
        )


class DimensionMismatch(AfmdwError):
    """Operand shapes disagree."""


class UnsupportedProblem(AfmdwError):
    """An operation requires problem structure the given problem lacks."""


class MalformedGraph(AfmdwError):
    """Computation graph is not a DAG or references missing operands."""


class QueryOutOfRange(AfmdwError):
    """A path or schedule was queried outside its domain."""


class DegenerateFit(AfmdwError):
    """Too few usable points for a regression."""


class OutputExists(AfmdwError):
    """Refusing to overwrite existing run outputs without --force."""
