"""Exception types shared across the workbench."""


class WorkbenchError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(WorkbenchError, ValueError):
    """A configuration value violates its contract (message names the field/flag)."""


class SchemaError(WorkbenchError, ValueError):
    """An instance file fails validation: bad keys, shapes, or format version."""


class MetricError(WorkbenchError, ValueError):
    """A metric is undefined for the given inputs (e.g. zero-norm truth vector)."""


class NumericalError(WorkbenchError, ArithmeticError):
    """A single computation produced a non-finite intermediate."""


class OracleError(WorkbenchError, ArithmeticError):
    """A reference path failed: degenerate quadrature, violated oracle precondition,
    or a reference solver that did not reach its target accuracy."""


class DivergenceError(WorkbenchError, ArithmeticError):
    """A solver iterate went non-finite.

    Carries the step index, the first offending coordinate when known, and
    (when raised from a run_* driver) the partial trace accumulated before
    the blow-up.
    """

    def __init__(self, message, iteration=None, coordinate=None, trace=None):
        super().__init__(message)
        self.iteration = iteration
        self.coordinate = coordinate
        self.trace = trace
