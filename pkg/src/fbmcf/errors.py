"""Exception types shared across the package."""


class FbmcfError(Exception):
    """Base class for all package-specific errors."""


class ChartRangeError(FbmcfError):
    """Chart coordinates outside the validity radius of the tubular map."""


class NewtonConvergenceError(FbmcfError):
    """Newton inversion of the tubular map failed to converge."""


class SingularMetricError(FbmcfError):
    """Metric determinant is non-positive (chart or graph overreach)."""


class PastSingularityError(FbmcfError):
    """An exact shrinking solution was requested at or past its singular time."""


class FlowStepError(FbmcfError):
    """Base class for aborts inside the time stepper."""

    reason = "flow-error"


class CflViolationError(FlowStepError):
    reason = "cfl-violation"


class ChartExitError(FlowStepError):
    reason = "chart-exit"


class NonFiniteError(FlowStepError):
    reason = "non-finite"


class TimeWindowError(FbmcfError):
    """Boundary-kernel time window exceeded for a curved support surface."""


class ReflectionConditionError(FbmcfError):
    """Mixed coefficient does not vanish on the free-boundary edge."""


class ScenarioError(FbmcfError):
    """Scenario file failed to parse or validate."""

    def __init__(self, message, key=None, line=None, column=None):
        super().__init__(message)
        self.key = key
        self.line = line
        self.column = column
