"""Exception types shared across the package."""


class Ym2Error(Exception):
    """Base class for all package errors."""


class UnsupportedRepresentationError(Ym2Error):
    pass


class LoopError(Ym2Error):
    """Loop construction or validation failure."""


class NotSimpleLoopError(LoopError):
    """Raised when an operation requires a non-self-intersecting loop."""


class OffLatticeError(Ym2Error):
    """Transport endpoints must lie on the subdivision lattice."""


class TruncationError(Ym2Error):
    """A request exceeded the hard truncation order of the formal algebra."""


class ResourceBudgetError(Ym2Error):
    """Estimated work exceeds the configured budget.

    The estimate that tripped the limit is carried so callers can report it.
    """

    def __init__(self, message, estimate, budget):
        super().__init__(message)
        self.estimate = estimate
        self.budget = budget


class McDomainError(Ym2Error):
    """Monte Carlo preconditions (positive coupling, loop above the axis)."""


class ScenarioError(Ym2Error):
    """Scenario file parse or validation error; carries the offending field."""

    def __init__(self, message, field=None):
        super().__init__(message if field is None else f"{field}: {message}")
        self.field = field
