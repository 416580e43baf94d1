"""Exception types shared across the package."""


class LieflowError(Exception):
    """Base class for all lieflow errors."""


class DimensionMismatch(LieflowError, ValueError):
    """Operands live on charts of different dimensions."""


class ParseError(LieflowError, ValueError):
    """An expression could not be parsed; carries the offending position."""

    def __init__(self, message, position=None):
        if position is not None:
            message = f"{message} (at column {position + 1})"
        super().__init__(message)
        self.position = position


class ScenarioError(LieflowError, ValueError):
    """A scenario file failed to parse or validate."""


class StepLimitExceeded(LieflowError, RuntimeError):
    """The integrator hit its step budget before reaching the final time."""


class IntegrationError(LieflowError, RuntimeError):
    """The integrator could not make progress (non-finite state or vanishing step)."""


class DomainExitError(LieflowError, RuntimeError):
    """A required trajectory left the chart box."""


class StructureNotFound(LieflowError):
    """No structure-coefficient row could be certified at the degree bound.

    ``row`` is the 1-based index of the first generator whose bracket with
    the flowing field has no certificate with coefficients of degree <= bound.
    """

    def __init__(self, row, degree_bound):
        super().__init__(
            f"generator {row}: no certificate with coefficients of degree <= {degree_bound}"
        )
        self.row = row
        self.degree_bound = degree_bound
