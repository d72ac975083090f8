"""Exception types shared across the package."""


class HlbError(Exception):
    """Base class for all package errors."""


class DomainError(HlbError):
    """Input violates a documented precondition."""


class NumericError(HlbError):
    """A computation produced a non-finite or otherwise invalid result."""


class NotSlidingError(DomainError):
    """Point is not a sliding point of the switching manifold."""


class BracketError(DomainError):
    """Root bracket does not contain a sign change."""


class NoReturnError(HlbError):
    """Trajectory failed to return to the Poincare section within t_max."""


class ModelInconsistencyError(HlbError):
    """A reset produced a state inconsistent with the hybrid model."""


class SweepFailedError(HlbError):
    """No row of a parameter sweep converged."""
