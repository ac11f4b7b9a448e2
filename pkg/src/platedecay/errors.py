"""Exception types shared across the package.

Every error carries an optional ``invariant`` tag naming the violated
contract, so the CLI can emit machine-readable error reports.
"""


class PlateDecayError(Exception):
    """Base class for all package errors."""

    def __init__(self, message, invariant=None):
        super().__init__(message)
        self.invariant = invariant


class InvalidGeometryError(PlateDecayError, ValueError):
    """Domain or mesh geometry is degenerate or inconsistent."""


class InvalidArgumentError(PlateDecayError, ValueError):
    """An operation was called with arguments outside its contract."""


class MissingThresholdError(PlateDecayError, LookupError):
    """No corner-angle threshold is known for the requested Poisson ratio."""


class AssemblyStabilityError(PlateDecayError, ValueError):
    """Penalty parameter below the coercivity floor; assembly refused."""


class SolverError(PlateDecayError, RuntimeError):
    """A linear solve or eigensolve failed to converge."""


class InsufficientDataError(PlateDecayError, ValueError):
    """Not enough data points to perform the requested fit."""


class ConfigValidationError(PlateDecayError, ValueError):
    """Run configuration violates one of its invariants."""
