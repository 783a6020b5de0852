"""Exception types shared across the package.

The command line layer maps these onto exit codes: validation problems
exit with 1, file format and I/O problems with 2, everything else with 3.
"""


class DinetError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(DinetError, ValueError):
    """An argument violates a documented precondition."""


class UncachedParentSetError(DinetError, LookupError):
    """A directed information value was requested that the cache does not hold."""

    def __init__(self, target: int, members: tuple) -> None:
        self.target = target
        self.members = tuple(members)
        super().__init__(
            f"uncached parent set: target {target}, set {list(self.members)}"
        )


class EstimationError(DinetError, RuntimeError):
    """An estimator could not produce a finite value from the given data."""


class NonStationaryModelError(DinetError, ValueError):
    """A linear network model has spectral radius at or above one."""


class InfeasibleArborescenceError(DinetError, RuntimeError):
    """No spanning arborescence exists with finite total weight."""


class PanelFormatError(DinetError, ValueError):
    """A panel file could not be parsed; the message names the offending row."""
