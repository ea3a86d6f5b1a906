"""
solvers/errors.py
-----------------
Exception hierarchy shared by the exact solvers and the Monte Carlo harness.

Everything derives from ValueError so callers that only guard against bad input
(`except ValueError`) keep working.
"""


class SolverError(ValueError):
    """Base class for solver failures."""


class NonConvexError(SolverError):
    """A convex input (potential or flux table) was expected."""


class VacuumError(SolverError):
    """An average was requested over a set carrying no mass."""


class BlowupError(SolverError):
    """The drift ODE leaves its domain before the requested time."""

    def __init__(self, message: str, critical_time: float):
        super().__init__(message)
        self.critical_time = critical_time


class DomainTooSmallError(SolverError):
    """A minimizer landed on the boundary of the sampled path."""


class EmptyEnsembleError(SolverError):
    """Statistics were requested from an ensemble with no realizations."""


class InvalidLawError(SolverError):
    """A random initial law has inconsistent parameters."""
