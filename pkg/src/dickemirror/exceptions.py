"""Exception hierarchy shared across the package."""


class DickeMirrorError(Exception):
    """Base class for all package errors."""


class BasisError(DickeMirrorError, ValueError):
    """Operator or state does not live on the expected basis."""


class DimensionError(DickeMirrorError, ValueError):
    """Requested Hilbert space exceeds a configured size limit."""


class PhaseError(DickeMirrorError, ValueError):
    """Parameters lie in the wrong phase for the requested model.

    The message always carries the computed critical coupling and mu.
    """

    def __init__(self, message, lambda_c=None, mu=None):
        if lambda_c is not None:
            message = f"{message} (lambda_c={lambda_c:.6g}, mu={mu:.6g})"
        super().__init__(message)
        self.lambda_c = lambda_c
        self.mu = mu


class ConvergenceError(DickeMirrorError, RuntimeError):
    """An iterative solver did not reach its tolerance."""


class CutoffError(DickeMirrorError, RuntimeError):
    """Population in the top Fock level exceeds the validation threshold."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report or {}


class DomainError(DickeMirrorError, ValueError):
    """Classical state outside the domain of the spin square root."""


class EnergyDriftError(DickeMirrorError, RuntimeError):
    """Classical integration lost energy conservation."""


class StateError(DickeMirrorError, ValueError):
    """Density matrix or state vector violates its invariants."""
