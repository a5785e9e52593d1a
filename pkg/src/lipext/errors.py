"""Exception hierarchy.

The CLI maps :class:`DomainError` to exit code 1 and :class:`CapacityError`
to exit code 2; everything else is an internal failure.
"""


class LipextError(Exception):
    """Base class for all library errors."""


class DomainError(LipextError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ShapeError(DomainError):
    """Array input has the wrong shape."""


class ConnectivityError(DomainError):
    """A graph that must be connected is not."""


class RegularityError(DomainError):
    """A graph that must be regular is not."""


class CapacityError(LipextError):
    """Instance exceeds the size this implementation is willing to handle."""


class SamplingError(LipextError):
    """Random generation failed within its rejection budget."""


class SolverError(LipextError):
    """Numerical failure inside an optimization routine."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class InfeasibleError(LipextError):
    """Optimization problem has no feasible point; carries a certificate."""

    def __init__(self, message, certificate=None):
        super().__init__(message)
        self.certificate = certificate


class InternalConsistencyError(LipextError):
    """A self-audit failed; indicates a bug rather than bad input."""
