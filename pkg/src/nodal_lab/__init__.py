"""Numerical laboratory for nodal sets of free oscillations."""

__version__ = "0.1.0"


class DomainError(ValueError):
    """Argument outside the mathematical domain of an operation."""


class ResolutionError(RuntimeError):
    """Grid too coarse to resolve the requested geometry or spectrum."""


class SolverError(RuntimeError):
    """Iterative solver failed to converge within its budget."""
