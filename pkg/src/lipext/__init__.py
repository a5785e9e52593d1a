"""Finite-metric toolkit for Lipschitz-extension lower-bound constructions."""

__version__ = "0.1.0"

from .errors import (  # noqa: F401
    CapacityError,
    DomainError,
    InfeasibleError,
    InternalConsistencyError,
    LipextError,
    SolverError,
)
from .metric import FiniteMetric, validate_metric  # noqa: F401
from .graphs import WeightedGraph  # noqa: F401
