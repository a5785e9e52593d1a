"""Optimization kernels: LP, min-cost flow, minimax descent."""

from .lp import LinearProgram, LPBuilder, LPSolution, solve_lp  # noqa: F401
from .flow import FlowNetwork, FlowResult, min_cost_flow, transportation  # noqa: F401
from .minimax import MinimaxResult, minimize_max_ratio  # noqa: F401
