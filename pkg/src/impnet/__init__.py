"""ImpNet: parse controller programs and run them under two semantics."""

from .errors import (
    BudgetExceededError, EvalError, ImpNetError, LengthMismatchError, ParseError, ShapeError,
    StuckError, TopologyError, UnboundVariableError,
)

__version__ = "0.1.0"

__all__ = [
    "ImpNetError", "ParseError", "TopologyError", "EvalError", "UnboundVariableError",
    "ShapeError", "LengthMismatchError", "BudgetExceededError", "StuckError",
]
