"""Exception hierarchy shared by the parser, the simulator and both evaluators."""

from __future__ import annotations


class ImpNetError(Exception):
    """Base class for every error raised by this package."""


class ParseError(ImpNetError):
    def __init__(self, message: str, line: int = 0, column: int = 0, token: int = 0):
        self.message = message
        self.line = line
        self.column = column
        self.token = token
        where = f"line {line}, column {column}" if line else "end of input"
        super().__init__(f"{where}: {message}")


class TopologyError(ImpNetError):
    pass


class EvalError(ImpNetError):
    """Evaluation went wrong: ill-shaped event, lambda failure, bad lengths."""


class UnboundVariableError(EvalError):
    def __init__(self, name: str, where: str = ""):
        self.name = name
        suffix = f" in {where}" if where else ""
        super().__init__(f"unbound variable {name!r}{suffix}")


class ShapeError(EvalError):
    pass


class LengthMismatchError(EvalError):
    def __init__(self, op: str, left: int, right: int):
        self.left = left
        self.right = right
        super().__init__(f"{op}: events have different lengths {left} and {right}")


class BudgetExceededError(EvalError):
    def __init__(self, budget: int):
        self.budget = budget
        super().__init__(f"step budget of {budget} rule applications exceeded")


class StuckError(EvalError):
    """No equation or rule applies and the configuration is not final."""

    def __init__(self, head: str, reason: str = ""):
        self.head = head
        self.reason = reason
        msg = f"stuck at {head}"
        if reason:
            msg += f": {reason}"
        super().__init__(msg)
