"""Core computations executed by the rewriting engine, and the surface-to-core mapping.

Surface forms map one-to-one onto core constructors (``Lift(x, f)`` becomes
``x - f``, ``Register`` becomes ``R`` and so on). Statement sequencing is
turned into the ``C1 -> C2`` chain operator while desugaring, so a core term
never contains surface juxtaposition.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

from ..values import ActionSet, Event, RuleList, format_value
from . import ast as A
from .printer import format_lambda, format_query


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Num:
    n: int


@dataclass(frozen=True)
class Val:
    """An evaluated event or rule list."""

    payload: Union[Event, RuleList]


@dataclass(frozen=True)
class Unit:
    """The empty computation ``.``."""


@dataclass(frozen=True)
class Nil:
    """``[]``, equal to ``.``."""


@dataclass(frozen=True)
class Hole:
    pass


HOLE = Hole()
UNIT = Unit()


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Computation"
    right: "Computation"


@dataclass(frozen=True)
class QueryC:
    query: object


@dataclass(frozen=True)
class LiftC:
    """``C - \\t.f``"""

    arg: "Computation"
    fn: A.Lambda


@dataclass(frozen=True)
class AppL:
    """``(C, \\t.f)``"""

    arg: "Computation"
    fn: A.Lambda


@dataclass(frozen=True)
class AppR:
    """``(\\t.f, C)``"""

    arg: "Computation"
    fn: A.Lambda


@dataclass(frozen=True)
class PairC:
    """``(C1, C2)``, the core form of Merge."""

    left: "Computation"
    right: "Computation"


@dataclass(frozen=True)
class MixL:
    actions: ActionSet
    left: "Computation"
    right: "Computation"


@dataclass(frozen=True)
class MixR:
    left: "Computation"
    actions: ActionSet
    right: "Computation"


@dataclass(frozen=True)
class FilterC:
    arg: "Computation"
    fn: A.Lambda


@dataclass(frozen=True)
class OnceC:
    arg: "Computation"
    count: int


@dataclass(frozen=True)
class ForwC:
    """``F(C)``"""

    arg: "Computation"


@dataclass(frozen=True)
class RuleC:
    """``M(C)``"""

    arg: "Computation"


@dataclass(frozen=True)
class AssignC:
    target: "Computation"
    rhs: "Computation"


@dataclass(frozen=True)
class Semi:
    """``C;``: evaluate C and discard its value."""

    body: "Computation"


@dataclass(frozen=True)
class AddC:
    """``A(C)``"""

    arg: "Computation"


@dataclass(frozen=True)
class RegC:
    """``R``"""


@dataclass(frozen=True)
class SendC:
    """``S(C)``"""

    arg: "Computation"


@dataclass(frozen=True)
class IfC:
    cond: "Computation"
    then: "Computation"
    else_: Optional["Computation"] = None  # None: one-armed


@dataclass(frozen=True)
class WhileC:
    cond: "Computation"
    body: "Computation"


@dataclass(frozen=True)
class Chain:
    """``C1 -> C2``: process ``first`` before ``rest``."""

    first: "Computation"
    rest: "Computation"


@dataclass(frozen=True)
class ProgC:
    """``D >> S``"""

    defs: "Computation"
    body: "Computation"


Computation = Union[
    Var, Num, Val, Unit, Nil, Hole, BinOp, QueryC, LiftC, AppL, AppR, PairC, MixL, MixR,
    FilterC, OnceC, ForwC, RuleC, AssignC, Semi, AddC, RegC, SendC, IfC, WhileC, Chain, ProgC,
]


def is_value(c) -> bool:
    return isinstance(c, (Num, Val))


# -- desugaring ----------------------------------------------------------------


def desugar(node):
    """Map a surface statement, transformer or program to its core computation."""
    if isinstance(node, A.Program):
        defs = [AssignC(Var(n), QueryC(q)) for n, q in node.defs]
        d = UNIT
        for c in reversed(defs):
            d = c if isinstance(d, Unit) else Chain(c, d)
        return ProgC(d, desugar(node.body))
    # statements
    if isinstance(node, A.Assign):
        return AssignC(Var(node.var), desugar(node.et))
    if isinstance(node, A.Seq):
        return Chain(desugar(node.first), desugar(node.rest))
    if isinstance(node, A.AddRules):
        return AddC(Var(node.var))
    if isinstance(node, A.Register):
        return RegC()
    if isinstance(node, A.Send):
        return SendC(Var(node.var))
    if isinstance(node, A.If):
        return IfC(Var(node.var), desugar(node.then), desugar(node.else_))
    if isinstance(node, A.While):
        return WhileC(Var(node.var), desugar(node.body))
    # transformers
    if isinstance(node, A.IntLit):
        return Num(node.n)
    if isinstance(node, A.Ask):
        return QueryC(node.query)
    if isinstance(node, A.Lift):
        return LiftC(Var(node.var), node.fn)
    if isinstance(node, A.ApplyLft):
        return AppL(Var(node.var), node.fn)
    if isinstance(node, A.ApplyRit):
        return AppR(Var(node.var), node.fn)
    if isinstance(node, A.Merge):
        return PairC(Var(node.left), Var(node.right))
    if isinstance(node, A.MixFst):
        return MixL(node.actions, Var(node.left), Var(node.right))
    if isinstance(node, A.MixSnd):
        return MixR(Var(node.left), node.actions, Var(node.right))
    if isinstance(node, A.Filter):
        return FilterC(Var(node.var), node.fn)
    if isinstance(node, A.Once):
        return OnceC(Var(node.var), node.count)
    if isinstance(node, A.MakForwRule):
        return ForwC(Var(node.var))
    if isinstance(node, A.MakeRule):
        return RuleC(Var(node.var))
    raise TypeError(f"cannot desugar {node!r}")


class NotSurface(ValueError):
    pass


def _name(c) -> str:
    if not isinstance(c, Var):
        raise NotSurface(f"expected a variable, got {format_core(c)}")
    return c.name


def resugar(c):
    """Inverse of :func:`desugar` on the image of desugaring."""
    if isinstance(c, ProgC):
        defs = []
        d = c.defs
        while not isinstance(d, Unit):
            head, d = (d.first, d.rest) if isinstance(d, Chain) else (d, UNIT)
            if not (isinstance(head, AssignC) and isinstance(head.rhs, QueryC)):
                raise NotSurface("definitions must be query assignments")
            defs.append((_name(head.target), head.rhs.query))
        return A.Program(tuple(defs), resugar(c.body))
    if isinstance(c, Chain):
        return A.Seq(resugar(c.first), resugar(c.rest))
    if isinstance(c, AssignC):
        return A.Assign(_name(c.target), _resugar_et(c.rhs))
    if isinstance(c, AddC):
        return A.AddRules(_name(c.arg))
    if isinstance(c, RegC):
        return A.Register()
    if isinstance(c, SendC):
        return A.Send(_name(c.arg))
    if isinstance(c, IfC):
        if c.else_ is None:
            raise NotSurface("one-armed If has no surface form")
        return A.If(_name(c.cond), resugar(c.then), resugar(c.else_))
    if isinstance(c, WhileC):
        return A.While(_name(c.cond), resugar(c.body))
    return _resugar_et(c)


def _resugar_et(c):
    if isinstance(c, Num):
        return A.IntLit(c.n)
    if isinstance(c, QueryC):
        return A.Ask(c.query)
    if isinstance(c, LiftC):
        return A.Lift(_name(c.arg), c.fn)
    if isinstance(c, AppL):
        return A.ApplyLft(_name(c.arg), c.fn)
    if isinstance(c, AppR):
        return A.ApplyRit(_name(c.arg), c.fn)
    if isinstance(c, PairC):
        return A.Merge(_name(c.left), _name(c.right))
    if isinstance(c, MixL):
        return A.MixFst(c.actions, _name(c.left), _name(c.right))
    if isinstance(c, MixR):
        return A.MixSnd(_name(c.left), c.actions, _name(c.right))
    if isinstance(c, FilterC):
        return A.Filter(_name(c.arg), c.fn)
    if isinstance(c, OnceC):
        return A.Once(_name(c.arg), c.count)
    if isinstance(c, ForwC):
        return A.MakForwRule(_name(c.arg))
    if isinstance(c, RuleC):
        return A.MakeRule(_name(c.arg))
    raise NotSurface(f"not an event transformer: {format_core(c)}")


# -- printing ------------------------------------------------------------------


def format_core(c) -> str:
    f = format_core
    if isinstance(c, Var):
        return c.name
    if isinstance(c, Num):
        return str(c.n)
    if isinstance(c, Val):
        return format_value(c.payload)
    if isinstance(c, Unit):
        return "."
    if isinstance(c, Nil):
        return "[]"
    if isinstance(c, Hole):
        return "<>"
    if isinstance(c, BinOp):
        return f"({f(c.left)} {c.op} {f(c.right)})"
    if isinstance(c, QueryC):
        return format_query(c.query)
    if isinstance(c, LiftC):
        return f"{f(c.arg)} - {format_lambda(c.fn)}"
    if isinstance(c, AppL):
        return f"({f(c.arg)}, {format_lambda(c.fn)})"
    if isinstance(c, AppR):
        return f"({format_lambda(c.fn)}, {f(c.arg)})"
    if isinstance(c, PairC):
        return f"({f(c.left)}, {f(c.right)})"
    if isinstance(c, MixL):
        return f"({format_value(c.actions)}, {f(c.left)}, {f(c.right)})"
    if isinstance(c, MixR):
        return f"({f(c.left)}, {format_value(c.actions)}, {f(c.right)})"
    if isinstance(c, FilterC):
        return f"({f(c.arg)}, f, {format_lambda(c.fn)})"
    if isinstance(c, OnceC):
        return f"O({f(c.arg)}, {c.count})"
    if isinstance(c, ForwC):
        return f"F({f(c.arg)})"
    if isinstance(c, RuleC):
        return f"M({f(c.arg)})"
    if isinstance(c, AssignC):
        return f"{f(c.target)} := {f(c.rhs)}"
    if isinstance(c, Semi):
        return f"{f(c.body)};"
    if isinstance(c, AddC):
        return f"A({f(c.arg)})"
    if isinstance(c, RegC):
        return "R"
    if isinstance(c, SendC):
        return f"S({f(c.arg)})"
    if isinstance(c, IfC):
        tail = "" if c.else_ is None else f" [{f(c.else_)}]"
        return f"If ({f(c.cond)}) [{f(c.then)}]{tail}"
    if isinstance(c, WhileC):
        return f"While ({f(c.cond)}) [{f(c.body)}]"
    if isinstance(c, Chain):
        return f"{f(c.first)} ~> {f(c.rest)}"
    if isinstance(c, ProgC):
        return f"{f(c.defs)} >> {f(c.body)}"
    raise TypeError(f"not a computation: {c!r}")
