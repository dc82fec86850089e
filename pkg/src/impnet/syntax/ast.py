"""Surface abstract syntax: programs, statements, event transformers and lambdas."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from ..netsim import Query
from ..values import ActionSet


# -- lambda bodies -------------------------------------------------------------


@dataclass(frozen=True)
class Const:
    """A literal: an ``Int``, the wildcard, or a nullary action/pattern."""

    value: object


@dataclass(frozen=True)
class Name:
    """The lambda parameter, or a reference to a program variable."""

    ident: str


@dataclass(frozen=True)
class TupleExpr:
    items: tuple


@dataclass(frozen=True)
class Call:
    """Builtin application. ``args`` holds expressions, or ``Name`` for variable/field slots."""

    fn: str
    args: tuple


@dataclass(frozen=True)
class BinExpr:
    op: str
    left: "Expr"
    right: "Expr"


Expr = Union[Const, Name, TupleExpr, Call, BinExpr]


@dataclass(frozen=True)
class Lambda:
    param: str
    body: Expr


# -- event transformers --------------------------------------------------------


@dataclass(frozen=True)
class IntLit:
    n: int


@dataclass(frozen=True)
class Lift:
    var: str
    fn: Lambda


@dataclass(frozen=True)
class ApplyLft:
    var: str
    fn: Lambda


@dataclass(frozen=True)
class ApplyRit:
    var: str
    fn: Lambda


@dataclass(frozen=True)
class Merge:
    left: str
    right: str


@dataclass(frozen=True)
class MixFst:
    actions: ActionSet
    left: str
    right: str


@dataclass(frozen=True)
class MixSnd:
    left: str
    actions: ActionSet
    right: str


@dataclass(frozen=True)
class Filter:
    var: str
    fn: Lambda


@dataclass(frozen=True)
class Once:
    var: str
    count: int


@dataclass(frozen=True)
class MakForwRule:
    var: str


@dataclass(frozen=True)
class MakeRule:
    var: str


@dataclass(frozen=True)
class Ask:
    """A query used directly as a transformer (``y := SourceIps;``)."""

    query: Query


EventTransformer = Union[
    IntLit, Lift, ApplyLft, ApplyRit, Merge, MixFst, MixSnd, Filter, Once, MakForwRule,
    MakeRule, Ask,
]


# -- statements ----------------------------------------------------------------


@dataclass(frozen=True)
class Assign:
    var: str
    et: EventTransformer


@dataclass(frozen=True)
class Seq:
    """``first; rest``. Chains are kept right-nested so printing is unambiguous."""

    first: "Stmt"
    rest: "Stmt"

    def __post_init__(self):
        if isinstance(self.first, Seq):
            raise ValueError("Seq must be right-nested; use seq(...)")


@dataclass(frozen=True)
class AddRules:
    var: str


@dataclass(frozen=True)
class Register:
    pass


@dataclass(frozen=True)
class Send:
    var: str


@dataclass(frozen=True)
class If:
    var: str
    then: "Stmt"
    else_: "Stmt"


@dataclass(frozen=True)
class While:
    var: str
    body: "Stmt"


Stmt = Union[Assign, Seq, AddRules, Register, Send, If, While]


def seq(*stmts: Stmt) -> Stmt:
    """Build a right-nested chain, flattening any chains passed in."""
    flat = []
    for s in stmts:
        flat.extend(flatten(s))
    if not flat:
        raise ValueError("empty statement list")
    out = flat[-1]
    for s in reversed(flat[:-1]):
        out = Seq(s, out)
    return out


def flatten(s: Stmt) -> list:
    out = []
    while isinstance(s, Seq):
        out.append(s.first)
        s = s.rest
    out.append(s)
    return out


@dataclass(frozen=True)
class Program:
    defs: tuple
    body: Stmt

    def __post_init__(self):
        names = [n for n, _ in self.defs]
        if len(set(names)) != len(names):
            raise ValueError("definitions must bind distinct variables")


def transformer_vars(et: EventTransformer) -> set:
    """Variables an event transformer reads, including those named inside lambdas."""
    if isinstance(et, (IntLit, Ask)):
        return set()
    if isinstance(et, (Lift, ApplyLft, ApplyRit, Filter)):
        return {et.var} | lambda_vars(et.fn)
    if isinstance(et, (Merge, MixFst, MixSnd)):
        return {et.left, et.right}
    return {et.var}


def lambda_vars(fn: Lambda) -> set:
    out = set()

    def walk(e):
        if isinstance(e, Name):
            if e.ident != fn.param:
                out.add(e.ident)
        elif isinstance(e, TupleExpr):
            for x in e.items:
                walk(x)
        elif isinstance(e, BinExpr):
            walk(e.left)
            walk(e.right)
        elif isinstance(e, Call):
            for i, a in enumerate(e.args):
                if e.fn == "change" and i == 0:
                    continue
                walk(a)

    walk(fn.body)
    return out
