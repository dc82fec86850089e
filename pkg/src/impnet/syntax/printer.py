from __future__ import annotations

from ..netsim import Packets, ProhibtedIps, SourceIps, Switches
from ..values import format_value
from . import ast as A

_PREC = {"==": 1, "!=": 1, "<": 1, "<=": 1, ">": 1, ">=": 1, "+": 2, "-": 2, "*": 3}


def format_expr(e, prec: int = 0) -> str:
    if isinstance(e, A.Const):
        return format_value(e.value)
    if isinstance(e, A.Name):
        return e.ident
    if isinstance(e, A.TupleExpr):
        return "(" + ", ".join(format_expr(x) for x in e.items) + ")"
    if isinstance(e, A.Call):
        return f"{e.fn}(" + ", ".join(format_expr(a) for a in e.args) + ")"
    if isinstance(e, A.BinExpr):
        p = _PREC[e.op]
        # left-associative arithmetic, non-associative comparison
        left = format_expr(e.left, p if p > 1 else p + 1)
        right = format_expr(e.right, p + 1)
        text = f"{left} {e.op} {right}"
        return f"({text})" if p < prec else text
    raise TypeError(f"not an expression: {e!r}")


def format_lambda(fn: A.Lambda) -> str:
    return f"\\{fn.param}. {format_expr(fn.body)}"


def format_query(q) -> str:
    if isinstance(q, Switches):
        return "Switches"
    if isinstance(q, SourceIps):
        return "SourceIps"
    if isinstance(q, ProhibtedIps):
        return "ProhibtedIps"
    if isinstance(q, Packets):
        return f"Packets({format_value(q.pattern)})"
    raise TypeError(f"not a query: {q!r}")


def format_transformer(et) -> str:
    if isinstance(et, A.IntLit):
        return str(et.n)
    if isinstance(et, A.Ask):
        return format_query(et.query)
    if isinstance(et, (A.Lift, A.ApplyLft, A.ApplyRit, A.Filter)):
        return f"{type(et).__name__}({et.var}, {format_lambda(et.fn)})"
    if isinstance(et, A.Merge):
        return f"Merge({et.left}, {et.right})"
    if isinstance(et, A.MixFst):
        return f"MixFst({format_value(et.actions)}, {et.left}, {et.right})"
    if isinstance(et, A.MixSnd):
        return f"MixSnd({et.left}, {format_value(et.actions)}, {et.right})"
    if isinstance(et, A.Once):
        return f"Once({et.var}, {et.count})"
    if isinstance(et, (A.MakForwRule, A.MakeRule)):
        return f"{type(et).__name__}({et.var})"
    raise TypeError(f"not an event transformer: {et!r}")


def format_stmt(s, indent: str = "") -> str:
    """One statement per line; compound statements span several lines."""
    if isinstance(s, A.Seq):
        return "\n".join(format_stmt(x, indent) for x in A.flatten(s))
    if isinstance(s, A.Assign):
        return f"{indent}{s.var} := {format_transformer(s.et)};"
    if isinstance(s, A.AddRules):
        return f"{indent}AddRules({s.var});"
    if isinstance(s, A.Register):
        return f"{indent}Register;"
    if isinstance(s, A.Send):
        return f"{indent}Send({s.var});"
    inner = indent + "  "
    if isinstance(s, A.If):
        return (f"{indent}if ({s.var}) then {{\n{format_stmt(s.then, inner)}\n"
                f"{indent}}} else {{\n{format_stmt(s.else_, inner)}\n{indent}}}")
    if isinstance(s, A.While):
        return f"{indent}while ({s.var}) do {{\n{format_stmt(s.body, inner)}\n{indent}}}"
    raise TypeError(f"not a statement: {s!r}")


def brief_stmt(s) -> str:
    """Single-line rendering for trace output."""
    if isinstance(s, A.If):
        return f"if ({s.var}) then {{...}} else {{...}}"
    if isinstance(s, A.While):
        return f"while ({s.var}) do {{...}}"
    if isinstance(s, A.Seq):
        return f"{brief_stmt(s.first)} ..."
    return format_stmt(s)


def pretty_print(p: A.Program) -> str:
    lines = [f"{name} = {format_query(q)};" for name, q in p.defs]
    lines.append(">>")
    lines.append(format_stmt(p.body))
    return "\n".join(lines) + "\n"
