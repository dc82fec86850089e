"""Concrete syntax, abstract syntax, printing and desugaring of ImpNet programs."""

from .ast import *  # noqa: F401,F403
from .ast import Program, Stmt, seq
from .core import desugar, format_core, resugar
from .parser import (
    parse_bindings, parse_lambda, parse_program, parse_stmt, parse_value, load_bindings,
)
from .printer import format_lambda, format_stmt, pretty_print

__all__ = [
    "Program", "Stmt", "seq", "desugar", "resugar", "format_core", "parse_program",
    "parse_stmt", "parse_lambda", "parse_value", "parse_bindings", "load_bindings",
    "pretty_print", "format_stmt", "format_lambda",
]
