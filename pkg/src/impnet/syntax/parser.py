"""Recursive-descent parser for programs, lambdas, value literals and binding files."""

from __future__ import annotations

from pathlib import Path
from typing import Iterable, Optional

from ..errors import ParseError, UnboundVariableError
from ..netsim import Packets, ProhibtedIps, SourceIps, Switches
from ..values import (
    ACTION_TYPES, PATTERN_TYPES, WILDCARD, ActionSet, Bool, Change, Drop, DstIp, DstPort,
    Event, HEADER_FIELDS, InPort, Int, IpAddr, MatchAll, Packet, Port, Rule, RuleList,
    SendAll, SendController, SendOut, SrcIp, SrcPort, SwitchId, Tuple,
)
from . import ast as A
from .lexer import Token, tokenize

QUERY_NAMES = ("Switches", "SourceIps", "ProhibtedIps", "Packets")
LAMBDA_TRANSFORMERS = {"Lift": A.Lift, "ApplyLft": A.ApplyLft, "ApplyRit": A.ApplyRit,
                       "Filter": A.Filter}
CONST_WORDS = {"sendall": SendAll(), "sendcontroller": SendController(), "drop": Drop(),
               "matchall": MatchAll()}
# builtin -> arity; argument slots that name a variable or header field are listed apart
BUILTINS = {"port": 1, "switch": 2, "prohibit": 2, "fst": 1, "snd": 1, "thd": 1,
            "srcip": 1, "dstip": 1, "srcport": 1, "dstport": 1, "inport": 1,
            "sendout": 1, "change": 2}
VAR_SLOTS = {"switch": 1, "prohibit": 1}
PATTERN_CTORS = {"inport": InPort, "srcport": SrcPort, "dstport": DstPort,
                 "srcip": SrcIp, "dstip": DstIp}

KEYWORDS = frozenset(
    {"AddRules", "Register", "Send", "if", "then", "else", "while", "do", "true", "false",
     "Merge", "MixFst", "MixSnd", "Once", "MakForwRule", "MakeRule", "bind", "packet", "_"}
    | set(QUERY_NAMES) | set(LAMBDA_TRANSFORMERS) | set(CONST_WORDS) | set(BUILTINS)
)

CMP_OPS = ("==", "!=", "<", "<=", ">", ">=")


class _Bracket:
    """``[ ... ]`` before we know whether it is an action sequence or a rule list."""

    def __init__(self, items):
        self.items = tuple(items)


class Parser:
    def __init__(self, text: str, bound: Optional[Iterable[str]] = None):
        self.toks = tokenize(text)
        self.i = 0
        self.bound = None if bound is None else set(bound)

    # -- token helpers

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def error(self, msg: str, tok: Optional[Token] = None):
        tok = tok or self.tok
        found = repr(tok.text) if tok.kind != "eof" else "end of input"
        raise ParseError(f"{msg} (found {found} at token {tok.index})", tok.line, tok.column,
                         tok.index)

    def at(self, text: str) -> bool:
        return self.tok.text == text and self.tok.kind in ("sym", "ident")

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.error(f"expected {text!r}")
        t = self.tok
        self.i += 1
        return t

    def ident(self, what: str = "identifier") -> str:
        if self.tok.kind != "ident":
            self.error(f"expected {what}")
        t = self.tok
        self.i += 1
        return t.text

    def var(self, reading: bool = True) -> str:
        tok = self.tok
        name = self.ident("variable name")
        if name in KEYWORDS:
            self.error(f"{name!r} is reserved and cannot name a variable", tok)
        if reading and self.bound is not None and name not in self.bound:
            raise UnboundVariableError(name, f"line {tok.line}, column {tok.column}")
        return name

    def integer(self) -> int:
        if self.tok.kind != "int":
            self.error("expected integer")
        n = int(self.tok.text)
        self.i += 1
        return n

    # -- programs

    def program(self) -> A.Program:
        defs = []
        if (self.tok.kind == "ident" and self.peek().text == "=") or self.at(">>"):
            while not self.at(">>"):
                tok = self.tok
                name = self.var(reading=False)
                if any(name == n for n, _ in defs):
                    self.error(f"variable {name!r} defined twice", tok)
                self.expect("=")
                defs.append((name, self.query()))
                self.expect(";")
            self.expect(">>")
        if self.bound is not None:
            self.bound |= {n for n, _ in defs}
        body = self.stmts(stop=None)
        if self.tok.kind != "eof":
            self.error("expected statement")
        return A.Program(tuple(defs), body)

    def stmts(self, stop) -> A.Stmt:
        out = [self.stmt()]
        while not (self.tok.kind == "eof" or (stop and self.at(stop))):
            out.append(self.stmt())
        return A.seq(*out)

    def stmt(self) -> A.Stmt:
        t = self.tok
        if t.kind != "ident":
            self.error("expected statement")
        if t.text == "AddRules":
            self.i += 1
            self.expect("(")
            v = self.var()
            self.expect(")")
            self.expect(";")
            return A.AddRules(v)
        if t.text == "Send":
            self.i += 1
            self.expect("(")
            v = self.var()
            self.expect(")")
            self.expect(";")
            return A.Send(v)
        if t.text == "Register":
            self.i += 1
            self.expect(";")
            return A.Register()
        if t.text == "if":
            self.i += 1
            self.expect("(")
            v = self.var()
            self.expect(")")
            self.expect("then")
            self.expect("{")
            then = self.stmts("}")
            self.expect("}")
            self.expect("else")
            self.expect("{")
            else_ = self.stmts("}")
            self.expect("}")
            return A.If(v, then, else_)
        if t.text == "while":
            self.i += 1
            self.expect("(")
            v = self.var()
            self.expect(")")
            self.expect("do")
            self.expect("{")
            body = self.stmts("}")
            self.expect("}")
            return A.While(v, body)
        name = self.var(reading=False)
        self.expect(":=")
        et = self.transformer()
        self.expect(";")
        if self.bound is not None:
            self.bound.add(name)
        return A.Assign(name, et)

    def query(self):
        name = self.ident("query")
        if name == "Switches":
            return Switches()
        if name == "SourceIps":
            return SourceIps()
        if name == "ProhibtedIps":
            return ProhibtedIps()
        if name == "Packets":
            self.expect("(")
            tok = self.tok
            p = self.value()
            if not isinstance(p, PATTERN_TYPES):
                self.error("Packets expects a pattern", tok)
            self.expect(")")
            return Packets(p)
        self.i -= 1
        self.error("expected query")

    def transformer(self) -> A.EventTransformer:
        t = self.tok
        if t.kind == "int":
            return A.IntLit(self.integer())
        if t.kind != "ident":
            self.error("expected event transformer")
        name = t.text
        if name in QUERY_NAMES:
            return A.Ask(self.query())
        self.i += 1
        self.expect("(")
        if name in LAMBDA_TRANSFORMERS:
            v = self.var()
            self.expect(",")
            fn = self.lam()
            out = LAMBDA_TRANSFORMERS[name](v, fn)
        elif name == "Merge":
            a = self.var()
            self.expect(",")
            out = A.Merge(a, self.var())
        elif name == "MixFst":
            acts = self.actset()
            self.expect(",")
            a = self.var()
            self.expect(",")
            out = A.MixFst(acts, a, self.var())
        elif name == "MixSnd":
            a = self.var()
            self.expect(",")
            acts = self.actset()
            self.expect(",")
            out = A.MixSnd(a, acts, self.var())
        elif name == "Once":
            v = self.var()
            self.expect(",")
            tok = self.tok
            n = self.integer()
            if n < 1:
                self.error("Once needs a positive count", tok)
            out = A.Once(v, n)
        elif name == "MakForwRule":
            out = A.MakForwRule(self.var())
        elif name == "MakeRule":
            out = A.MakeRule(self.var())
        else:
            self.i -= 2
            self.error("expected event transformer")
        self.expect(")")
        return out

    def actset(self) -> ActionSet:
        tok = self.tok
        v = self.value()
        if not isinstance(v, ActionSet):
            self.error("expected action set {...}", tok)
        return v

    # -- lambdas

    def lam(self) -> A.Lambda:
        self.expect("\\")
        tok = self.tok
        param = self.ident("lambda parameter")
        if param in KEYWORDS:
            self.error(f"{param!r} is reserved", tok)
        self.expect(".")
        saved = self.bound
        if saved is not None:
            self.bound = saved | {param}
        body = self.expr(param)
        self.bound = saved
        return A.Lambda(param, body)

    def expr(self, param):
        left = self.additive(param)
        if self.tok.kind == "sym" and self.tok.text in CMP_OPS:
            op = self.tok.text
            self.i += 1
            left = A.BinExpr(op, left, self.additive(param))
        return left

    def additive(self, param):
        left = self.multiplicative(param)
        while self.tok.kind == "sym" and self.tok.text in ("+", "-"):
            op = self.tok.text
            self.i += 1
            left = A.BinExpr(op, left, self.multiplicative(param))
        return left

    def multiplicative(self, param):
        left = self.atom(param)
        while self.at("*"):
            self.i += 1
            left = A.BinExpr("*", left, self.atom(param))
        return left

    def atom(self, param):
        t = self.tok
        if t.kind == "int":
            return A.Const(Int(self.integer()))
        if self.at("("):
            self.i += 1
            items = [self.expr(param)]
            while self.at(","):
                self.i += 1
                items.append(self.expr(param))
            self.expect(")")
            return items[0] if len(items) == 1 else A.TupleExpr(tuple(items))
        if t.kind != "ident":
            self.error("expected expression")
        if t.text == "_":
            self.i += 1
            return A.Const(WILDCARD)
        if t.text in CONST_WORDS:
            self.i += 1
            return A.Const(CONST_WORDS[t.text])
        if t.text in BUILTINS:
            return self.call(param)
        if t.text == param:
            self.i += 1
            return A.Name(param)
        return A.Name(self.var())

    def call(self, param):
        t = self.tok
        fn = t.text
        self.i += 1
        self.expect("(")
        args = []
        for k in range(BUILTINS[fn]):
            if k:
                self.expect(",")
            if VAR_SLOTS.get(fn) == k:
                args.append(A.Name(self.var()))
            elif fn == "change" and k == 0:
                ftok = self.tok
                field = self.ident("header field")
                if field not in HEADER_FIELDS:
                    self.error(f"unknown header field {field!r}", ftok)
                args.append(A.Name(field))
            else:
                args.append(self.expr(param))
        self.expect(")")
        return A.Call(fn, tuple(args))

    # -- value literals

    def value(self):
        v = self._value()
        if isinstance(v, _Bracket):
            return self._rule_list(v)
        return v

    def _rule_list(self, br: _Bracket) -> RuleList:
        for item in br.items:
            ok = isinstance(item, Rule) or (
                isinstance(item, Tuple) and len(item) == 2 and isinstance(item[0], SwitchId)
                and isinstance(item[1], Rule))
            if not ok:
                self.error("rule lists hold rules or (switch, rule) pairs")
        return RuleList(br.items)

    def _value(self):
        t = self.tok
        if t.kind == "int":
            return Int(self.integer())
        if t.kind == "ip":
            self.i += 1
            try:
                return IpAddr.parse(t.text)
            except ValueError:
                self.error("bad IP address", t)
        if self.at("("):
            self.i += 1
            items = [self._value()]
            while self.at(","):
                self.i += 1
                items.append(self._value())
            self.expect(")")
            if len(items) == 1:
                return self._finish(items[0])
            if (len(items) == 2 and isinstance(items[0], PATTERN_TYPES)
                    and isinstance(items[1], _Bracket)):
                acts = items[1].items
                if acts and all(isinstance(a, ACTION_TYPES) for a in acts):
                    return Rule(items[0], acts)
            return Tuple(tuple(self._finish(x) for x in items))
        if self.at("["):
            self.i += 1
            items = []
            if not self.at("]"):
                items.append(self._value())
                while self.at(","):
                    self.i += 1
                    items.append(self._value())
            self.expect("]")
            return _Bracket(self._finish(x) if not isinstance(x, _Bracket) else x for x in items)
        if self.at("{"):
            self.i += 1
            items = []
            if not self.at("}"):
                items.append(self.value())
                while self.at(","):
                    self.i += 1
                    items.append(self.value())
            self.expect("}")
            return ActionSet(frozenset(items))
        if t.kind != "ident":
            self.error("expected value")
        word = t.text
        self.i += 1
        if word == "_":
            return WILDCARD
        if word in ("true", "false"):
            return Bool(word == "true")
        if word in CONST_WORDS:
            return CONST_WORDS[word]
        if word in PATTERN_CTORS:
            self.expect("(")
            arg = self.tok
            if word in ("srcip", "dstip"):
                a = self._value()
                if not isinstance(a, IpAddr):
                    self.error("expected IP address", arg)
                out = PATTERN_CTORS[word](a)
            else:
                out = PATTERN_CTORS[word](self.integer())
            self.expect(")")
            return out
        if word == "sendout":
            self.expect("(")
            n = self.integer()
            self.expect(")")
            return SendOut(n)
        if word == "port":
            self.expect("(")
            n = self.integer()
            self.expect(")")
            return Port(n)
        if word == "change":
            self.expect("(")
            ftok = self.tok
            field = self.ident("header field")
            if field not in HEADER_FIELDS:
                self.error(f"unknown header field {field!r}", ftok)
            self.expect(",")
            v = self.value()
            self.expect(")")
            return Change(field, v)
        if word == "packet":
            return self._packet()
        if word in KEYWORDS:
            self.error(f"{word!r} is not a value", t)
        return SwitchId(word)

    def _finish(self, v):
        return self._rule_list(v) if isinstance(v, _Bracket) else v

    def _packet(self) -> Packet:
        self.expect("(")
        tag = self.ident("packet tag")
        fields = {}
        while self.at(","):
            self.i += 1
            ftok = self.tok
            key = self.ident("header field")
            if key not in HEADER_FIELDS or key in fields:
                self.error(f"bad packet field {key!r}", ftok)
            self.expect("=")
            fields[key] = self._value()
        self.expect(")")
        if set(fields) != set(HEADER_FIELDS):
            self.error(f"packet needs fields {', '.join(HEADER_FIELDS)}")
        try:
            return Packet(fields["srcip"], fields["dstip"], fields["srcport"].n,
                          fields["dstport"].n, fields["inport"].n, tag)
        except (AttributeError, TypeError, ValueError):
            self.error("ill-typed packet fields")

    def bound_value(self):
        """An event literal ``( ... )`` or a rule list ``[ ... ]``."""
        if self.at("["):
            return self.value()
        self.expect("(")
        items = []
        if not self.at(")"):
            items.append(self.value())
            while self.at(","):
                self.i += 1
                items.append(self.value())
        self.expect(")")
        return Event(items)


def parse_program(text: str, initial: Optional[Iterable[str]] = None) -> A.Program:
    """Parse program text.

    When ``initial`` is given, every variable read must be defined by a query,
    listed in ``initial``, or assigned by an earlier statement.
    """
    return Parser(text, initial).program()


def parse_stmt(text: str) -> A.Stmt:
    p = Parser(text)
    s = p.stmts(stop=None)
    return s


def parse_lambda(text: str) -> A.Lambda:
    p = Parser(text)
    fn = p.lam()
    if p.tok.kind != "eof":
        p.error("trailing input after lambda")
    return fn


def parse_value(text: str):
    p = Parser(text)
    v = p.value()
    if p.tok.kind != "eof":
        p.error("trailing input after value")
    return v


def parse_bindings(text: str) -> dict:
    """Parse ``bind <var> = <event literal>`` lines into a variable store."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            p = Parser(line)
            if not p.at("bind"):
                p.error("expected 'bind <var> = <event>'")
            p.i += 1
            name = p.var(reading=False)
            p.expect("=")
            out[name] = p.bound_value()
            if p.tok.kind != "eof":
                p.error("trailing input")
        except ParseError as exc:
            raise ParseError(exc.message, lineno, exc.column, exc.token) from None
        except Exception as exc:  # ill-formed values: heterogeneous events, bad ports
            raise ParseError(str(exc), lineno, 1) from None
    return out


def load_bindings(path) -> dict:
    return parse_bindings(Path(path).read_text(encoding="utf-8"))
