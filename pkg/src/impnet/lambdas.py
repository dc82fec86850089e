"""Evaluation of lambda bodies.

Lambda bodies are a closed, loop-free expression language, so evaluation
always terminates; an ill-typed application raises :class:`ShapeError`.
Builtins that consult the network (``switch``, ``port``) only read it.
"""

from __future__ import annotations

from typing import Mapping

from .errors import ShapeError, UnboundVariableError
from .netsim import Network
from .syntax import ast as A
from .values import (
    Change, Drop, DstIp, DstPort, Event, InPort, Int, IpAddr, Packet, Port, RuleList, SendOut,
    SrcIp, SrcPort, SwitchId, Tuple, format_value,
)

_HEADER_PATTERNS = {"srcip": SrcIp, "dstip": DstIp, "srcport": SrcPort, "dstport": DstPort,
                    "inport": InPort}


def lookup(gamma: Mapping, name: str):
    try:
        return gamma[name]
    except KeyError:
        raise UnboundVariableError(name) from None


def apply_lambda(fn: A.Lambda, arg, gamma: Mapping, net: Network):
    return _eval(fn.body, fn.param, arg, gamma, net)


def _eval(e, param, arg, gamma, net):
    if isinstance(e, A.Const):
        return e.value
    if isinstance(e, A.Name):
        if e.ident == param:
            return arg
        return _as_value(e.ident, lookup(gamma, e.ident))
    if isinstance(e, A.TupleExpr):
        return Tuple(tuple(_eval(x, param, arg, gamma, net) for x in e.items))
    if isinstance(e, A.BinExpr):
        return _binop(e.op, _eval(e.left, param, arg, gamma, net),
                      _eval(e.right, param, arg, gamma, net))
    if isinstance(e, A.Call):
        return _call(e, param, arg, gamma, net)
    raise TypeError(f"not an expression: {e!r}")


def _as_value(name, bound):
    if isinstance(bound, RuleList):
        return bound
    if isinstance(bound, Event) and len(bound) == 1:
        return bound[0]
    raise ShapeError(f"variable {name!r} holds an event of length {len(bound)}, not a value")


def _binop(op, a, b):
    if op == "==":
        return Int(int(a == b))
    if op == "!=":
        return Int(int(a != b))
    if not (isinstance(a, (Int, Port)) and type(a) is type(b)):
        raise ShapeError(f"operator {op} needs two integers, got {format_value(a)} and {format_value(b)}")
    x, y = a.n, b.n
    if op == "<":
        return Int(int(x < y))
    if op == "<=":
        return Int(int(x <= y))
    if op == ">":
        return Int(int(x > y))
    if op == ">=":
        return Int(int(x >= y))
    if not isinstance(a, Int):
        raise ShapeError(f"operator {op} is not defined on ports")
    if op == "+":
        return Int(x + y)
    if op == "-":
        return Int(x - y)
    if op == "*":
        return Int(x * y)
    raise ShapeError(f"unknown operator {op}")


def _call(e: A.Call, param, arg, gamma, net):
    fn = e.fn
    if fn in ("switch", "prohibit"):
        x = _eval(e.args[0], param, arg, gamma, net)
        target = e.args[1].ident
        switches = lookup(gamma, target)
        if fn == "prohibit":
            return Drop()
        return pick_switch(x, target, switches, net)
    if fn == "change":
        v = _eval(e.args[1], param, arg, gamma, net)
        return make_change(e.args[0].ident, v)
    x = _eval(e.args[0], param, arg, gamma, net)
    if fn in ("fst", "snd", "thd"):
        i = ("fst", "snd", "thd").index(fn)
        if not isinstance(x, Tuple) or len(x) <= i:
            raise ShapeError(f"{fn}: {format_value(x)} has no component {i + 1}")
        return x[i]
    if fn == "port":
        return port_of(x, net)
    if fn == "sendout":
        if isinstance(x, (Int, Port)) and x.n >= 0:
            return SendOut(x.n)
        raise ShapeError(f"sendout: {format_value(x)} is not a port")
    if fn in _HEADER_PATTERNS:
        return header(fn, x)
    raise ShapeError(f"unknown builtin {fn}")


def header(field: str, x):
    """Read a header field from a packet, or build the pattern matching on ``x``."""
    if isinstance(x, Packet):
        v = getattr(x, field)
        return v if isinstance(v, IpAddr) else Int(v)
    ip_field = field in ("srcip", "dstip")
    if ip_field and isinstance(x, IpAddr):
        return _HEADER_PATTERNS[field](x)
    if not ip_field and isinstance(x, (Int, Port)) and x.n >= 0:
        return _HEADER_PATTERNS[field](x.n)
    raise ShapeError(f"{field}: cannot apply to {format_value(x)}")


def make_change(field: str, v):
    if field in ("srcip", "dstip"):
        ok = isinstance(v, IpAddr)
    else:
        ok = isinstance(v, (Int, Port)) and v.n >= 0
    if not ok:
        raise ShapeError(f"change({field}, ...): bad value {format_value(v)}")
    return Change(field, v)


def _packet_in(x):
    if isinstance(x, Packet):
        return x
    if isinstance(x, Tuple):
        for item in x.items:
            if isinstance(item, Packet):
                return item
    return None


def pick_switch(x, target: str, switches, net: Network) -> SwitchId:
    """The switch of ``switches`` responsible for ``x``.

    A packet (or a tuple carrying one) belongs to the switch it arrived at,
    which must be listed. IPs and integers are spread over the list by value.
    """
    if not isinstance(switches, Event) or not switches.items or \
            not all(isinstance(s, SwitchId) for s in switches):
        raise ShapeError(f"switch(_, {target}): {target} is not a non-empty event of switches")
    pk = _packet_in(x)
    if pk is not None:
        sw = net.ingress_of(pk)
        if sw is None or sw not in switches.items:
            raise ShapeError(f"switch: ingress of {format_value(pk)} is not in {target}")
        return sw
    if isinstance(x, IpAddr):
        key = int(x.addr)
    elif isinstance(x, (Int, Port)):
        key = x.n
    else:
        raise ShapeError(f"switch: cannot place {format_value(x)}")
    return switches[key % len(switches)]


def port_of(x, net: Network) -> Port:
    """Port behind which ``x`` sits: a packet's in-port, or that of the first packet from an IP."""
    if isinstance(x, Packet):
        return Port(x.inport)
    if isinstance(x, IpAddr):
        for _, pk in net.pending:
            if pk.srcip == x:
                return Port(pk.inport)
        return Port(0)
    if isinstance(x, Port):
        return x
    if isinstance(x, Int) and x.n >= 0:
        return Port(x.n)
    raise ShapeError(f"port: cannot apply to {format_value(x)}")
