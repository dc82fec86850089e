"""Runtime values, events, rules, flow tables and the evaluator state.

Every value is a frozen dataclass, so values compare and hash structurally
and can be shared freely between states. Containers held by a
:class:`NetState` (dicts, tuples) are never mutated after construction; the
evaluators build new ones instead.
"""

from __future__ import annotations

import ipaddress
import re
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Union

from .errors import ShapeError

__all__ = [
    "Int", "Bool", "SwitchId", "Port", "IpAddr", "Packet", "Wildcard", "WILDCARD",
    "Tuple", "Rule", "RuleList", "ActionSet",
    "SendController", "SendAll", "SendOut", "Change", "Drop",
    "InPort", "SrcPort", "DstPort", "SrcIp", "DstIp", "MatchAll", "Exact",
    "Prim", "Pair", "Triple", "Type", "Event", "NetState",
    "type_of", "pattern_matches", "merge_flow_tables", "add_rule_assignments",
    "as_rule_assignment", "truthy", "format_value", "switch_sort_key",
    "HEADER_FIELDS",
]


# -- scalar values -------------------------------------------------------------


@dataclass(frozen=True)
class Int:
    n: int


@dataclass(frozen=True)
class Bool:
    b: bool


@dataclass(frozen=True)
class SwitchId:
    name: str


@dataclass(frozen=True)
class Port:
    n: int

    def __post_init__(self):
        if self.n < 0:
            raise ValueError(f"negative port {self.n}")


@dataclass(frozen=True)
class IpAddr:
    addr: ipaddress.IPv4Address

    @classmethod
    def parse(cls, text: str) -> "IpAddr":
        return cls(ipaddress.IPv4Address(text))


@dataclass(frozen=True)
class Wildcard:
    pass


WILDCARD = Wildcard()

HEADER_FIELDS = ("srcip", "dstip", "srcport", "dstport", "inport")


@dataclass(frozen=True)
class Packet:
    srcip: IpAddr
    dstip: IpAddr
    srcport: int
    dstport: int
    inport: int
    tag: str = ""

    def __post_init__(self):
        for name in ("srcport", "dstport", "inport"):
            if getattr(self, name) < 0:
                raise ValueError(f"packet field {name} must be non-negative")


# -- actions -------------------------------------------------------------------


@dataclass(frozen=True)
class SendController:
    pass


@dataclass(frozen=True)
class SendAll:
    pass


@dataclass(frozen=True)
class SendOut:
    port: int


@dataclass(frozen=True)
class Change:
    field: str
    value: "Value"

    def __post_init__(self):
        if self.field not in HEADER_FIELDS:
            raise ValueError(f"change: unknown header field {self.field!r}")


@dataclass(frozen=True)
class Drop:
    """Discard the packet. Used for firewall (prohibition) rules and table misses."""


Action = Union[SendController, SendAll, SendOut, Change, Drop]
ACTION_TYPES = (SendController, SendAll, SendOut, Change, Drop)


# -- patterns ------------------------------------------------------------------


@dataclass(frozen=True)
class InPort:
    n: int


@dataclass(frozen=True)
class SrcPort:
    n: int


@dataclass(frozen=True)
class DstPort:
    n: int


@dataclass(frozen=True)
class SrcIp:
    addr: IpAddr


@dataclass(frozen=True)
class DstIp:
    addr: IpAddr


@dataclass(frozen=True)
class MatchAll:
    pass


@dataclass(frozen=True)
class Exact:
    """Matches packets whose header fields all equal those of ``packet``."""

    packet: Packet


Pattern = Union[InPort, SrcPort, DstPort, SrcIp, DstIp, MatchAll, Exact]
PATTERN_TYPES = (InPort, SrcPort, DstPort, SrcIp, DstIp, MatchAll, Exact)


# -- compound values -----------------------------------------------------------


@dataclass(frozen=True)
class Tuple:
    items: tuple

    def __post_init__(self):
        if len(self.items) < 2:
            raise ValueError("tuples hold at least two values")

    def __len__(self):
        return len(self.items)

    def __getitem__(self, i):
        return self.items[i]


@dataclass(frozen=True)
class Rule:
    pattern: Pattern
    actions: tuple

    def __post_init__(self):
        if not self.actions:
            raise ValueError("a rule needs at least one action")


@dataclass(frozen=True)
class RuleList:
    """Ordered rules, or ordered ``(switch, rule)`` assignments."""

    items: tuple = ()

    def __len__(self):
        return len(self.items)

    def __iter__(self):
        return iter(self.items)


@dataclass(frozen=True)
class ActionSet:
    members: frozenset = frozenset()

    def union(self, *values) -> "ActionSet":
        return ActionSet(self.members | frozenset(values))


Value = Union[
    Int, Bool, SwitchId, Port, IpAddr, Packet, Wildcard, Tuple, Rule, RuleList,
    ActionSet, Action, Pattern,
]


# -- types ---------------------------------------------------------------------


@dataclass(frozen=True)
class Prim:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Pair:
    left: "Type"
    right: "Type"

    def __str__(self):
        return f"({self.left}, {self.right})"


@dataclass(frozen=True)
class Triple:
    """The ``(switch id, int, bool)`` base type."""

    def __str__(self):
        return "(switch, int, bool)"


Type = Union[Prim, Pair, Triple]

INT = Prim("int")
BOOL = Prim("bool")
SWITCH = Prim("switch")
PORT = Prim("port")
IP = Prim("ip")
PACKET = Prim("packet")
WILD = Prim("_")
PATTERN = Prim("pattern")
ACTION = Prim("action")
RULE = Prim("rule")
RULE_LIST = Prim("rulelist")
ACTION_SET = Prim("actionset")

_PRIM_OF = {
    Int: INT, Bool: BOOL, SwitchId: SWITCH, Port: PORT, IpAddr: IP, Packet: PACKET,
    Wildcard: WILD, Rule: RULE, RuleList: RULE_LIST, ActionSet: ACTION_SET,
}
_PRIM_OF.update({cls: ACTION for cls in ACTION_TYPES})
_PRIM_OF.update({cls: PATTERN for cls in PATTERN_TYPES})


def type_of(v: Value) -> Type:
    """Return the unique type of ``v``.

    Pairs are the only recursive type. A ``(switch, int, bool)`` tuple has the
    dedicated triple type; any other longer tuple is typed as right-nested pairs.
    """
    if isinstance(v, Tuple):
        items = v.items
        if len(items) == 3 and isinstance(items[0], SwitchId) and isinstance(items[1], Int) \
                and isinstance(items[2], Bool):
            return Triple()
        if len(items) == 2:
            return Pair(type_of(items[0]), type_of(items[1]))
        return Pair(type_of(items[0]), type_of(Tuple(items[1:])))
    try:
        return _PRIM_OF[type(v)]
    except KeyError:
        raise TypeError(f"not a value: {v!r}") from None


# -- events --------------------------------------------------------------------


class Event:
    """A finite, ordered, type-homogeneous sequence of values."""

    __slots__ = ("items", "item_type")

    def __init__(self, items: Iterable[Value] = ()):
        items = tuple(items)
        item_type = None
        for v in items:
            t = type_of(v)
            if item_type is None:
                item_type = t
            elif t != item_type:
                raise ShapeError(
                    f"event mixes values of type {item_type} and {t}: {format_value(v)}"
                )
        self.items = items
        self.item_type = item_type

    def __len__(self):
        return len(self.items)

    def __iter__(self):
        return iter(self.items)

    def __getitem__(self, i):
        return self.items[i]

    def __eq__(self, other):
        return isinstance(other, Event) and self.items == other.items

    def __hash__(self):
        return hash(("event", self.items))

    def __repr__(self):
        return f"Event({list(self.items)!r})"


Bound = Union[Event, RuleList]


def truthy(v: Bound) -> bool:
    """Branch condition: a singleton integer event tests non-zero, anything else non-empty."""
    if isinstance(v, Event) and len(v) == 1 and isinstance(v[0], Int):
        return v[0].n != 0
    return len(v) > 0


# -- patterns against packets --------------------------------------------------


def pattern_matches(p: Pattern, pk: Packet) -> bool:
    if isinstance(p, MatchAll):
        return True
    if isinstance(p, InPort):
        return pk.inport == p.n
    if isinstance(p, SrcPort):
        return pk.srcport == p.n
    if isinstance(p, DstPort):
        return pk.dstport == p.n
    if isinstance(p, SrcIp):
        return pk.srcip == p.addr
    if isinstance(p, DstIp):
        return pk.dstip == p.addr
    if isinstance(p, Exact):
        q = p.packet
        return all(getattr(q, f) == getattr(pk, f) for f in HEADER_FIELDS)
    raise TypeError(f"not a pattern: {p!r}")


# -- flow tables and the initial rule reservoir --------------------------------

_DIGITS = re.compile(r"(\d+)")


def switch_sort_key(sw: SwitchId):
    """Natural order on switch names, so id2 sorts before id10."""
    return tuple(int(part) if part.isdigit() else part for part in _DIGITS.split(sw.name))


def merge_flow_tables(sigma: Mapping[SwitchId, tuple], ir: Iterable[tuple]) -> dict:
    """Append every staged ``(switch, rule)`` pair to that switch's table.

    Pairs are taken in switch-name order and, within one switch, in the order
    they were staged. Duplicate pairs in ``ir`` are appended once.
    """
    out = dict(sigma)
    seen = set()
    staged = []
    for entry in ir:
        if entry not in seen:
            seen.add(entry)
            staged.append(entry)
    for sw, rule in sorted(staged, key=lambda e: switch_sort_key(e[0])):
        out[sw] = out.get(sw, ()) + (rule,)
    return out


def add_rule_assignments(ir: tuple, entries: Iterable[tuple]) -> tuple:
    """Set union that remembers first insertion order."""
    out = list(ir)
    seen = set(ir)
    for e in entries:
        if e not in seen:
            seen.add(e)
            out.append(e)
    return tuple(out)


def as_rule_assignment(bound: Bound) -> list:
    """Flatten an AddRules operand into ``(switch, rule)`` pairs.

    Accepted items are ``(switch, rule)`` and ``(switch, rule list)``.
    """
    entries = []
    for item in bound:
        if not (isinstance(item, Tuple) and len(item) == 2 and isinstance(item[0], SwitchId)):
            raise ShapeError(f"AddRules: expected (switch, rules), got {format_value(item)}")
        sw, payload = item.items
        if isinstance(payload, Rule):
            entries.append((sw, payload))
        elif isinstance(payload, RuleList):
            for r in payload:
                if not isinstance(r, Rule):
                    raise ShapeError(f"AddRules: rule list holds non-rule {format_value(r)}")
                entries.append((sw, r))
        else:
            raise ShapeError(f"AddRules: expected a rule for {sw.name}, got {format_value(payload)}")
    return entries


# -- state ---------------------------------------------------------------------


@dataclass(frozen=True)
class NetState:
    """Flow tables, variable store, staged rules and per-switch history."""

    sigma: dict = field(default_factory=dict)
    gamma: dict = field(default_factory=dict)
    ir: tuple = ()
    hist: dict = field(default_factory=dict)

    def replace(self, **changes) -> "NetState":
        return replace(self, **changes)

    def table(self, sw: SwitchId) -> tuple:
        return self.sigma.get(sw, ())


# -- printing ------------------------------------------------------------------

_ACTION_WORDS = {SendController: "sendcontroller", SendAll: "sendall", Drop: "drop"}
_PATTERN_WORDS = {InPort: "inport", SrcPort: "srcport", DstPort: "dstport",
                  SrcIp: "srcip", DstIp: "dstip"}


def format_packet(pk: Packet) -> str:
    return (f"packet({pk.tag or 'pk'}, srcip={pk.srcip.addr}, dstip={pk.dstip.addr}, "
            f"srcport={pk.srcport}, dstport={pk.dstport}, inport={pk.inport})")


def format_value(v, full_packets: bool = False) -> str:
    """Render a value (or bound event) in the tuple notation used by traces and bindings."""
    fv = lambda x: format_value(x, full_packets)  # noqa: E731
    if isinstance(v, Event):
        return "(" + ", ".join(fv(x) for x in v) + ")"
    if isinstance(v, Int):
        return str(v.n)
    if isinstance(v, Bool):
        return "true" if v.b else "false"
    if isinstance(v, SwitchId):
        return v.name
    if isinstance(v, Port):
        return f"port({v.n})"
    if isinstance(v, IpAddr):
        return str(v.addr)
    if isinstance(v, Packet):
        return format_packet(v) if full_packets or not v.tag else v.tag
    if isinstance(v, Wildcard):
        return "_"
    if isinstance(v, Tuple):
        return "(" + ", ".join(fv(x) for x in v.items) + ")"
    if isinstance(v, Rule):
        return f"({fv(v.pattern)}, [" + ", ".join(fv(a) for a in v.actions) + "])"
    if isinstance(v, RuleList):
        return "[" + ", ".join(fv(x) for x in v.items) + "]"
    if isinstance(v, ActionSet):
        return "{" + ", ".join(sorted(fv(x) for x in v.members)) + "}"
    if type(v) in _ACTION_WORDS:
        return _ACTION_WORDS[type(v)]
    if isinstance(v, SendOut):
        return f"sendout({v.port})"
    if isinstance(v, Change):
        return f"change({v.field}, {fv(v.value)})"
    if isinstance(v, MatchAll):
        return "matchall"
    if isinstance(v, Exact):
        return fv(v.packet)
    if type(v) in _PATTERN_WORDS:
        arg = v.addr.addr if isinstance(v, (SrcIp, DstIp)) else v.n
        return f"{_PATTERN_WORDS[type(v)]}({arg})"
    raise TypeError(f"cannot format {v!r}")
