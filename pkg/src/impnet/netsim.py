"""Simulated switch network: topology, pending arrivals, queries and packet processing."""

from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Mapping, Union

from .errors import ShapeError, TopologyError
from .values import (
    Change, Drop, Event, HEADER_FIELDS, Int, IpAddr, Packet, Pattern, Port, SendAll,
    SendController, SendOut, SwitchId, Tuple, pattern_matches,
)


# -- queries -------------------------------------------------------------------


@dataclass(frozen=True)
class Switches:
    pass


@dataclass(frozen=True)
class SourceIps:
    pass


@dataclass(frozen=True)
class ProhibtedIps:
    pass


@dataclass(frozen=True)
class Packets:
    pattern: Pattern


Query = Union[Switches, SourceIps, ProhibtedIps, Packets]


# -- network -------------------------------------------------------------------


@dataclass(frozen=True)
class Network:
    """Declared switches (in order) with port counts, links, arrivals and prohibited IPs.

    ``links`` maps each ``(switch, port)`` endpoint to its peer; every link is
    stored in both directions.
    """

    switches: tuple = ()
    links: Mapping = field(default_factory=dict)
    pending: tuple = ()
    prohibited_ips: tuple = ()

    def __post_init__(self):
        ports = dict(self.switches)
        if len(ports) != len(self.switches):
            raise TopologyError("duplicate switch declaration")
        for (sw, port), (peer, pport) in self.links.items():
            for s, p in ((sw, port), (peer, pport)):
                if s not in ports:
                    raise TopologyError(f"link references undeclared switch {s.name}")
                if not 1 <= p <= ports[s]:
                    raise TopologyError(f"port {p} out of range on switch {s.name}")
            if self.links.get((peer, pport)) != (sw, port):
                raise TopologyError(f"link {sw.name}:{port} is not symmetric")
        for sw, _ in self.pending:
            if sw not in ports:
                raise TopologyError(f"packet arrives at undeclared switch {sw.name}")

    @property
    def switch_ids(self) -> tuple:
        return tuple(sw for sw, _ in self.switches)

    def has_switch(self, sw: SwitchId) -> bool:
        return any(s == sw for s, _ in self.switches)

    def ingress_of(self, pk: Packet):
        for sw, p in self.pending:
            if p == pk:
                return sw
        return None


def make_network(switches, links=(), pending=(), prohibited=()) -> Network:
    """Convenience constructor taking plain names; links are given one way."""
    sws = tuple((SwitchId(n), ports) for n, ports in switches)
    table = {}
    for (a, pa), (b, pb) in links:
        for end in ((SwitchId(a), pa), (SwitchId(b), pb)):
            if end in table:
                raise TopologyError(f"port {end[0].name}:{end[1]} linked twice")
        table[(SwitchId(a), pa)] = (SwitchId(b), pb)
        table[(SwitchId(b), pb)] = (SwitchId(a), pa)
    pend = tuple((SwitchId(sw), pk) for sw, pk in pending)
    ips = tuple(ip if isinstance(ip, IpAddr) else IpAddr.parse(ip) for ip in prohibited)
    return Network(sws, table, pend, ips)


_ENDPOINT = re.compile(r"^([^\s:]+):(\d+)$")


def parse_topology(text: str) -> Network:
    """Parse the line-oriented topology format (``switch``, ``link``, ``packet``, ``prohibited``)."""
    switches, links, pending, prohibited = [], [], [], []
    count = 0
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        words = line.split()
        kind, args = words[0], words[1:]
        try:
            if kind == "switch":
                if len(args) != 3 or args[1] != "ports":
                    raise ValueError("expected: switch <id> ports <n>")
                switches.append((args[0], int(args[2])))
            elif kind == "link":
                if len(args) != 2:
                    raise ValueError("expected: link <id>:<port> <id>:<port>")
                ends = []
                for a in args:
                    m = _ENDPOINT.match(a)
                    if not m:
                        raise ValueError(f"bad endpoint {a!r}")
                    ends.append((m.group(1), int(m.group(2))))
                links.append(tuple(ends))
            elif kind == "packet":
                if not args:
                    raise ValueError("expected: packet <switch> key=value ...")
                count += 1
                fields = dict(kv.split("=", 1) for kv in args[1:])
                required = set(HEADER_FIELDS)
                if not required <= fields.keys() or not fields.keys() <= required | {"tag"}:
                    raise ValueError(f"packet needs exactly the fields {', '.join(HEADER_FIELDS)} (and optional tag)")
                pk = Packet(
                    srcip=IpAddr.parse(fields["srcip"]),
                    dstip=IpAddr.parse(fields["dstip"]),
                    srcport=int(fields["srcport"]),
                    dstport=int(fields["dstport"]),
                    inport=int(fields["inport"]),
                    tag=fields.get("tag", f"pk{count}"),
                )
                pending.append((args[0], pk))
            elif kind == "prohibited":
                if len(args) != 1:
                    raise ValueError("expected: prohibited <ip>")
                prohibited.append(IpAddr.parse(args[0]))
            else:
                raise ValueError(f"unknown directive {kind!r}")
        except TopologyError as exc:
            raise TopologyError(f"line {lineno}: {exc}") from None
        except ValueError as exc:
            raise TopologyError(f"line {lineno}: {exc}") from None
    tags = [pk.tag for _, pk in pending]
    if len(set(tags)) != len(tags):
        raise TopologyError("duplicate packet tag")
    return make_network(switches, links, pending, prohibited)


def load_topology(path) -> Network:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise TopologyError(f"cannot read topology {path}: {exc}") from None
    return parse_topology(text)


def format_topology(net: Network) -> str:
    lines = [f"switch {sw.name} ports {n}" for sw, n in net.switches]
    done = set()
    for (a, pa), (b, pb) in net.links.items():
        if (b, pb) in done:
            continue
        done.add((a, pa))
        lines.append(f"link {a.name}:{pa} {b.name}:{pb}")
    for sw, pk in net.pending:
        lines.append(
            f"packet {sw.name} srcip={pk.srcip.addr} dstip={pk.dstip.addr} srcport={pk.srcport} "
            f"dstport={pk.dstport} inport={pk.inport} tag={pk.tag}"
        )
    lines.extend(f"prohibited {ip.addr}" for ip in net.prohibited_ips)
    return "\n".join(lines) + "\n"


# -- queries -------------------------------------------------------------------


def run_query(q: Query, net: Network) -> Event:
    if isinstance(q, Switches):
        return Event(net.switch_ids)
    if isinstance(q, SourceIps):
        return Event(Tuple((pk.srcip, pk)) for _, pk in net.pending)
    if isinstance(q, ProhibtedIps):
        return Event(net.prohibited_ips)
    if isinstance(q, Packets):
        return Event(pk for _, pk in net.pending if pattern_matches(q.pattern, pk))
    raise TypeError(f"unknown query {q!r}")


# -- packet processing ---------------------------------------------------------


@dataclass
class Processed:
    """What happened to one packet at one switch."""

    actions: list
    copies: list = field(default_factory=list)
    to_controller: list = field(default_factory=list)
    dropped: list = field(default_factory=list)


def apply_action(net: Network, sw: SwitchId, pk: Packet, action, out: Processed) -> Packet:
    """Carry out one action; returns the packet as seen by later actions."""
    if isinstance(action, SendController):
        out.to_controller.append((sw, pk))
    elif isinstance(action, SendAll):
        for other in net.switch_ids:
            if other != sw:
                out.copies.append((other, pk))
    elif isinstance(action, SendOut):
        peer = net.links.get((sw, action.port))
        if peer is None:
            out.dropped.append((sw, pk))
        else:
            out.copies.append((peer[0], replace(pk, inport=peer[1])))
    elif isinstance(action, Change):
        return replace(pk, **{action.field: _header_value(action)})
    elif isinstance(action, Drop):
        out.dropped.append((sw, pk))
    else:
        raise TypeError(f"not an action: {action!r}")
    return pk


def _header_value(action: Change):
    v = action.value
    if action.field in ("srcip", "dstip"):
        if not isinstance(v, IpAddr):
            raise ShapeError(f"change({action.field}, ...) needs an IP address")
        return v
    if isinstance(v, (Int, Port)) and v.n >= 0:
        return v.n
    raise ShapeError(f"change({action.field}, ...) needs a non-negative integer")


def process_packet(net: Network, sigma: Mapping, sw: SwitchId, pk: Packet,
                   miss_action=SendController()) -> Processed:
    """Run ``pk`` through the first matching rule of ``sw``'s table."""
    if not net.has_switch(sw):
        raise KeyError(f"unknown switch {sw.name}")
    for rule in sigma.get(sw, ()):
        if pattern_matches(rule.pattern, pk):
            actions = list(rule.actions)
            break
    else:
        actions = [miss_action]
    out = Processed(actions)
    cur = pk
    for a in actions:
        cur = apply_action(net, sw, cur, a, out)
    return out


def record_history(hist: Mapping, sw: SwitchId, pk: Packet, action) -> dict:
    out = dict(hist)
    out[sw] = out.get(sw, ()) + ((pk, action),)
    return out


def inject(net: Network, sigma: Mapping, hist: Mapping, sw: SwitchId, pk: Packet, action,
           miss_action=SendController()) -> dict:
    """Apply ``action`` to ``pk`` at ``sw`` and follow the forwarded copies.

    The origin records ``(pk, action)``. Each forwarded copy is processed by
    its destination's flow table and every action taken there is recorded.
    A switch handles a given injection at most once, which bounds SendAll
    storms on cyclic topologies.
    """
    if not net.has_switch(sw):
        raise KeyError(f"unknown switch {sw.name}")
    hist = record_history(hist, sw, pk, action)
    first = Processed([action])
    apply_action(net, sw, pk, action, first)
    visited = {sw}
    queue = deque(first.copies)
    while queue:
        dst, copy = queue.popleft()
        if dst in visited:
            continue
        visited.add(dst)
        res = process_packet(net, sigma, dst, copy, miss_action)
        for a in res.actions:
            hist = record_history(hist, dst, copy, a)
        queue.extend(res.copies)
    return hist
