"""Random well-typed, loop-free programs and topologies, and the two-semantics comparison.

The generator builds the topology first, so the length of every query result is known
while the program is generated. Each variable carries its item type and a length class
(a concrete count, or an opaque token after ``Filter``). Binary transformers only pair
variables of the same class, lambdas are drawn from templates keyed on the item type,
and builtins that read a variable (``switch``, ``prohibit``) only name variables that
still hold the full ``Switches`` result.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from itertools import count as _count
from typing import Mapping, Optional

from . import dynamic, static
from .errors import ImpNetError, StuckError
from .netsim import Network, format_topology, parse_topology
from .syntax import Program, parse_program
from .values import SendController, format_value, switch_sort_key

IPS = ("10.0.0.1", "10.0.0.2", "10.0.0.3", "192.168.1.13", "172.16.0.7", "203.0.113.5")
SRC_PORTS = (80, 443, 5000)


# -- topologies ----------------------------------------------------------------


def random_topology(rng: random.Random) -> str:
    n = rng.randint(1, 4)
    ports = {f"s{i}": rng.randint(1, 4) for i in range(1, n + 1)}
    lines = [f"switch {sw} ports {k}" for sw, k in ports.items()]
    free = [(sw, p) for sw, k in ports.items() for p in range(1, k + 1)]
    rng.shuffle(free)
    for _ in range(rng.randint(0, n)):
        a = free.pop() if free else None
        b = next((e for e in free if a and e[0] != a[0]), None)
        if a is None or b is None:
            break
        free.remove(b)
        lines.append(f"link {a[0]}:{a[1]} {b[0]}:{b[1]}")
    for i in range(rng.randint(0, 4)):
        sw = rng.choice(list(ports))
        lines.append(
            f"packet {sw} srcip={rng.choice(IPS)} dstip={rng.choice(IPS)} "
            f"srcport={rng.choice(SRC_PORTS)} dstport={rng.choice((80, 22))} "
            f"inport={rng.randint(1, ports[sw])} tag=pk{i + 1}"
        )
    for ip in rng.sample(IPS, rng.randint(0, 3)):
        lines.append(f"prohibited {ip}")
    return "\n".join(lines) + "\n"


# -- programs ------------------------------------------------------------------

# Item types are strings for base values and tuples of types for tuple values.
SEND_TRIPLE = ("Sw", "Pk", "Act")
ASSIGN_TYPES = (("Sw", "Rule"), ("Sw", "RL"))


@dataclass(frozen=True)
class Kind:
    item: object
    length: object  # int, or an opaque token shared by equal-length events
    rules: bool = False  # bound to a rule list rather than an event
    all_switches: bool = False


def _lambda_templates(ty, env: Mapping[str, Kind]) -> list:
    """``(body, result type)`` candidates for a lambda applied to items of type ``ty``."""
    sw_vars = [v for v, k in env.items() if k.all_switches and k.length]
    rl_vars = [v for v, k in env.items() if k.rules and k.item == "Rule"]
    int_singles = [v for v, k in env.items() if k.item == "Int" and k.length == 1 and not k.rules]
    pk_singles = [v for v, k in env.items() if k.item == "Pk" and k.length == 1 and not k.rules]
    out = [("t", ty), ("7", "Int"), ("(t, t)", (ty, ty)), ("(t, 1)", (ty, "Int"))]
    if ty == "Int":
        out += [("t + 3", "Int"), ("t * 2", "Int"), ("t - 1", "Int"), ("t > 2", "Int"),
                ("t == 1", "Int")]
        out += [(f"t + {k}", "Int") for k in int_singles]
    elif ty == "Port":
        out += [("inport(t)", "Pat"), ("sendout(t)", "Act"),
                ("(inport(t), sendcontroller, _)", ("Pat", "Act", "Wild"))]
    elif ty == "Ip":
        out += [("srcip(t)", "Pat"), ("dstip(t)", "Pat"), ("port(t)", "Port"),
                ("(srcip(t), sendall, _)", ("Pat", "Act", "Wild")), ("change(dstip, t)", "Act")]
        for z in sw_vars:
            out += [(f"switch(t, {z})", "Sw"), (f"prohibit(t, {z})", "Act"),
                    (f"(srcip(t), prohibit(t, {z}), _)", ("Pat", "Act", "Wild"))]
    elif ty == "Pk":
        out += [("srcip(t)", "Ip"), ("dstip(t)", "Ip"), ("srcport(t)", "Int"),
                ("dstport(t)", "Int"), ("inport(t)", "Int"), ("port(t)", "Port")]
        for z in sw_vars:
            out += [(f"switch(t, {z})", "Sw"), (f"(switch(t, {z}), port(t), t)", ("Sw", "Port", "Pk")),
                    (f"(switch(t, {z}), t, sendall)", SEND_TRIPLE),
                    (f"(switch(t, {z}), t, sendcontroller)", SEND_TRIPLE)]
    elif ty == "Sw":
        out += [(f"(t, {y})", ("Sw", "RL")) for y in rl_vars]
        out += [(f"(t, {p}, drop)", SEND_TRIPLE) for p in pk_singles]
        out += [("(t, 1, matchall)", ("Sw", "Int", "Pat"))]
    elif ty == "Pat":
        out += [("(t, sendall, _)", ("Pat", "Act", "Wild")), ("(t, drop, 0)", ("Pat", "Act", "Int"))]
    elif ty == "Act":
        out += [("(matchall, t, _)", ("Pat", "Act", "Wild"))]
    elif isinstance(ty, tuple):
        names = ("fst", "snd", "thd")
        out += [(f"{names[i]}(t)", ty[i]) for i in range(len(ty))]
        if len(ty) == 2:
            out += [("(snd(t), fst(t))", (ty[1], ty[0]))]
    return out


def _predicates(ty) -> list:
    out = ["1", "0", "t == t", "t != t"]
    if ty == "Int":
        out += ["t > 2", "t <= 7", "t == 1"]
    elif ty == "Pk":
        out += ["srcport(t) > 100", "dstport(t) == 80"]
    elif isinstance(ty, tuple):
        out += ["fst(t) == fst(t)", "snd(t) != snd(t)"]
    return out


QUERY_KINDS = ("Switches", "SourceIps", "ProhibtedIps", "Packets")


class ProgramGen:
    def __init__(self, rng: random.Random, net: Network, max_size: int):
        self.rng = rng
        self.net = net
        self.max_size = max(1, max_size)
        self.opaque = _count()
        self.var_names = [f"v{i}" for i in range(1, 7)]

    def query(self, text: str) -> Kind:
        net = self.net
        if text == "Switches":
            return Kind("Sw", len(net.switches), all_switches=True)
        if text == "SourceIps":
            return Kind(("Ip", "Pk"), len(net.pending))
        if text == "ProhibtedIps":
            return Kind("Ip", len(net.prohibited_ips))
        return Kind("Pk", f"q{next(self.opaque)}")

    def program(self) -> str:
        rng = self.rng
        env: dict = {}
        defs = []
        for i in range(rng.randint(1, 3)):
            q = rng.choice(QUERY_KINDS)
            if q == "Packets":
                q = rng.choice(("Packets(srcport(80))", "Packets(matchall)", "Packets(inport(1))"))
            name = f"q{i + 1}"
            defs.append(f"{name} = {q};")
            env[name] = self.query(q.split("(")[0] if q.startswith("Packets") else q)
        size = rng.randint(1, self.max_size)
        body, _ = self.block(env, size, depth=0)
        return "\n".join(defs + [">>"] + body) + "\n"

    def block(self, env: dict, size: int, depth: int):
        lines = []
        while size > 0:
            stmt, used, env = self.stmt(env, size, depth)
            lines.extend(stmt)
            size -= used
        return lines, env

    def stmt(self, env: dict, size: int, depth: int):
        rng = self.rng
        pad = "  " * depth
        choices = ["assign"] * 6 + ["register"]
        if any(k.item in ASSIGN_TYPES for k in env.values()):
            choices += ["addrules"] * 3
        if any(k.item == SEND_TRIPLE for k in env.values()):
            choices += ["send"] * 2
        if size >= 3 and depth < 2 and env:
            choices.append("if")
        plan = self.recipe(env, size)
        if plan is not None:
            choices += ["recipe"] * 3
        pick = rng.choice(choices)
        if pick == "recipe":
            lines, env = plan
            return [pad + line for line in lines], len(lines), env
        if pick == "register":
            return [pad + "Register;"], 1, env
        if pick == "addrules":
            x = rng.choice([v for v, k in env.items() if k.item in ASSIGN_TYPES])
            return [f"{pad}AddRules({x});"], 1, env
        if pick == "send":
            x = rng.choice([v for v, k in env.items() if k.item == SEND_TRIPLE])
            return [f"{pad}Send({x});"], 1, env
        if pick == "if":
            x = rng.choice(sorted(env))
            budget = size - 1
            n_then = rng.randint(1, budget - 1)
            then_lines, env_then = self.block(dict(env), n_then, depth + 1)
            else_lines, env_else = self.block(dict(env), budget - n_then, depth + 1)
            merged = {v: k for v, k in env_then.items() if env_else.get(v) == k}
            lines = [f"{pad}if ({x}) then {{", *then_lines, f"{pad}}} else {{", *else_lines, f"{pad}}}"]
            return lines, size, merged
        text, kind = self.transformer(env)
        target = rng.choice(self.var_names + list(env))
        env = dict(env)
        env[target] = kind
        return [f"{pad}{target} := {text};"], 1, env

    def recipe(self, env: dict, size: int):
        """A short chain ending in staged rules or a Send, so those paths get exercised."""
        rng = self.rng
        sws = sorted(v for v, k in env.items() if k.all_switches)
        if not sws:
            return None
        z = rng.choice(sws)
        by_item = {}
        for v, k in env.items():
            by_item.setdefault(k.item, []).append(v)
        plans = ["broadcast"]
        if "Ip" in by_item:
            plans.append("firewall")
        if "Pk" in by_item:
            plans += ["forward", "send", "send"]
        if ("Ip", "Pk") in by_item:
            plans.append("sources")
        a, b = rng.sample(self.var_names, 2)
        env = dict(env)
        plan = rng.choice(plans)
        if plan == "broadcast":
            src = rng.choice(sorted(env))
            act = rng.choice(("sendall", "sendcontroller", "drop"))
            lines = [f"{a} := Lift({src}, \\t. (matchall, {act}, _));", f"{a} := MakeRule({a});",
                     f"{b} := Lift({z}, \\t. (t, {a}));", f"AddRules({b});"]
            env[a] = Kind("Rule", env[src].length, rules=True)
            env[b] = Kind(("Sw", "RL"), env[z].length)
        elif plan == "firewall":
            ip = rng.choice(sorted(by_item["Ip"]))
            if ip == a:
                return None
            lines = [f"{a} := Lift({ip}, \\t. (srcip(t), prohibit(t, {z}), _));",
                     f"{a} := MakeRule({a});", f"{b} := Lift({ip}, \\t. switch(t, {z}));",
                     f"{b} := Merge({b}, {a});", f"AddRules({b});"]
            env[a] = Kind("Rule", env[ip].length, rules=True)
            env[b] = Kind(("Sw", "Rule"), env[ip].length)
        elif plan == "forward":
            pk = rng.choice(sorted(by_item["Pk"]))
            lines = [f"{a} := Lift({pk}, \\t. (switch(t, {z}), port(t), t));",
                     f"{a} := MakForwRule({a});", f"AddRules({a});"]
            env[a] = Kind(("Sw", "Rule"), env[pk].length, rules=True)
        elif plan == "send":
            pk = rng.choice(sorted(by_item["Pk"]))
            act = rng.choice(("sendall", "sendcontroller", "drop"))
            lines = [f"{a} := Lift({pk}, \\t. (switch(t, {z}), t, {act}));", f"Send({a});"]
            env[a] = Kind(SEND_TRIPLE, env[pk].length)
        else:
            src = rng.choice(sorted(by_item[("Ip", "Pk")]))
            lines = [f"{a} := ApplyLft({src}, \\t. port(t));",
                     f"{a} := Lift({a}, \\t. (switch(snd(t), {z}), fst(t), snd(t)));",
                     f"{a} := MakForwRule({a});", f"AddRules({a});"]
            env[a] = Kind(("Sw", "Rule"), env[src].length, rules=True)
        if lines[-1].startswith("AddRules") and rng.random() < 0.6:
            lines.append("Register;")
        if len(lines) > size or z in (a, b):
            return None
        return lines, env

    def transformer(self, env: dict):
        rng = self.rng
        options = [self._int_lit]
        evs = [v for v, k in env.items()]
        if evs:
            options += [self._lift] * 4 + [self._filter, self._apply]
            if any(k.length == 1 for k in env.values()):
                options.append(self._once)
            if any(self._same_length(env, v) for v in evs):
                options += [self._merge, self._mix]
            if any(self._forw_ok(k) for k in env.values()):
                options += [self._forw] * 3
            if any(self._rule_ok(k) for k in env.values()):
                options += [self._make_rule] * 3
        options.append(self._ask)
        while True:
            r = rng.choice(options)(env)
            if r is not None:
                return r

    # individual transformers; each returns (text, Kind) or None if it does not apply

    def _int_lit(self, env):
        return str(self.rng.randint(0, 9)), Kind("Int", 1)

    def _ask(self, env):
        q = self.rng.choice(QUERY_KINDS)
        if q == "Packets":
            return "Packets(srcport(80))", self.query("Packets")
        return q, self.query(q)

    def _lift(self, env):
        x = self.rng.choice(sorted(env))
        body, ty = self.rng.choice(_lambda_templates(env[x].item, env))
        return f"Lift({x}, \\t. {body})", Kind(ty, env[x].length)

    def _apply(self, env):
        pairs = [v for v, k in env.items() if isinstance(k.item, tuple) and len(k.item) == 2]
        if not pairs:
            return None
        x = self.rng.choice(sorted(pairs))
        ty = env[x].item
        side = self.rng.choice((0, 1))
        body, out = self.rng.choice(_lambda_templates(ty[side], env))
        new = (out, ty[1]) if side == 0 else (ty[0], out)
        name = "ApplyLft" if side == 0 else "ApplyRit"
        return f"{name}({x}, \\t. {body})", Kind(new, env[x].length)

    def _filter(self, env):
        x = self.rng.choice(sorted(env))
        k = env[x]
        pred = self.rng.choice(_predicates(k.item))
        return f"Filter({x}, \\t. {pred})", Kind(k.item, f"f{next(self.opaque)}")

    def _once(self, env):
        x = self.rng.choice(sorted(v for v, k in env.items() if k.length == 1))
        n = self.rng.randint(1, 4)
        return f"Once({x}, {n})", Kind(env[x].item, n)

    @staticmethod
    def _same_length(env, x):
        return [y for y, k in env.items() if k.length == env[x].length]

    def _binary(self, env):
        x = self.rng.choice(sorted(v for v in env if self._same_length(env, v)))
        y = self.rng.choice(sorted(self._same_length(env, x)))
        return x, y

    def _merge(self, env):
        x, y = self._binary(env)
        return f"Merge({x}, {y})", Kind((env[x].item, env[y].item), env[x].length)

    def _mix(self, env):
        x, y = self._binary(env)
        acts = self.rng.choice(("{}", "{sendall}", "{drop, sendcontroller}"))
        if self.rng.random() < 0.5:
            return f"MixFst({acts}, {x}, {y})", Kind(("AS", env[y].item), env[x].length)
        return f"MixSnd({x}, {acts}, {y})", Kind((env[x].item, "AS"), env[x].length)

    @staticmethod
    def _forw_ok(k: Kind):
        t = k.item
        return (not k.rules and isinstance(t, tuple) and len(t) == 3 and t[0] == "Sw"
                and t[1] == "Port" and t[2] in ("Pat", "Pk"))

    @staticmethod
    def _rule_ok(k: Kind):
        t = k.item
        return not k.rules and isinstance(t, tuple) and len(t) == 3 and t[:2] == ("Pat", "Act")

    def _forw(self, env):
        x = self.rng.choice(sorted(v for v, k in env.items() if self._forw_ok(k)))
        return f"MakForwRule({x})", Kind(("Sw", "Rule"), env[x].length, rules=True)

    def _make_rule(self, env):
        x = self.rng.choice(sorted(v for v, k in env.items() if self._rule_ok(k)))
        return f"MakeRule({x})", Kind("Rule", env[x].length, rules=True)


def random_case(seed: int, index: int, max_size: int = 20):
    """The ``index``-th case for ``seed``: ``(program text, topology text)``.

    Each case has its own generator, so cases are reproducible individually and can
    be produced in any order.
    """
    rng = random.Random(seed * 1_000_003 + index)
    topo = random_topology(rng)
    net = parse_topology(topo)
    return ProgramGen(rng, net, max_size).program(), topo


# -- comparison ----------------------------------------------------------------

CELL_LABELS = (("sigma", "σ"), ("gamma", "γ"), ("ir", "ir"), ("hist", "hist"))


@dataclass
class Comparison:
    agree: bool
    static_outcome: object
    dynamic_outcome: object
    diff: list = field(default_factory=list)


def _outcome(fn):
    try:
        st = fn()
    except ImpNetError as exc:
        # a stuck rewrite carries the evaluation error that blocked it
        root = exc.__cause__ if isinstance(exc, StuckError) and exc.__cause__ else exc
        return ("error", type(root).__name__, str(exc))
    return ("ok", st)


def _diff_cells(a, b) -> list:
    lines = []
    for attr, label in CELL_LABELS:
        x, y = getattr(a, attr), getattr(b, attr)
        if x == y:
            continue
        if isinstance(x, dict):
            for key in sorted(set(x) | set(y), key=_key_order):
                if x.get(key) != y.get(key):
                    name = key.name if hasattr(key, "name") else key
                    lines.append(f"{label}[{name}]: static={_show(x.get(key))} dynamic={_show(y.get(key))}")
        else:
            lines.append(f"{label}: static={_show(x)} dynamic={_show(y)}")
    return lines


def _key_order(k):
    return switch_sort_key(k) if hasattr(k, "name") else (str(k),)


def _show(v) -> str:
    if v is None:
        return "<absent>"
    if isinstance(v, tuple):
        return "[" + ", ".join(_show(x) for x in v) + "]"
    try:
        return format_value(v)
    except TypeError:
        return repr(v)


def compare_semantics(program: Program, net: Network, bindings: Optional[Mapping] = None, *,
                      budget: int = static.DEFAULT_BUDGET, miss_action=SendController(),
                      rules: Optional[Mapping] = None) -> Comparison:
    """Run both semantics and compare final (σ, γ, staged rules, history).

    Two runs that both fail agree only if they fail with the same error class.
    """
    s = _outcome(lambda: static.run_program(program, net, bindings, budget=budget,
                                            miss_action=miss_action)[0])
    d = _outcome(lambda: dynamic.run_program_dynamic(
        program, net, bindings, budget=budget, miss_action=miss_action, rules=rules,
        log=False)[0].as_state())
    if s[0] == "ok" and d[0] == "ok":
        diff = _diff_cells(s[1], d[1])
        return Comparison(not diff, s, d, diff)
    if s[0] == d[0] == "error":
        same = s[1] == d[1]
        diff = [] if same else [f"error: static={s[1]} dynamic={d[1]}"]
        return Comparison(same, s, d, diff)
    diff = [f"outcome: static={s[0]}{'' if s[0] == 'ok' else ' ' + s[2]} "
            f"dynamic={d[0]}{'' if d[0] == 'ok' else ' ' + d[2]}"]
    return Comparison(False, s, d, diff)


@dataclass
class FuzzResult:
    index: int
    program: str
    topology: str
    comparison: Comparison


def fuzz_one(seed: int, index: int, max_size: int = 20, rules: Optional[Mapping] = None,
             budget: int = static.DEFAULT_BUDGET) -> FuzzResult:
    prog_text, topo = random_case(seed, index, max_size)
    program = parse_program(prog_text, initial=())
    net = parse_topology(topo)
    return FuzzResult(index, prog_text, topo, compare_semantics(program, net, budget=budget,
                                                                rules=rules))


def _fuzz_chunk(args):
    seed, indices, max_size = args
    return [fuzz_one(seed, i, max_size) for i in indices]


def run_fuzz(seed: int, count: int, max_size: int = 20, workers: int = 1):
    """Compare both semantics on ``count`` cases; results come back ordered by index."""
    if count <= 0:
        return []
    if workers <= 1:
        return [fuzz_one(seed, i, max_size) for i in range(count)]
    from concurrent.futures import ProcessPoolExecutor

    chunks = [(seed, range(w, count, workers), max_size) for w in range(workers)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        results = [r for part in pool.map(_fuzz_chunk, chunks) for r in part]
    return sorted(results, key=lambda r: r.index)


def reproducer_text(result: FuzzResult) -> str:
    lines = [f"# fuzz case {result.index}: the two semantics disagree"]
    lines += [f"# {d}" for d in result.comparison.diff]
    lines.append("# topology:")
    lines += [f"#   {line}" for line in result.topology.splitlines()]
    return "\n".join(lines) + "\n" + result.program


__all__ = [
    "random_topology", "ProgramGen", "random_case", "compare_semantics", "Comparison",
    "fuzz_one", "run_fuzz", "FuzzResult", "reproducer_text", "format_topology",
]
