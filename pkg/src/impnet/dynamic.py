"""Rewriting executor over five-cell configurations.

The computation cell is a chain ``C1 ~> C2 ~> ... ~> Cn`` stored as a tuple
of frames; the empty tuple is the unit computation ``.``. Execution repeats:

* equations, applied exhaustively: structural unfolding of chains and
  programs, heating (pull the next subterm to the front, leaving a hole
  ``<>`` in its frame) and cooling (plug a value back into that hole);
* one irreversible rule on the head frame.

Equations only touch the computation cell. Each rule declares the cells it
may write in :data:`RULE_CELLS`, which :func:`verify_steps` checks.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
from typing import Mapping, Optional

from .errors import BudgetExceededError, EvalError, ShapeError, StuckError
from .lambdas import apply_lambda
from .netsim import Network, inject, run_query
from .syntax import core as K
from .syntax.core import HOLE, UNIT, format_core, is_value
from .values import (
    ACTION_TYPES, PATTERN_TYPES, Event, Exact, Int, NetState, Packet, Port, Rule, RuleList,
    SendController, SendOut, SwitchId, Tuple, add_rule_assignments, as_rule_assignment,
    format_value, merge_flow_tables, truthy,
)

DEFAULT_BUDGET = 10**6
CELLS = ("computation", "swch", "vars", "rll", "hist")


@dataclass(frozen=True)
class Configuration:
    computation: tuple = ()
    swch: dict = field(default_factory=dict)
    vars: dict = field(default_factory=dict)
    rll: tuple = ()
    hist: dict = field(default_factory=dict)

    def head(self):
        return self.computation[0] if self.computation else UNIT

    def as_state(self) -> NetState:
        return NetState(sigma=self.swch, gamma=self.vars, ir=self.rll, hist=self.hist)


@dataclass(frozen=True)
class RewriteStep:
    kind: str  # "equation" or "rule"
    name: str
    before: Configuration
    after: Configuration


def start_configuration(term, initial_bindings: Optional[Mapping] = None) -> Configuration:
    """Start configuration for a program, statement or core term."""
    if not isinstance(term, tuple(_CORE_TYPES)):
        term = K.desugar(term)
    return Configuration(computation=(term,), vars=dict(initial_bindings or {}))


_CORE_TYPES = (
    K.Var, K.Num, K.Val, K.Unit, K.Nil, K.Hole, K.BinOp, K.QueryC, K.LiftC, K.AppL, K.AppR,
    K.PairC, K.MixL, K.MixR, K.FilterC, K.OnceC, K.ForwC, K.RuleC, K.AssignC, K.Semi, K.AddC,
    K.RegC, K.SendC, K.IfC, K.WhileC, K.Chain, K.ProgC,
)


# -- structure -----------------------------------------------------------------


def is_well_structured(c) -> bool:
    """True iff ``c`` is the image of a surface program, statement or transformer."""
    try:
        K.resugar(c)
    except (K.NotSurface, ValueError):
        return False
    return True


def is_final(conf: Configuration) -> bool:
    k = conf.computation
    return k == () or (len(k) == 1 and (is_value(k[0]) or isinstance(k[0], K.Unit)))


def _with_k(conf: Configuration, k: tuple) -> Configuration:
    return replace(conf, computation=k)


def _unfold(conf: Configuration):
    """Structural equations that do not freeze a context."""
    k = conf.computation
    if not k:
        return None
    head, rest = k[0], k[1:]
    if isinstance(head, K.Chain):
        return "seq", _with_k(conf, (head.first, head.rest) + rest)
    if isinstance(head, K.ProgC):
        return "prog", _with_k(conf, (head.defs, head.body) + rest)
    if isinstance(head, K.Nil):
        return "nil", _with_k(conf, (UNIT,) + rest)
    if isinstance(head, K.Unit):
        return "unit", _with_k(conf, rest)
    return None


def _heat(conf: Configuration):
    k = conf.computation
    if not k:
        return None
    head, rest = k[0], k[1:]
    if isinstance(head, K.BinOp):
        if not is_value(head.left):
            return "heat-op-left", _with_k(conf, (head.left, replace(head, left=HOLE)) + rest)
        if isinstance(head.left, K.Num) and not is_value(head.right):
            return "heat-op-right", _with_k(conf, (head.right, replace(head, right=HOLE)) + rest)
    elif isinstance(head, K.AssignC):
        if not is_value(head.rhs):
            return "heat-assign", _with_k(conf, (head.rhs, replace(head, rhs=HOLE)) + rest)
    elif isinstance(head, K.Semi):
        if not is_value(head.body):
            return "heat-semi", _with_k(conf, (head.body, K.Semi(HOLE)) + rest)
    elif isinstance(head, K.IfC):
        if not is_value(head.cond):
            return "heat-if", _with_k(conf, (head.cond, replace(head, cond=HOLE)) + rest)
    return None


def _plug(frame, v):
    for f in fields(frame):
        if getattr(frame, f.name) == HOLE:
            return replace(frame, **{f.name: v})
    return None


def _cool(conf: Configuration):
    k = conf.computation
    if len(k) < 2 or isinstance(k[1], K.Hole):
        return None
    plugged = _plug(k[1], k[0]) if hasattr(k[1], "__dataclass_fields__") else None
    if plugged is None:
        return None
    return "cool", _with_k(conf, (plugged,) + k[2:])


def heat_step(conf: Configuration) -> Optional[Configuration]:
    """Apply one heating equation at the head; ``None`` when none applies."""
    r = _heat(conf)
    return None if r is None else r[1]


def cool_step(conf: Configuration) -> Optional[Configuration]:
    """Plug the head into the hole of the next frame; ``None`` when there is no hole."""
    r = _cool(conf)
    return None if r is None else r[1]


def _equation(conf: Configuration):
    if conf.computation and is_value(conf.computation[0]):
        return _cool(conf)
    return _unfold(conf) or _heat(conf)


# -- rules ---------------------------------------------------------------------


def _var(c, what) -> str:
    if not isinstance(c, K.Var):
        raise ShapeError(f"{what} expects a variable, got {format_core(c)}")
    return c.name


def _bound(conf: Configuration, name: str):
    try:
        return conf.vars[name]
    except KeyError:
        from .errors import UnboundVariableError

        raise UnboundVariableError(name) from None


def _items(conf: Configuration, c, what) -> tuple:
    """The values bound to the variable ``c``; rule lists read as their entries."""
    b = _bound(conf, _var(c, what))
    return b.items


def _as_payload(v):
    if isinstance(v, K.Num):
        return Event([Int(v.n)])
    return v.payload


def _continue(conf, value=None, **cells):
    rest = conf.computation[1:]
    k = rest if value is None else (value,) + rest
    return replace(conf, computation=k, **cells)


def _r_lookup(conf, head, net, env):
    return _continue(conf, K.Val(_bound(conf, head.name)))


_INT_OPS = {
    "+": lambda a, b: a + b, "-": lambda a, b: a - b, "*": lambda a, b: a * b,
    "==": lambda a, b: int(a == b), "!=": lambda a, b: int(a != b),
    "<": lambda a, b: int(a < b), "<=": lambda a, b: int(a <= b),
    ">": lambda a, b: int(a > b), ">=": lambda a, b: int(a >= b),
}


def _r_op(conf, head, net, env):
    if not (isinstance(head.left, K.Num) and isinstance(head.right, K.Num)):
        raise ShapeError("integer operator applied to non-integers")
    if head.op not in _INT_OPS:
        raise ShapeError(f"unknown operator {head.op}")
    return _continue(conf, K.Num(_INT_OPS[head.op](head.left.n, head.right.n)))


def _r_query(conf, head, net, env):
    return _continue(conf, K.Val(run_query(head.query, net)))


def _r_lift(conf, head, net, env):
    xs = _items(conf, head.arg, "Lift")
    mapped = []
    for v in xs:
        mapped.append(apply_lambda(head.fn, v, conf.vars, net))
    return _continue(conf, K.Val(Event(mapped)))


def _split_pairs(xs, what):
    lefts, rights = [], []
    for v in xs:
        if not (isinstance(v, Tuple) and len(v) == 2):
            raise ShapeError(f"{what}: expected pairs, got {format_value(v)}")
        lefts.append(v[0])
        rights.append(v[1])
    return lefts, rights


def _r_apply_lft(conf, head, net, env):
    vs, ws = _split_pairs(_items(conf, head.arg, "ApplyLft"), "ApplyLft")
    out = [Tuple((apply_lambda(head.fn, v, conf.vars, net), w)) for v, w in zip(vs, ws)]
    return _continue(conf, K.Val(Event(out)))


def _r_apply_rit(conf, head, net, env):
    vs, ws = _split_pairs(_items(conf, head.arg, "ApplyRit"), "ApplyRit")
    out = [Tuple((v, apply_lambda(head.fn, w, conf.vars, net))) for v, w in zip(vs, ws)]
    return _continue(conf, K.Val(Event(out)))


def _two(conf, head, what):
    vs = _items(conf, head.left, what)
    ws = _items(conf, head.right, what)
    if len(vs) != len(ws):
        from .errors import LengthMismatchError

        raise LengthMismatchError(what, len(vs), len(ws))
    return vs, ws


def _r_merge(conf, head, net, env):
    vs, ws = _two(conf, head, "Merge")
    return _continue(conf, K.Val(Event([Tuple((vs[i], ws[i])) for i in range(len(vs))])))


def _r_mix_fst(conf, head, net, env):
    vs, ws = _two(conf, head, "MixFst")
    out, prev = [], head.actions
    for i in range(len(vs)):
        prev = prev.union(vs[i])  # A_i = A_{i-1} u {v_i}
        out.append(Tuple((prev, ws[i])))
    return _continue(conf, K.Val(Event(out)))


def _r_mix_snd(conf, head, net, env):
    vs, ws = _two(conf, head, "MixSnd")
    out, prev = [], head.actions
    for i in range(len(vs)):
        prev = prev.union(ws[i])
        out.append(Tuple((vs[i], prev)))
    return _continue(conf, K.Val(Event(out)))


def _r_filter(conf, head, net, env):
    kept = []
    for v in _items(conf, head.arg, "Filter"):
        r = apply_lambda(head.fn, v, conf.vars, net)
        if r == Int(1):
            kept.append(v)
        elif r != Int(0):
            raise ShapeError(f"Filter: predicate returned {format_value(r)}, expected 0 or 1")
    return _continue(conf, K.Val(Event(kept)))


def _r_once(conf, head, net, env):
    xs = _items(conf, head.arg, "Once")
    if head.count < 1:
        raise EvalError(f"Once: count must be positive, got {head.count}")
    if len(xs) != 1:
        raise ShapeError(f"Once: {head.arg.name} must hold a single value, holds {len(xs)}")
    return _continue(conf, K.Val(Event([xs[0] for _ in range(head.count)])))


def _r_forw(conf, head, net, env):
    out = []
    for v in _items(conf, head.arg, "MakForwRule"):
        ok = isinstance(v, Tuple) and len(v) == 3
        if ok:
            sw, port, pat = v[0], v[1], v[2]
            pat = Exact(pat) if isinstance(pat, Packet) else pat
            ok = (isinstance(sw, SwitchId) and isinstance(port, (Int, Port)) and port.n >= 0
                  and isinstance(pat, PATTERN_TYPES))
        if not ok:
            raise ShapeError(f"MakForwRule: expected (switch, port, pattern), got {format_value(v)}")
        out.append(Tuple((sw, Rule(pat, (SendOut(port.n),)))))
    return _continue(conf, K.Val(RuleList(tuple(out))))


def _r_make_rule(conf, head, net, env):
    out = []
    for v in _items(conf, head.arg, "MakeRule"):
        if not (isinstance(v, Tuple) and len(v) == 3):
            raise ShapeError(f"MakeRule: expected (pattern, action, _), got {format_value(v)}")
        pat, act = v[0], v[1]
        if not (isinstance(pat, PATTERN_TYPES) and isinstance(act, ACTION_TYPES)):
            raise ShapeError(f"MakeRule: expected (pattern, action, _), got {format_value(v)}")
        out.append(Rule(pat, (act,)))
    return _continue(conf, K.Val(RuleList(tuple(out))))


def _r_assign(conf, head, net, env):
    name = _var(head.target, "assignment")
    if not is_value(head.rhs):
        raise ShapeError("assignment of an unevaluated computation")
    new_vars = dict(conf.vars)
    new_vars[name] = _as_payload(head.rhs)
    return _continue(conf, vars=new_vars)


def _r_semi(conf, head, net, env):
    if not is_value(head.body):
        raise ShapeError("statement terminator on an unevaluated computation")
    return _continue(conf)


def _r_add_rules(conf, head, net, env):
    entries = as_rule_assignment(_bound(conf, _var(head.arg, "AddRules")))
    return _continue(conf, rll=add_rule_assignments(conf.rll, entries))


def _r_register(conf, head, net, env):
    return _continue(conf, rll=(), swch=merge_flow_tables(conf.swch, conf.rll))


def _r_send(conf, head, net, env):
    h = conf.hist
    for v in _items(conf, head.arg, "Send"):
        if not (isinstance(v, Tuple) and len(v) == 3 and isinstance(v[0], SwitchId)
                and isinstance(v[1], Packet) and isinstance(v[2], ACTION_TYPES)):
            raise ShapeError(f"Send: expected (switch, packet, action), got {format_value(v)}")
        if not net.has_switch(v[0]):
            raise ShapeError(f"Send: unknown switch {v[0].name}")
        h = inject(net, conf.swch, h, v[0], v[1], v[2], env.get("miss_action", SendController()))
    return _continue(conf, hist=h)


def _r_if(conf, head, net, env):
    c = head.cond
    if isinstance(c, K.Num):
        taken = c.n != 0
    elif isinstance(c, K.Val):
        taken = truthy(c.payload)
    else:
        raise ShapeError("If on an unevaluated condition")
    branch = head.then if taken else (head.else_ if head.else_ is not None else UNIT)
    return _continue(conf, branch)


def _r_while(conf, head, net, env):
    unrolled = K.IfC(head.cond, K.Chain(head.body, head))
    return _continue(conf, unrolled)


# head type -> (rule name, implementation, writable cells besides the computation)
RULES: dict = {
    K.Var: ("Lookup", _r_lookup, ()),
    K.BinOp: ("Op", _r_op, ()),
    K.QueryC: ("Query", _r_query, ()),
    K.LiftC: ("Left", _r_lift, ()),
    K.AppL: ("ApplyLft", _r_apply_lft, ()),
    K.AppR: ("ApplyRit", _r_apply_rit, ()),
    K.PairC: ("Merge", _r_merge, ()),
    K.MixL: ("MixFst", _r_mix_fst, ()),
    K.MixR: ("MixSnd", _r_mix_snd, ()),
    K.FilterC: ("Filter", _r_filter, ()),
    K.OnceC: ("Once", _r_once, ()),
    K.ForwC: ("MakForwRule", _r_forw, ()),
    K.RuleC: ("MakeRule", _r_make_rule, ()),
    K.AssignC: ("Assignment", _r_assign, ("vars",)),
    K.Semi: ("Semi", _r_semi, ()),
    K.AddC: ("AddRules", _r_add_rules, ("rll",)),
    K.RegC: ("Register", _r_register, ("rll", "swch")),
    K.SendC: ("Send", _r_send, ("hist",)),
    K.IfC: ("If", _r_if, ()),
    K.WhileC: ("While", _r_while, ()),
}
RULE_CELLS = {name: ("computation",) + cells for name, _, cells in RULES.values()}


def rewrite_step(conf: Configuration, net: Network, *, miss_action=SendController(),
                 rules: Optional[Mapping] = None):
    """Apply exactly one rule to the head frame.

    Raises :class:`StuckError` if no rule matches or the rule's premise fails.
    """
    table = RULES if rules is None else rules
    if not conf.computation:
        raise StuckError(".", "nothing to rewrite")
    head = conf.computation[0]
    entry = table.get(type(head))
    if entry is None or is_value(head):
        raise StuckError(format_core(head), "no rule applies")
    name, fn, _ = entry
    try:
        after = fn(conf, head, net, {"miss_action": miss_action})
    except EvalError as exc:
        if isinstance(exc, StuckError):
            raise
        raise StuckError(_short(head), str(exc)) from exc
    return after, RewriteStep("rule", name, conf, after)


def _short(head) -> str:
    text = format_core(head)
    return text if len(text) <= 80 else text[:77] + "..."


def run_to_final(conf0: Configuration, net: Network, budget: int = DEFAULT_BUDGET, *,
                 miss_action=SendController(), rules: Optional[Mapping] = None,
                 log: bool = True):
    """Rewrite until the computation is a value or ``.``.

    ``budget`` bounds the number of rule applications; equations are free.
    Returns the final configuration and the step log (empty when ``log`` is false).
    """
    conf = conf0
    steps: list = []
    applied = 0
    while True:
        while True:
            r = _equation(conf)
            if r is None:
                break
            name, after = r
            if log:
                steps.append(RewriteStep("equation", name, conf, after))
            conf = after
        if is_final(conf):
            return conf, steps
        if conf.computation and is_value(conf.computation[0]):
            raise StuckError(format_core(conf.computation[0]),
                             "value followed by a computation without a hole")
        if applied >= budget:
            raise BudgetExceededError(budget)
        conf, step = rewrite_step(conf, net, miss_action=miss_action, rules=rules)
        applied += 1
        if log:
            steps.append(step)


def run_program_dynamic(program, net: Network, initial_bindings: Optional[Mapping] = None, *,
                        budget: int = DEFAULT_BUDGET, miss_action=SendController(),
                        rules: Optional[Mapping] = None, log: bool = True):
    conf0 = start_configuration(program, initial_bindings)
    return run_to_final(conf0, net, budget, miss_action=miss_action, rules=rules, log=log)


# -- checking and printing -----------------------------------------------------

_HEAT_NAMES = ("heat-op-left", "heat-op-right", "heat-assign", "heat-semi", "heat-if")


def changed_cells(before: Configuration, after: Configuration) -> list:
    return [c for c in CELLS if getattr(before, c) != getattr(after, c)]


def verify_steps(steps, final: Optional[Configuration] = None) -> list:
    """Check the invariants of a step log; returns a list of violation messages.

    * equations leave swch, vars, rll and hist untouched;
    * rules write only the cells they declare;
    * every heating step is undone by cooling its result;
    * the final configuration, if given, is final.
    """
    problems = []
    for i, s in enumerate(steps):
        changed = set(changed_cells(s.before, s.after))
        if s.kind == "equation":
            if changed - {"computation"}:
                problems.append(f"step {i}: equation {s.name} changed {sorted(changed)}")
            if s.name in _HEAT_NAMES and cool_step(s.after) != s.before:
                problems.append(f"step {i}: {s.name} is not undone by cooling")
        else:
            allowed = set(RULE_CELLS.get(s.name, CELLS))
            if changed - allowed:
                problems.append(f"step {i}: rule {s.name} changed {sorted(changed - allowed)}")
    if final is not None and not is_final(final):
        problems.append("final configuration is not final")
    return problems


def _summary(before: Configuration, after: Configuration) -> str:
    parts = []
    if before.computation != after.computation:
        k = after.computation
        parts.append("k=" + (format_core(k[0]) if k else ".") + (" ~> ..." if len(k) > 1 else ""))
    for name in sorted(set(before.vars) | set(after.vars)):
        if before.vars.get(name) != after.vars.get(name):
            parts.append(f"vars[{name}]={format_value(after.vars[name])}")
    if before.rll != after.rll:
        parts.append(f"rll={len(after.rll)} staged")
    for sw in sorted(set(before.swch) | set(after.swch), key=lambda s: s.name):
        if before.swch.get(sw) != after.swch.get(sw):
            parts.append(f"swch[{sw.name}]={len(after.swch.get(sw, ()))} rules")
    for sw in sorted(set(before.hist) | set(after.hist), key=lambda s: s.name):
        if before.hist.get(sw) != after.hist.get(sw):
            parts.append(f"hist[{sw.name}]={len(after.hist.get(sw, ()))} entries")
    return "; ".join(parts) if parts else "no change"


def format_step(index: int, step: RewriteStep) -> str:
    return f"{index} {step.kind} {step.name} | {_summary(step.before, step.after)}"
