"""Big-step evaluator over (flow tables, variables, staged rules, history).

Transformers follow the judgement ``et : gamma -> u``; statements follow
``S : (sigma, gamma, ir) -> (sigma', gamma', ir')``. The If and While rules
branch on :func:`~impnet.values.truthy` and While unrolls as
``if (x) { body; while (x) body }``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional

from .errors import BudgetExceededError, EvalError, LengthMismatchError, ShapeError
from .lambdas import apply_lambda, lookup
from .netsim import Network, inject, run_query
from .syntax import ast as A
from .syntax.printer import brief_stmt, format_query
from .values import (
    ACTION_TYPES, PATTERN_TYPES, ActionSet, Event, Exact, Int, NetState, Packet, Port, Rule,
    RuleList, SendController, SendOut, SwitchId, Tuple, add_rule_assignments,
    as_rule_assignment, format_value, merge_flow_tables, truthy,
)

DEFAULT_BUDGET = 10**6
EMPTY_NET = Network()


def event_of(gamma: Mapping, x: str) -> Event:
    """The event bound to ``x``; a rule list reads as the event of its entries."""
    v = lookup(gamma, x)
    if isinstance(v, RuleList):
        return Event(v.items)
    return v


# -- event transformers --------------------------------------------------------


def et_lift(x: str, f: A.Lambda, gamma: Mapping, net: Network = EMPTY_NET) -> Event:
    return Event([apply_lambda(f, v, gamma, net) for v in event_of(gamma, x)])


def _pairs(op: str, ev: Event):
    for v in ev:
        if not (isinstance(v, Tuple) and len(v) == 2):
            raise ShapeError(f"{op}: expected pairs, got {format_value(v)}")
    return ev


def et_apply_lft(x: str, f: A.Lambda, gamma: Mapping, net: Network = EMPTY_NET) -> Event:
    ev = _pairs("ApplyLft", event_of(gamma, x))
    return Event([Tuple((apply_lambda(f, a, gamma, net), b)) for a, b in (v.items for v in ev)])


def et_apply_rit(x: str, f: A.Lambda, gamma: Mapping, net: Network = EMPTY_NET) -> Event:
    ev = _pairs("ApplyRit", event_of(gamma, x))
    return Event([Tuple((a, apply_lambda(f, b, gamma, net))) for a, b in (v.items for v in ev)])


def _same_length(op, a: Event, b: Event):
    if len(a) != len(b):
        raise LengthMismatchError(op, len(a), len(b))


def et_merge(x1: str, x2: str, gamma: Mapping) -> Event:
    a, b = event_of(gamma, x1), event_of(gamma, x2)
    _same_length("Merge", a, b)
    return Event([Tuple((v, w)) for v, w in zip(a, b)])


def _is_true(r) -> bool:
    if isinstance(r, Int) and r.n in (0, 1):
        return r.n == 1
    raise ShapeError(f"Filter: predicate returned {format_value(r)}, expected 0 or 1")


def et_filter(x: str, f: A.Lambda, gamma: Mapping, net: Network = EMPTY_NET) -> Event:
    ev = event_of(gamma, x)
    keep = {i for i, v in enumerate(ev) if _is_true(apply_lambda(f, v, gamma, net))}
    return Event([v for i, v in enumerate(ev) if i in keep])


def et_once(x: str, n: int, gamma: Mapping) -> Event:
    if n < 1:
        raise EvalError(f"Once: count must be positive, got {n}")
    ev = event_of(gamma, x)
    if len(ev) != 1:
        raise ShapeError(f"Once: {x} must hold a single value, holds {len(ev)}")
    return Event(ev.items * n)


def _running_unions(start: ActionSet, items) -> list:
    out, acc = [], start
    for v in items:
        acc = acc.union(v)
        out.append(acc)
    return out


def et_mix_fst(actions: ActionSet, x1: str, x2: str, gamma: Mapping) -> Event:
    a, b = event_of(gamma, x1), event_of(gamma, x2)
    _same_length("MixFst", a, b)
    return Event([Tuple((s, w)) for s, w in zip(_running_unions(actions, a), b)])


def et_mix_snd(actions: ActionSet, x1: str, x2: str, gamma: Mapping) -> Event:
    a, b = event_of(gamma, x1), event_of(gamma, x2)
    _same_length("MixSnd", a, b)
    return Event([Tuple((v, s)) for v, s in zip(a, _running_unions(actions, b))])


def et_mak_forw_rule(x: str, gamma: Mapping) -> RuleList:
    out = []
    for v in event_of(gamma, x):
        if not (isinstance(v, Tuple) and len(v) == 3):
            raise ShapeError(f"MakForwRule: expected (switch, port, pattern), got {format_value(v)}")
        sw, port, pat = v.items
        if isinstance(pat, Packet):
            pat = Exact(pat)
        if not (isinstance(sw, SwitchId) and isinstance(port, (Int, Port)) and port.n >= 0
                and isinstance(pat, PATTERN_TYPES)):
            raise ShapeError(f"MakForwRule: expected (switch, port, pattern), got {format_value(v)}")
        out.append(Tuple((sw, Rule(pat, (SendOut(port.n),)))))
    return RuleList(tuple(out))


def et_make_rule(x: str, gamma: Mapping) -> RuleList:
    out = []
    for v in event_of(gamma, x):
        if not (isinstance(v, Tuple) and len(v) == 3 and isinstance(v[0], PATTERN_TYPES)
                and isinstance(v[1], ACTION_TYPES)):
            raise ShapeError(f"MakeRule: expected (pattern, action, _), got {format_value(v)}")
        out.append(Rule(v[0], (v[1],)))
    return RuleList(tuple(out))


def eval_transformer(et, gamma: Mapping, net: Network):
    if isinstance(et, A.IntLit):
        return Event([Int(et.n)])
    if isinstance(et, A.Ask):
        return run_query(et.query, net)
    if isinstance(et, A.Lift):
        return et_lift(et.var, et.fn, gamma, net)
    if isinstance(et, A.ApplyLft):
        return et_apply_lft(et.var, et.fn, gamma, net)
    if isinstance(et, A.ApplyRit):
        return et_apply_rit(et.var, et.fn, gamma, net)
    if isinstance(et, A.Merge):
        return et_merge(et.left, et.right, gamma)
    if isinstance(et, A.MixFst):
        return et_mix_fst(et.actions, et.left, et.right, gamma)
    if isinstance(et, A.MixSnd):
        return et_mix_snd(et.actions, et.left, et.right, gamma)
    if isinstance(et, A.Filter):
        return et_filter(et.var, et.fn, gamma, net)
    if isinstance(et, A.Once):
        return et_once(et.var, et.count, gamma)
    if isinstance(et, A.MakForwRule):
        return et_mak_forw_rule(et.var, gamma)
    if isinstance(et, A.MakeRule):
        return et_make_rule(et.var, gamma)
    raise TypeError(f"not an event transformer: {et!r}")


# -- statements ----------------------------------------------------------------


@dataclass(frozen=True)
class TraceEntry:
    rule: str
    stmt: str
    state: NetState


@dataclass
class StepTrace:
    initial: NetState
    entries: list = field(default_factory=list)

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def rules(self) -> list:
        return [e.rule for e in self.entries]


class _Run:
    def __init__(self, net, budget, miss_action, trace):
        self.net = net
        self.budget = budget
        self.miss_action = miss_action
        self.trace = trace
        self.steps = 0

    def tick(self, rule, s, st):
        self.steps += 1
        if self.steps > self.budget:
            raise BudgetExceededError(self.budget)
        if self.trace is not None:
            self.trace.entries.append(TraceEntry(rule, s if isinstance(s, str) else brief_stmt(s), st))
        return st

    def exec(self, s, st: NetState) -> NetState:
        if isinstance(s, A.Assign):
            u = eval_transformer(s.et, st.gamma, self.net)
            return self.tick("Assgn", s, st.replace(gamma={**st.gamma, s.var: u}))
        if isinstance(s, A.Seq):
            mid = self.exec(s.first, st)
            return self.tick("seq", s, self.exec(s.rest, mid))
        if isinstance(s, A.AddRules):
            entries = as_rule_assignment(lookup(st.gamma, s.var))
            return self.tick("Addrl", s, st.replace(ir=add_rule_assignments(st.ir, entries)))
        if isinstance(s, A.Register):
            return self.tick("Reg", s, st.replace(sigma=merge_flow_tables(st.sigma, st.ir), ir=()))
        if isinstance(s, A.Send):
            return self.tick("Send", s, st.replace(hist=self.send(lookup(st.gamma, s.var), st)))
        if isinstance(s, A.If):
            if truthy(lookup(st.gamma, s.var)):
                self.tick("If-true", s, st)
                return self.exec(s.then, st)
            self.tick("If-false", s, st)
            return self.exec(s.else_, st)
        if isinstance(s, A.While):
            while True:
                self.tick("While", s, st)
                if not truthy(lookup(st.gamma, s.var)):
                    return self.tick("If-false", s, st)
                self.tick("If-true", s, st)
                st = self.exec(s.body, st)
        raise TypeError(f"not a statement: {s!r}")

    def send(self, bound, st: NetState) -> dict:
        hist = st.hist
        for v in bound:
            if not (isinstance(v, Tuple) and len(v) == 3 and isinstance(v[0], SwitchId)
                    and isinstance(v[1], Packet) and isinstance(v[2], ACTION_TYPES)):
                raise ShapeError(f"Send: expected (switch, packet, action), got {format_value(v)}")
            sw, pk, action = v.items
            if not self.net.has_switch(sw):
                raise ShapeError(f"Send: unknown switch {sw.name}")
            hist = inject(self.net, st.sigma, hist, sw, pk, action, self.miss_action)
        return hist


def exec_stmt(s: A.Stmt, st: NetState, net: Network = EMPTY_NET, *,
              budget: int = DEFAULT_BUDGET, miss_action=SendController(),
              trace: Optional[StepTrace] = None) -> NetState:
    return _Run(net, budget, miss_action, trace).exec(s, st)


def run_program(p: A.Program, net: Network, initial_bindings: Optional[Mapping] = None, *,
                budget: int = DEFAULT_BUDGET, miss_action=SendController()):
    """Bind the initial store, evaluate the definitions' queries, then run the body."""
    st = NetState(gamma=dict(initial_bindings or {}))
    trace = StepTrace(st)
    run = _Run(net, budget, miss_action, trace)
    seen = set()
    for name, q in p.defs:
        if name in seen:
            raise EvalError(f"variable {name!r} defined twice")
        seen.add(name)
        st = run.tick("Def", f"{name} = {format_query(q)};",
                      st.replace(gamma={**st.gamma, name: run_query(q, net)}))
    st = run.exec(p.body, st)
    return st, trace
