"""Command-line driver: ``impnet run | compare | fuzz | check``.

Exit codes: 0 success, 1 parse error, 2 evaluation error, 3 topology error,
4 the two semantics disagree.
"""

from __future__ import annotations

import argparse
import sys
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from . import dynamic, fuzz, programs, static
from .errors import EvalError, ParseError, TopologyError
from .netsim import Network, load_topology
from .syntax import load_bindings, parse_program
from .values import Drop, NetState, SendController, format_value, switch_sort_key

EXIT_OK, EXIT_PARSE, EXIT_EVAL, EXIT_TOPOLOGY, EXIT_DISAGREE = 0, 1, 2, 3, 4
BUILTIN = "builtin:"


# -- inputs --------------------------------------------------------------------


def resolve(ref: str, suffix: str) -> Path:
    """``builtin:program1`` names a bundled file; anything else is a path."""
    if ref.startswith(BUILTIN):
        name = ref[len(BUILTIN):]
        if name.endswith(suffix):
            name = name[: -len(suffix)]
        return programs.path(name, suffix)
    return Path(ref)


def _bundled(ref: str, suffix: str) -> Optional[Path]:
    if not ref.startswith(BUILTIN):
        return None
    name = ref[len(BUILTIN):].removesuffix(".impnet")
    return programs.path(name, suffix) if programs.available(name, suffix) else None


@dataclass
class Inputs:
    program: object
    net: Network
    bindings: dict


def load_inputs(args, check_unbound: bool = False) -> Inputs:
    path = resolve(args.program, ".impnet")
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read program {path}: {exc.strerror}") from None
    bind_path = args.bind or _bundled(args.program, ".bind")
    try:
        bindings = load_bindings(resolve(str(bind_path), ".bind")) if bind_path else {}
    except OSError as exc:
        raise ParseError(f"cannot read bindings {bind_path}: {exc.strerror}") from None
    program = parse_program(text, initial=set(bindings) if check_unbound else None)
    net_path = getattr(args, "net", None) or _bundled(args.program, ".net")
    net = load_topology(resolve(str(net_path), ".net")) if net_path else Network()
    return Inputs(program, net, bindings)


def miss_action(name: str):
    return Drop() if name == "drop" else SendController()


# -- reports -------------------------------------------------------------------


@dataclass
class RunReport:
    semantics: str
    state: NetState
    steps: int
    elapsed: float
    switches: tuple

    def table_summary(self) -> list:
        names = list(self.switches)
        names += sorted((sw for sw in self.state.sigma if sw not in names), key=switch_sort_key)
        return [(sw, self.state.sigma.get(sw, ())) for sw in names]

    def history_dump(self) -> list:
        return [(sw, self.state.hist[sw]) for sw in sorted(self.state.hist, key=switch_sort_key)]

    def text(self) -> str:
        st = self.state
        out = [f"semantics: {self.semantics}", f"steps: {self.steps}",
               f"elapsed: {self.elapsed:.4f} s", "flow tables:"]
        for sw, rules in self.table_summary():
            out.append(f"  {sw.name}: [{', '.join(format_value(r) for r in rules)}]")
        staged = ", ".join(f"({sw.name}, {format_value(r)})" for sw, r in st.ir)
        out.append(f"staged rules: [{staged}]")
        out.append("variables:")
        for name in sorted(st.gamma):
            out.append(f"  {name} = {format_value(st.gamma[name])}")
        out.append("history:")
        for sw, entries in self.history_dump():
            shown = ", ".join(f"({format_value(pk)}, {format_value(a)})" for pk, a in entries)
            out.append(f"  {sw.name}: [{shown}]")
        return "\n".join(out) + "\n"

    def tsv(self) -> str:
        st = self.state
        rows = ["cell\tkey\tindex\tvalue"]
        for sw, rules in self.table_summary():
            rows += [f"sigma\t{sw.name}\t{i}\t{format_value(r)}" for i, r in enumerate(rules)]
        rows += [f"ir\t{sw.name}\t{i}\t{format_value(r)}" for i, (sw, r) in enumerate(st.ir)]
        for name in sorted(st.gamma):
            rows.append(f"gamma\t{name}\t0\t{format_value(st.gamma[name])}")
        for sw, entries in self.history_dump():
            rows += [f"hist\t{sw.name}\t{i}\t{format_value(pk, full_packets=True)}\t{format_value(a)}"
                     for i, (pk, a) in enumerate(entries)]
        return "\n".join(rows) + "\n"


def _state_delta(before: NetState, after: NetState) -> str:
    parts = []
    for name in sorted(set(before.gamma) | set(after.gamma)):
        if before.gamma.get(name) != after.gamma.get(name):
            parts.append(f"{name} = {format_value(after.gamma[name])}")
    if before.ir != after.ir:
        parts.append(f"ir has {len(after.ir)}")
    for sw in sorted(set(before.sigma) | set(after.sigma), key=switch_sort_key):
        if before.sigma.get(sw) != after.sigma.get(sw):
            parts.append(f"{sw.name} holds {len(after.sigma[sw])} rules")
    for sw in sorted(set(before.hist) | set(after.hist), key=switch_sort_key):
        if before.hist.get(sw) != after.hist.get(sw):
            parts.append(f"history {sw.name} has {len(after.hist[sw])}")
    return "; ".join(parts) or "no change"


def format_static_trace(trace: static.StepTrace) -> list:
    lines, prev = [], trace.initial
    for i, e in enumerate(trace.entries):
        lines.append(f"{i} {e.rule} {e.stmt} | {_state_delta(prev, e.state)}")
        prev = e.state
    return lines


def execute(inputs: Inputs, semantics: str, budget: int, miss, trace: bool):
    """Run one program; returns the report and the rendered trace lines."""
    t0 = time.perf_counter()
    if semantics == "static":
        state, tr = static.run_program(inputs.program, inputs.net, inputs.bindings,
                                       budget=budget, miss_action=miss)
        steps = len(tr)
        lines = format_static_trace(tr) if trace else []
    else:
        conf, log = dynamic.run_program_dynamic(inputs.program, inputs.net, inputs.bindings,
                                                budget=budget, miss_action=miss)
        state = conf.as_state()
        steps = len(log)
        lines = [dynamic.format_step(i, s) for i, s in enumerate(log)] if trace else []
    elapsed = time.perf_counter() - t0
    return RunReport(semantics, state, steps, elapsed, inputs.net.switch_ids), lines


# -- commands ------------------------------------------------------------------


def cmd_run(args, out) -> int:
    inputs = load_inputs(args)
    report, lines = execute(inputs, args.semantics, args.budget, miss_action(args.miss_action),
                            args.trace)
    for line in lines:
        print(line, file=out)
    print(report.tsv() if args.format == "tsv" else report.text(), end="", file=out)
    return EXIT_OK


def cmd_compare(args, out) -> int:
    inputs = load_inputs(args)
    c = fuzz.compare_semantics(inputs.program, inputs.net, inputs.bindings, budget=args.budget,
                               miss_action=miss_action(args.miss_action))
    if not c.agree:
        print("semantics disagree:", file=out)
        for line in c.diff:
            print(f"  {line}", file=out)
        return EXIT_DISAGREE
    if c.static_outcome[0] == "error":
        raise EvalError(c.static_outcome[2])
    print("semantics agree", file=out)
    return EXIT_OK


def cmd_fuzz(args, out) -> int:
    if args.count <= 0:
        print("fuzz: 0 cases", file=out)
        return EXIT_OK
    if args.workers > 1:
        results = fuzz.run_fuzz(args.seed, args.count, args.max_size, args.workers)
        bad = next((r for r in results if not r.comparison.agree), None)
    else:
        bad = None
        for i in range(args.count):
            r = fuzz.fuzz_one(args.seed, i, args.max_size, budget=args.budget)
            if not r.comparison.agree:
                bad = r
                break
    if bad is None:
        print(f"fuzz: {args.count} cases, seed {args.seed}, all agree", file=out)
        return EXIT_OK
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    stem = outdir / f"fuzz-seed{args.seed}-case{bad.index}"
    stem.with_suffix(".impnet").write_text(fuzz.reproducer_text(bad), encoding="utf-8")
    stem.with_suffix(".net").write_text(bad.topology, encoding="utf-8")
    print(f"fuzz: case {bad.index} disagrees; reproducer written to {stem}.impnet", file=out)
    for line in bad.comparison.diff:
        print(f"  {line}", file=out)
    return EXIT_DISAGREE


def cmd_check(args, out) -> int:
    inputs = load_inputs(args, check_unbound=True)
    body = inputs.program.body
    print(f"ok: {len(inputs.program.defs)} definitions, "
          f"{_count_stmts(body)} statements", file=out)
    return EXIT_OK


def _count_stmts(s) -> int:
    from .syntax import ast as A

    if isinstance(s, A.Seq):
        return _count_stmts(s.first) + _count_stmts(s.rest)
    if isinstance(s, A.If):
        return 1 + _count_stmts(s.then) + _count_stmts(s.else_)
    if isinstance(s, A.While):
        return 1 + _count_stmts(s.body)
    return 1


# -- argument parsing ----------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="impnet", description="Run and cross-check ImpNet programs.")
    sub = p.add_subparsers(dest="command", required=True)

    def program_args(sp, net=True):
        sp.add_argument("program", help="program file, or builtin:program1|program2|program3")
        if net:
            sp.add_argument("--net", help="topology file (default: none, or the bundled one)")
        sp.add_argument("--bind", help="initial bindings file")

    def eval_args(sp):
        sp.add_argument("--budget", type=int, default=static.DEFAULT_BUDGET,
                        help="maximum number of rule applications")
        sp.add_argument("--miss-action", choices=("controller", "drop"), default="controller",
                        help="what a switch does with a packet no rule matches")

    run = sub.add_parser("run", help="run a program under one semantics")
    program_args(run)
    eval_args(run)
    run.add_argument("--semantics", choices=("static", "dynamic"), default="static")
    run.add_argument("--trace", action="store_true", help="print every step")
    run.add_argument("--format", choices=("text", "tsv"), default="text")
    run.set_defaults(func=cmd_run)

    cmp_ = sub.add_parser("compare", help="run both semantics and compare final states")
    program_args(cmp_)
    eval_args(cmp_)
    cmp_.set_defaults(func=cmd_compare)

    fz = sub.add_parser("fuzz", help="compare both semantics on random programs")
    fz.add_argument("--seed", type=int, default=1)
    fz.add_argument("--count", type=int, default=100)
    fz.add_argument("--max-size", type=int, default=20, help="maximum statements per program")
    fz.add_argument("--workers", type=int, default=1)
    fz.add_argument("--out", default=".", help="directory for reproducers")
    fz.add_argument("--budget", type=int, default=static.DEFAULT_BUDGET)
    fz.set_defaults(func=cmd_fuzz)

    chk = sub.add_parser("check", help="parse a program and check its variables are bound")
    program_args(chk, net=False)
    chk.set_defaults(func=cmd_check)
    return p


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, out)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except TopologyError as exc:
        print(f"topology error: {exc}", file=sys.stderr)
        return EXIT_TOPOLOGY
    except EvalError as exc:
        print(f"evaluation error: {exc}", file=sys.stderr)
        return EXIT_EVAL


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
