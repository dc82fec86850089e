"""Acceptance checks, one recorded PASS/FAIL line per criterion.

Run under pytest (lines appear in the terminal summary) or directly with
``python tests/test_acceptance.py``.
"""

import io
import random
import sys
import time
from contextlib import contextmanager
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

from impnet import cli, programs  # noqa: E402
from impnet.dynamic import run_program_dynamic, verify_steps  # noqa: E402
from impnet.fuzz import random_case  # noqa: E402
from impnet.errors import ImpNetError  # noqa: E402
from impnet.netsim import load_topology, parse_topology  # noqa: E402
from impnet.static import (  # noqa: E402
    et_apply_lft, et_apply_rit, et_filter, et_lift, et_mak_forw_rule, et_make_rule, et_merge,
    et_mix_fst, et_mix_snd, et_once, exec_stmt, run_program,
)
from impnet.syntax import ast as A  # noqa: E402
from impnet.syntax import parse_bindings, parse_lambda, parse_program  # noqa: E402
from impnet.values import (  # noqa: E402
    WILDCARD, ActionSet, Drop, Event, Exact, InPort, Int, IpAddr, NetState, Packet, Port, Rule,
    RuleList, SendAll, SendController, SendOut, SrcIp, SrcPort, SwitchId, Tuple,
)

from oracles import (  # noqa: E402
    filter_by_index_set, firewall_tables, is_subsequence, merge_tables, running_unions,
)

RESULTS = {}
TITLES = {
    1: "golden trace, Program 1",
    2: "golden trace, Program 2",
    3: "Program 3 firewall",
    4: "static/dynamic equivalence over fuzz seed 1",
    5: "transformer property suite",
    6: "rewriting invariants",
    7: "statement-rule unit suite",
}


@contextmanager
def criterion(n, limit=None):
    t0 = time.perf_counter()
    ok = False
    try:
        yield
        elapsed = time.perf_counter() - t0
        assert limit is None or elapsed < limit, f"took {elapsed:.2f} s, limit {limit} s"
        ok = True
    finally:
        elapsed = time.perf_counter() - t0
        prev = RESULTS.get(n, (True, 0.0))
        RESULTS[n] = (prev[0] and ok, prev[1] + elapsed)


def report_lines():
    lines = []
    for n, title in TITLES.items():
        if n not in RESULTS:
            continue
        ok, elapsed = RESULTS[n]
        lines.append(f"{'PASS' if ok else 'FAIL'} criterion {n}: {title} ({elapsed:.2f} s)")
    return lines


def bundled(name):
    p = parse_program(programs.path(name).read_text())
    net = load_topology(programs.path(name, ".net"))
    bind_path = programs.path(name, ".bind")
    bind = parse_bindings(bind_path.read_text()) if bind_path.exists() else {}
    return p, net, bind


ID1, ID2 = SwitchId("id1"), SwitchId("id2")


# -- 1 -------------------------------------------------------------------------


def test_criterion_1_program1_golden():
    with criterion(1, limit=1.0):
        p, net, bind = bundled("program1")
        assert len(net.switch_ids) == 2
        final, trace = run_program(p, net, bind)
        rules = (Rule(SrcPort(80), (SendAll(),)), Rule(InPort(1), (SendController(),)))
        assert final.sigma == {ID1: rules, ID2: rules}
        assert final.ir == ()
        reg = next(e for e in trace if e.rule == "Reg")
        assert reg.state.sigma == {ID1: rules, ID2: rules} and reg.state.ir == ()


# -- 2 -------------------------------------------------------------------------


def test_criterion_2_program2_golden():
    with criterion(2, limit=1.0):
        p, net, bind = bundled("program2")
        (sw1, pk1), (sw2, pk2) = net.pending
        assert (sw1, sw2) == (ID1, ID2)
        ip1, ip2 = pk1.srcip, pk2.srcip
        pr1, pr2 = Port(pk1.inport), Port(pk2.inport)
        z = Event([ID1, ID2])
        forw = RuleList((Tuple((ID1, Rule(Exact(pk1), (SendOut(pr1.n),)))),
                         Tuple((ID2, Rule(Exact(pk2), (SendOut(pr2.n),))))))
        blocks = [
            ("Assgn", {"z": z, "y": Event([Tuple((ip1, pk1)), Tuple((ip2, pk2))])}),
            ("Assgn", {"z": z, "y": Event([Tuple((pr1, pk1)), Tuple((pr2, pk2))])}),
            ("Assgn", {"z": z, "y": Event([Tuple((ID1, pr1, pk1)), Tuple((ID2, pr2, pk2))])}),
            ("Assgn", {"z": z, "y": forw}),
            ("Addrl", {"z": z, "y": forw}),
            ("Reg", {"z": z, "y": forw}),
        ]
        final, trace = run_program(p, net, bind)
        stmt_entries = [e for e in trace if e.rule not in ("seq", "Def")]
        assert len(stmt_entries) == 6
        for entry, (rule, gamma) in zip(stmt_entries, blocks):
            assert entry.rule == rule
            assert entry.state.gamma == gamma
        assert stmt_entries[4].state.ir == ((ID1, forw.items[0][1]), (ID2, forw.items[1][1]))
        assert final.sigma == {ID1: (forw.items[0][1],), ID2: (forw.items[1][1],)}
        assert final.ir == ()


# -- 3 -------------------------------------------------------------------------


def test_criterion_3_firewall():
    with criterion(3, limit=1.0):
        p, net, bind = bundled("program3")
        final, _ = run_program(p, net, bind)
        got = {}
        for sw, rules in final.sigma.items():
            for r in rules:
                assert isinstance(r.pattern, SrcIp)
                assert r.actions == (Drop(),)
                got.setdefault(sw.name, []).append(("srcip", str(r.pattern.addr.addr), "drop"))
        expected = firewall_tables([s.name for s in net.switch_ids],
                                   [str(ip.addr) for ip in net.prohibited_ips])
        assert got == expected
        assert sum(len(v) for v in got.values()) == len(net.prohibited_ips)
        assert final.ir == ()


# -- 4 -------------------------------------------------------------------------


def test_criterion_4_fuzz_equivalence():
    with criterion(4, limit=60.0):
        out = io.StringIO()
        code = cli.main(["fuzz", "--seed", "1", "--count", "1000", "--max-size", "20"], out)
        assert code == 0, out.getvalue()


# -- 5 -------------------------------------------------------------------------

CASES = 10_000
SWITCHES = [SwitchId(f"s{i}") for i in range(5)]
ACTIONS = [SendAll(), SendController(), Drop(), SendOut(1), SendOut(2)]


def _rand_event(rng, n):
    return Event([Int(rng.randint(0, 99)) for _ in range(n)])


def test_criterion_5_transformer_properties():
    with criterion(5, limit=30.0):
        rng = random.Random(5)
        inc = parse_lambda("\\t. t + 1")
        ident = parse_lambda("\\t. t")
        pair = parse_lambda("\\t. (t, t)")
        thresholds = [parse_lambda(f"\\t. t > {k}") for k in range(0, 100, 10)]

        for _ in range(CASES):  # Lift
            n = rng.randint(0, 8)
            x = _rand_event(rng, n)
            got = et_lift("x", rng.choice([inc, ident, pair]), {"x": x})
            assert len(got) == n

        for op in (et_apply_lft, et_apply_rit):
            for _ in range(CASES):
                n = rng.randint(0, 8)
                xs = [(rng.randint(0, 99), rng.choice(SWITCHES)) for _ in range(n)]
                x = Event([Tuple((Int(a), s) if op is et_apply_lft else (s, Int(a)))
                           for a, s in xs])
                got = op("x", inc, {"x": x})
                assert len(got) == n
                for (a, s), t in zip(xs, got):
                    assert t.items == ((Int(a + 1), s) if op is et_apply_lft else (s, Int(a + 1)))

        for _ in range(CASES):  # Merge
            n = rng.randint(0, 8)
            a, b = _rand_event(rng, n), Event(rng.choices(SWITCHES, k=n))
            got = et_merge("a", "b", {"a": a, "b": b})
            assert len(got) == n and [t.items for t in got] == list(zip(a, b))

        for which in ("fst", "snd"):
            for _ in range(CASES):
                n = rng.randint(0, 8)
                acts = rng.choices(ACTIONS, k=n)
                start = set(rng.sample(ACTIONS, rng.randint(0, 2)))
                other = _rand_event(rng, n)
                gamma = {"a": Event(acts), "w": other}
                if which == "fst":
                    got = et_mix_fst(ActionSet(frozenset(start)), "a", "w", gamma)
                    sets = [t[0].members for t in got]
                    assert [t[1] for t in got] == list(other)
                else:
                    got = et_mix_snd(ActionSet(frozenset(start)), "w", "a", gamma)
                    sets = [t[1].members for t in got]
                    assert [t[0] for t in got] == list(other)
                assert len(got) == n
                assert sets == running_unions(start, acts)

        for _ in range(CASES):  # Filter
            n = rng.randint(0, 10)
            items = [rng.randint(0, 99) for _ in range(n)]
            k = rng.randrange(len(thresholds))
            got = et_filter("x", thresholds[k], {"x": Event([Int(v) for v in items])})
            got_ints = [v.n for v in got]
            assert got_ints == filter_by_index_set(items, lambda v: v > k * 10)
            assert is_subsequence(got_ints, items)

        for _ in range(CASES):  # Once
            n = rng.randint(1, 12)
            v = rng.choice([Int(rng.randint(0, 99)), rng.choice(SWITCHES), rng.choice(ACTIONS)])
            got = et_once("x", n, {"x": Event([v])})
            assert len(got) == n and all(item == v for item in got)

        for _ in range(CASES):  # MakForwRule
            n = rng.randint(0, 6)
            rows = [(rng.choice(SWITCHES), rng.randint(0, 8), rng.randint(1, 9999)) for _ in range(n)]
            x = Event([Tuple((s, Port(pr), SrcPort(sp))) for s, pr, sp in rows])
            got = et_mak_forw_rule("x", {"x": x})
            assert len(got) == n
            for (s, pr, sp), t in zip(rows, got):
                assert t.items == (s, Rule(SrcPort(sp), (SendOut(pr),)))

        for _ in range(CASES):  # MakeRule
            n = rng.randint(0, 6)
            rows = [(rng.randint(1, 9999), rng.choice(ACTIONS)) for _ in range(n)]
            x = Event([Tuple((SrcPort(sp), a, WILDCARD)) for sp, a in rows])
            got = et_make_rule("x", {"x": x})
            assert len(got) == n
            assert list(got) == [Rule(SrcPort(sp), (a,)) for sp, a in rows]


# -- 6 -------------------------------------------------------------------------


def test_criterion_6_rewriting_invariants():
    with criterion(6):
        total = 0
        runs = [bundled(name) for name in programs.NAMES]
        for i in range(1000):
            text, topo = random_case(1, i, 20)
            runs.append((parse_program(text, initial=()), parse_topology(topo), {}))
        completed = 0
        for p, net, bind in runs:
            try:
                final, steps = run_program_dynamic(p, net, bind)
            except ImpNetError:
                continue
            problems = verify_steps(steps, final)
            assert problems == [], problems[:5]
            total += len(steps)
            completed += 1
        assert completed >= 3 and total > 10_000


# -- 7 -------------------------------------------------------------------------

R = Rule(SrcPort(80), (SendAll(),))


def _pk(tag):
    return Packet(IpAddr.parse("10.0.0.1"), IpAddr.parse("10.0.0.9"), 80, 22, 1, tag)


def test_criterion_7_assgn():
    with criterion(7):
        st0 = NetState(sigma={ID1: (R,)}, gamma={"a": Event([ID1])}, ir=((ID2, R),))
        st1 = exec_stmt(A.Assign("x", A.Lift("a", parse_lambda("\\t. (t, 1)"))), st0)
        assert st1 == NetState(sigma=st0.sigma, gamma={"a": Event([ID1]),
                                                       "x": Event([Tuple((ID1, Int(1)))])},
                               ir=st0.ir)


def test_criterion_7_seq():
    with criterion(7):
        s1, s2 = A.Assign("x", A.IntLit(5)), A.AddRules("z")
        st0 = NetState(gamma={"z": Event([Tuple((ID1, R))])})
        assert exec_stmt(A.seq(s1, s2), st0) == exec_stmt(s2, exec_stmt(s1, st0))
        assert exec_stmt(A.seq(s1, s2), st0) == NetState(
            gamma={"z": st0.gamma["z"], "x": Event([Int(5)])}, ir=((ID1, R),))


def test_criterion_7_addrl():
    with criterion(7):
        z = Event([Tuple((ID1, R)), Tuple((ID2, R))])
        st0 = NetState(sigma={ID1: (R,)}, gamma={"z": z}, ir=())
        st1 = exec_stmt(A.AddRules("z"), st0)
        assert st1 == NetState(sigma=st0.sigma, gamma=st0.gamma, ir=((ID1, R), (ID2, R)))


def test_criterion_7_reg():
    with criterion(7):
        st0 = NetState(gamma={"q": Event()}, ir=((ID1, R), (ID2, R)))
        st1 = exec_stmt(A.Register(), st0)
        expected = merge_tables({}, [("id1", R), ("id2", R)])
        assert {sw.name: list(v) for sw, v in st1.sigma.items()} == expected
        assert st1.gamma == st0.gamma
        assert st1.ir == ()


def test_criterion_7_send():
    with criterion(7):
        net = parse_topology("switch id1 ports 1\nswitch id2 ports 1")
        p1 = _pk("pk1")
        st0 = NetState(sigma={ID1: (R,)}, gamma={"x": Event([Tuple((ID1, p1, SendAll()))])})
        st1 = exec_stmt(A.Send("x"), st0, net)
        assert (p1, SendAll()) in st1.hist[ID1]
        assert (st1.sigma, st1.gamma, st1.ir) == (st0.sigma, st0.gamma, st0.ir)


if __name__ == "__main__":
    failed = 0
    for name, fn in list(globals().items()):
        if name.startswith("test_criterion_"):
            try:
                fn()
            except Exception as exc:  # noqa: BLE001
                failed += 1
                print(f"{name}: {type(exc).__name__}: {exc}", file=sys.stderr)
    print("\n".join(report_lines()))
    sys.exit(1 if failed else 0)
