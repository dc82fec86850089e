import random

import pytest
from hypothesis import given, settings, strategies as st

import astgen
from impnet import programs
from impnet.errors import ParseError, UnboundVariableError
from impnet.netsim import Packets, ProhibtedIps, SourceIps, Switches
from impnet.syntax import ast as A
from impnet.syntax import core as K
from impnet.syntax import (
    desugar, format_core, parse_bindings, parse_lambda, parse_program, parse_stmt, parse_value,
    pretty_print, resugar,
)
from impnet.syntax.printer import format_stmt
from impnet.values import (
    WILDCARD, ActionSet, Drop, Event, InPort, Int, IpAddr, MatchAll, Rule, RuleList, SendAll,
    SendController, SrcIp, SrcPort, Tuple,
)


def builtin(name):
    return parse_program(programs.path(name).read_text())


class TestParse:
    def test_single_assignment(self):
        assert parse_stmt("x := MakeRule(w);") == A.Assign("x", A.MakeRule("w"))

    def test_program2_has_six_statements(self):
        p = builtin("program2")
        stmts = A.flatten(p.body)
        assert len(stmts) == 6
        assert [type(s).__name__ for s in stmts] == [
            "Assign", "Assign", "Assign", "Assign", "AddRules", "Register"]
        assert p.defs == (("z", Switches()),)

    def test_missing_semicolon(self):
        with pytest.raises(ParseError) as info:
            parse_program("Register Register")
        assert info.value.token == 2
        assert (info.value.line, info.value.column) == (1, 10)

    def test_error_position_on_later_line(self):
        with pytest.raises(ParseError) as info:
            parse_program("z = Switches;\n>>\nx := Lift(z, t);\n")
        assert info.value.line == 3

    def test_unbound_variable_with_declared_initials(self):
        with pytest.raises(UnboundVariableError) as info:
            parse_program("z = Switches;\n>>\ny := MakeRule(q);", initial=set())
        assert info.value.name == "q"

    def test_initial_bindings_count_as_bound(self):
        parse_program(programs.path("program1").read_text(), initial={"x"})

    def test_defs_must_be_distinct(self):
        with pytest.raises(ParseError):
            parse_program("a = Switches;\na = SourceIps;\n>>\nRegister;")

    def test_reserved_word_as_variable(self):
        with pytest.raises(ParseError):
            parse_program(">> Register := 1;")

    def test_if_and_while(self):
        s = parse_stmt("if (x) then { Register; } else { AddRules(y); Register; }\n"
                       "while (x) do { x := 0; }")
        first, second = A.flatten(s)
        assert first == A.If("x", A.Register(), A.seq(A.AddRules("y"), A.Register()))
        assert second == A.While("x", A.Assign("x", A.IntLit(0)))

    def test_once_needs_positive_count(self):
        with pytest.raises(ParseError):
            parse_stmt("y := Once(x, 0);")

    def test_comments_ignored(self):
        assert parse_stmt("# nothing\nRegister; # done") == A.Register()

    def test_all_transformers(self):
        text = ("a := 3; a := Lift(a, \\t. t + 1); a := ApplyLft(a, \\t. t); "
                "a := ApplyRit(a, \\t. t); a := Merge(a, b); a := MixFst({sendall}, a, b); "
                "a := MixSnd(a, {}, b); a := Filter(a, \\t. t > 2); a := Once(a, 3); "
                "a := MakForwRule(a); a := MakeRule(a); a := SourceIps;")
        kinds = [type(s.et).__name__ for s in A.flatten(parse_stmt(text))]
        assert kinds == ["IntLit", "Lift", "ApplyLft", "ApplyRit", "Merge", "MixFst", "MixSnd",
                         "Filter", "Once", "MakForwRule", "MakeRule", "Ask"]


class TestLambdas:
    def test_precedence(self):
        fn = parse_lambda("\\t. t + 1 * 2 == 3")
        assert fn.body == A.BinExpr("==", A.BinExpr("+", A.Name("t"), A.BinExpr(
            "*", A.Const(Int(1)), A.Const(Int(2)))), A.Const(Int(3)))

    def test_builtin_variable_slot(self):
        fn = parse_lambda("\\t. (t, switch(t, z))")
        assert fn.body == A.TupleExpr((A.Name("t"), A.Call("switch", (A.Name("t"), A.Name("z")))))

    def test_comparisons_do_not_chain(self):
        with pytest.raises(ParseError):
            parse_lambda("\\t. 1 < 2 < 3")


class TestValues:
    def test_rule_and_rule_list(self):
        v = parse_value("[(srcport(80), [sendall]), (inport(1), [sendcontroller])]")
        assert v == RuleList((Rule(SrcPort(80), (SendAll(),)), Rule(InPort(1), (SendController(),))))

    def test_event_literal_binding(self):
        b = parse_bindings("bind x = ((srcport(80), sendall, _), (inport(1), sendcontroller, _))")
        assert b["x"] == Event([Tuple((SrcPort(80), SendAll(), WILDCARD)),
                                Tuple((InPort(1), SendController(), WILDCARD))])

    def test_binding_errors_carry_line(self):
        with pytest.raises(ParseError) as info:
            parse_bindings("bind x = (1)\nbind y = (1, id1)")
        assert info.value.line == 2

    def test_ip_pattern(self):
        assert parse_value("srcip(10.0.0.1)") == SrcIp(IpAddr.parse("10.0.0.1"))


class TestPrettyPrint:
    def test_int_assignment(self):
        assert format_stmt(A.Assign("x", A.IntLit(0))) == "x := 0;"

    @pytest.mark.parametrize("name", programs.NAMES)
    def test_round_trip_bundled(self, name):
        p = builtin(name)
        assert parse_program(pretty_print(p)) == p


# -- random ASTs ---------------------------------------------------------------

VARS = st.sampled_from(["x", "y", "z", "w1", "acc"])
FIELDS = st.sampled_from(["srcip", "dstip", "srcport", "dstport", "inport"])
CONSTS = st.sampled_from([WILDCARD, SendAll(), SendController(), Drop(), MatchAll()]) | \
    st.integers(0, 999).map(Int)


def exprs(param):
    leaf = st.one_of(CONSTS.map(A.Const), st.just(A.Name(param)), VARS.map(A.Name))

    def extend(sub):
        unary = st.sampled_from(["port", "fst", "snd", "thd", "srcip", "dstip", "srcport",
                                 "dstport", "inport", "sendout"])
        return st.one_of(
            st.lists(sub, min_size=2, max_size=3).map(lambda xs: A.TupleExpr(tuple(xs))),
            st.builds(lambda f, e: A.Call(f, (e,)), unary, sub),
            st.builds(lambda f, e, v: A.Call(f, (e, A.Name(v))),
                      st.sampled_from(["switch", "prohibit"]), sub, VARS),
            st.builds(lambda fld, e: A.Call("change", (A.Name(fld), e)), FIELDS, sub),
            st.builds(A.BinExpr, st.sampled_from(["+", "-", "*"]), sub, sub),
        )

    arith = st.recursive(leaf, extend, max_leaves=8)
    return arith | st.builds(A.BinExpr, st.sampled_from(["==", "!=", "<", "<=", ">", ">="]),
                             arith, arith)


lambdas = st.sampled_from(["t", "p"]).flatmap(lambda p: exprs(p).map(lambda b: A.Lambda(p, b)))
action_sets = st.sets(st.sampled_from([SendAll(), SendController(), Drop()])).map(
    lambda s: ActionSet(frozenset(s)))
queries = st.sampled_from([Switches(), SourceIps(), ProhibtedIps(), Packets(SrcPort(80)),
                           Packets(MatchAll())])

transformers = st.one_of(
    st.integers(0, 10**6).map(A.IntLit),
    queries.map(A.Ask),
    st.builds(A.Lift, VARS, lambdas), st.builds(A.ApplyLft, VARS, lambdas),
    st.builds(A.ApplyRit, VARS, lambdas), st.builds(A.Filter, VARS, lambdas),
    st.builds(A.Merge, VARS, VARS),
    st.builds(A.MixFst, action_sets, VARS, VARS), st.builds(A.MixSnd, VARS, action_sets, VARS),
    st.builds(A.Once, VARS, st.integers(1, 9)),
    st.builds(A.MakForwRule, VARS), st.builds(A.MakeRule, VARS),
)

simple_stmts = st.one_of(
    st.builds(A.Assign, VARS, transformers), st.builds(A.AddRules, VARS),
    st.just(A.Register()), st.builds(A.Send, VARS),
)


def _blocks(sub):
    body = st.lists(sub, min_size=1, max_size=3).map(lambda xs: A.seq(*xs))
    return st.one_of(st.builds(A.If, VARS, body, body), st.builds(A.While, VARS, body))


stmts = st.recursive(simple_stmts, _blocks, max_leaves=6)
bodies = st.lists(stmts, min_size=1, max_size=6).map(lambda xs: A.seq(*xs))
program_asts = st.builds(
    A.Program,
    st.dictionaries(st.sampled_from(["q1", "q2", "q3"]), queries, max_size=3).map(
        lambda d: tuple(d.items())),
    bodies,
)


@settings(max_examples=100, deadline=None)
@given(program_asts)
def test_print_parse_round_trip(p):
    assert parse_program(pretty_print(p)) == p


def test_print_parse_round_trip_1000_seeded():
    rng = random.Random(2024)
    for _ in range(1000):
        p = astgen.program(rng)
        assert parse_program(pretty_print(p)) == p


@settings(max_examples=60, deadline=None)
@given(program_asts)
def test_desugar_round_trip(p):
    c = desugar(p)
    assert resugar(c) == p
    assert isinstance(c, K.ProgC)


def test_desugar_injective_and_invertible():
    rng = random.Random(7)
    seen = {}
    for _ in range(1000):
        s = astgen.stmt(rng)
        c = desugar(s)
        assert resugar(c) == s
        if c in seen:
            assert seen[c] == s
        seen[c] = s


class TestDesugar:
    def test_lift(self):
        fn = parse_lambda("\\t. t")
        assert desugar(A.Lift("x", fn)) == K.LiftC(K.Var("x"), fn)
        assert format_core(desugar(A.Lift("x", fn))) == "x - \\t. t"

    def test_while(self):
        s = A.While("x", A.Register())
        assert desugar(s) == K.WhileC(K.Var("x"), K.RegC())

    def test_register_is_nullary(self):
        assert desugar(A.Register()) == K.RegC()

    def test_sequence_becomes_chain(self):
        s = A.seq(A.Register(), A.Send("x"))
        assert desugar(s) == K.Chain(K.RegC(), K.SendC(K.Var("x")))

    @pytest.mark.parametrize("name", programs.NAMES)
    def test_bundled_programs_have_no_surface_nodes(self, name):
        def walk(c):
            assert not isinstance(c, (A.Assign, A.Seq, A.If, A.While, A.Register, A.AddRules,
                                      A.Send, A.Lift, A.MakeRule, A.Merge, A.Program))
            if hasattr(c, "__dataclass_fields__") and not isinstance(c, (A.Lambda,)):
                for f in c.__dataclass_fields__:
                    v = getattr(c, f)
                    if hasattr(v, "__dataclass_fields__"):
                        walk(v)

        walk(desugar(builtin(name)))
