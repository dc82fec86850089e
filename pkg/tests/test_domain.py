import pytest
from hypothesis import given, strategies as st

from impnet.errors import ShapeError
from impnet.values import (
    BOOL, INT, PACKET, RULE, SWITCH, ActionSet, Bool, Event, InPort, Int, IpAddr, MatchAll,
    Pair, Packet, Rule, RuleList, SendAll, SendController, SrcPort, SwitchId, Triple, Tuple,
    WILDCARD, add_rule_assignments, as_rule_assignment, format_value, merge_flow_tables,
    pattern_matches, truthy, type_of,
)

from oracles import merge_tables

ID1, ID2 = SwitchId("id1"), SwitchId("id2")
R1 = Rule(SrcPort(80), (SendAll(),))
R2 = Rule(InPort(1), (SendController(),))


def pk(srcport=80, inport=1, ip="10.0.0.1", tag=""):
    return Packet(IpAddr.parse(ip), IpAddr.parse("10.0.0.9"), srcport, 22, inport, tag)


class TestTypeOf:
    def test_int(self):
        assert type_of(Int(80)) == INT

    def test_pair(self):
        assert type_of(Tuple((ID1, Int(2)))) == Pair(SWITCH, INT)

    def test_switch_int_bool_triple(self):
        assert type_of(Tuple((ID1, Int(2), Bool(True)))) == Triple()

    def test_longer_tuples_nest_pairs(self):
        t = type_of(Tuple((ID1, Int(2), Int(3))))
        assert t == Pair(SWITCH, Pair(INT, INT))

    def test_every_value_has_a_type(self):
        for v in (Int(1), Bool(False), ID1, pk(), R1, RuleList(()), ActionSet(), WILDCARD,
                  MatchAll(), SendAll()):
            assert type_of(v) is not None
        assert type_of(Bool(True)) == BOOL
        assert type_of(pk()) == PACKET
        assert type_of(R1) == RULE

    def test_tuples_need_two_items(self):
        with pytest.raises(ValueError):
            Tuple((Int(1),))


class TestEvent:
    def test_homogeneous(self):
        with pytest.raises(ShapeError):
            Event([Int(1), ID1])

    def test_empty_event_allowed(self):
        assert len(Event()) == 0

    @given(st.lists(st.integers(), max_size=20))
    def test_items_share_a_type(self, xs):
        ev = Event(Int(x) for x in xs)
        assert len({type_of(v) for v in ev}) <= 1


class TestPatternMatches:
    def test_srcport_hit(self):
        assert pattern_matches(SrcPort(80), pk(srcport=80))

    def test_inport_miss(self):
        assert not pattern_matches(InPort(1), pk(inport=2))

    @given(st.integers(0, 65535), st.integers(0, 64))
    def test_matchall(self, sp, ip):
        assert pattern_matches(MatchAll(), pk(srcport=sp, inport=ip))

    @given(st.integers(0, 100), st.integers(0, 100))
    def test_depends_only_on_headers(self, a, b):
        p1, p2 = pk(srcport=a, tag="one"), pk(srcport=a, tag="two")
        assert pattern_matches(SrcPort(b), p1) == pattern_matches(SrcPort(b), p2) == (a == b)


class TestMergeFlowTables:
    def test_both_switches_get_the_rules(self):
        ir = ((ID1, R1), (ID1, R2), (ID2, R1), (ID2, R2))
        assert merge_flow_tables({}, ir) == {ID1: (R1, R2), ID2: (R1, R2)}

    def test_empty_ir_is_identity(self):
        sigma = {ID1: (R1,)}
        assert merge_flow_tables(sigma, ()) == sigma

    def test_duplicates_appended_once(self):
        ir = ((ID2, R1), (ID1, R2), (ID2, R1), (ID1, R2), (ID1, R1))
        expected = merge_tables({}, [("id2", R1), ("id1", R2), ("id2", R1), ("id1", R2), ("id1", R1)])
        got = {sw.name: list(rs) for sw, rs in merge_flow_tables({}, ir).items()}
        assert got == expected

    def test_natural_switch_order(self):
        s2, s10 = SwitchId("s2"), SwitchId("s10")
        out = merge_flow_tables({}, ((s10, R1), (s2, R2)))
        assert list(out) == [s2, s10]

    @given(st.lists(st.tuples(st.sampled_from(["id1", "id2", "id10"]), st.sampled_from([0, 1])),
                    max_size=12))
    def test_matches_reference_fold(self, pairs):
        rules = (R1, R2)
        ir = tuple((SwitchId(s), rules[i]) for s, i in pairs)
        got = {sw.name: list(rs) for sw, rs in merge_flow_tables({}, ir).items()}
        assert got == merge_tables({}, [(s, rules[i]) for s, i in pairs])

    @given(st.lists(st.tuples(st.sampled_from(["a", "b"]), st.sampled_from([0, 1])), max_size=6))
    def test_idempotent_on_empty_reservoir(self, pairs):
        ir = tuple((SwitchId(s), (R1, R2)[i]) for s, i in pairs)
        once = merge_flow_tables({}, ir)
        assert merge_flow_tables(once, ()) == once


class TestRuleAssignments:
    def test_set_semantics(self):
        ir = add_rule_assignments((), [(ID1, R1), (ID1, R1)])
        assert ir == ((ID1, R1),)
        assert add_rule_assignments(ir, [(ID1, R1)]) == ir

    def test_flattens_rule_lists(self):
        bound = Event([Tuple((ID1, RuleList((R1, R2))))])
        assert as_rule_assignment(bound) == [(ID1, R1), (ID1, R2)]

    def test_rejects_non_switch(self):
        with pytest.raises(ShapeError):
            as_rule_assignment(Event([Tuple((Int(1), R1))]))


class TestTruthy:
    def test_singleton_int(self):
        assert truthy(Event([Int(2)]))
        assert not truthy(Event([Int(0)]))

    def test_other_events_by_emptiness(self):
        assert truthy(Event([ID1]))
        assert not truthy(Event())
        assert truthy(Event([Int(0), Int(0)]))
        assert not truthy(RuleList(()))


def test_format_matches_trace_notation():
    assert format_value(RuleList((R1, R2))) == "[(srcport(80), [sendall]), (inport(1), [sendcontroller])]"
    ev = Event([Tuple((SrcPort(80), SendAll(), WILDCARD))])
    assert format_value(ev) == "((srcport(80), sendall, _))"
