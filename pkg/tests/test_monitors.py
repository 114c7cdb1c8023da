"""Monitor behavior, both directly on fabricated states and via exploration."""

import pytest

import lockstep.scenarios as s
from lockstep import catalog
from lockstep.explorer import explore
from lockstep.kernel import GlobalState, ProcState, System
from lockstep.machines import DuplexChannel, MessageCell, StatusChannel
from lockstep.monitors import (LostUnread, MutualExclusion, RecipientTag,
                               SentReceivedOrder, TerminalAssert, TornValue,
                               compile_monitors)


def state(mech=None, stores=((),)):
    return GlobalState(mechs=(mech,) if mech is not None else (),
                       procs=tuple(ProcState(pc=0, store=st) for st in stores))


class TestMutualExclusion:
    mon = MutualExclusion({"markers": [[0, "cs"], [1, "cs"]]})

    def test_two_inside_is_a_hit(self):
        st = state(stores=((("cs", (1,)),), (("cs", (1,)),)))
        hits = self.mon.on_state(None, st)
        assert hits and hits[0][0] == "monitor_assert"
        assert hits[0][1] == "mutual_exclusion"
        assert "p0, p1" in hits[0][2]

    def test_one_inside_is_fine(self):
        st = state(stores=((("cs", (1,)),), (("cs", (0,)),)))
        assert self.mon.on_state(None, st) == ()

    def test_unbound_marker_is_outside(self):
        st = state(stores=((), (("cs", (1,)),)))
        assert self.mon.on_state(None, st) == ()


class TestSentReceivedOrder:
    mon = SentReceivedOrder({"mechanism": "ch"}, index=0)

    def test_prefix_ok(self):
        ch = StatusChannel(sent=((1,), (2,)), received=((1,),))
        assert self.mon.on_state(None, state(ch)) == ()

    def test_non_prefix_is_a_hit(self):
        ch = StatusChannel(sent=((1,), (2,)), received=((2,),))
        hits = self.mon.on_state(None, state(ch))
        assert hits and hits[0][1] == "sent_received_order"

    def test_terminal_requires_equality(self):
        ch = StatusChannel(sent=((1,), (2,)), received=((1,),))
        hits = self.mon.on_terminal(None, state(ch))
        assert hits and "terminated with" in hits[0][2]


class TestTornValue:
    mon = TornValue({"process": 0, "vars": ["a", "b"],
                     "allowed": [[1, 1], [2, 2]], "mechanism": "cell"})

    def test_mixed_value_is_torn(self):
        st = state(stores=((("a", 1), ("b", 2)),))
        hits = self.mon.on_state(None, st)
        assert hits and hits[0][0] == "torn_read"
        assert "(1, 2)" in hits[0][2] and "'cell'" in hits[0][2]

    def test_whole_value_is_fine(self):
        st = state(stores=((("a", 2), ("b", 2)),))
        assert self.mon.on_state(None, st) == ()

    def test_waits_for_all_vars(self):
        st = state(stores=((("a", 1),),))
        assert self.mon.on_state(None, st) == ()


class TestRecipientTag:
    mon = RecipientTag({"mechanism": "dx"}, index=0)

    def test_reading_your_own_message_is_a_hit(self):
        # fabricated: the guards never let this state arise
        dx = DuplexChannel(side_a=0, side_b=1, content=(1,), dest=1)
        prev = state(dx, stores=((), ()))
        hits = self.mon.on_event(None, prev, (0, ("read",), "dx"), prev)
        assert hits and hits[0][0] == "wrong_recipient"

    def test_intended_reader_is_fine(self):
        dx = DuplexChannel(side_a=0, side_b=1, content=(1,), dest=1)
        prev = state(dx, stores=((), ()))
        assert self.mon.on_event(None, prev, (1, ("read",), "dx"), prev) == ()

    def test_unreachable_in_the_real_mechanism(self):
        for name in ("duplex-strict", "duplex-last-message"):
            report = explore(catalog.get(name))
            assert "wrong_recipient" not in report.violation_classes


class TestTerminalAssert:
    def test_mismatch_reported(self):
        mon = TerminalAssert({"process": 0, "var": "r", "expected": [3]})
        hits = mon.on_terminal(None, state(stores=((("r", (2,)),),)))
        assert hits and "expected (3,)" in hits[0][2]

    def test_unbound_variable_reported(self):
        mon = TerminalAssert({"process": 0, "var": "r", "expected": [3]})
        hits = mon.on_terminal(None, state(stores=((),)))
        assert hits and "<unbound>" in hits[0][2]

    def test_status_token_expectation(self):
        mon = TerminalAssert({"process": 0, "var": "t", "expected": "empty"})
        assert mon.on_terminal(None, state(stores=((("t", "empty"),),))) == ()


class TestLostUnread:
    mon = LostUnread({"mechanism": "m"}, index=0)

    def event(self, prev_mech, pid=0):
        prev = state(prev_mech, stores=((), ()))
        return self.mon.on_event(None, prev, (pid, ("write", (9,)), "m"), prev)

    def test_overwriting_an_unread_message(self):
        hits = self.event(MessageCell(content=(1,), read_since_write=False))
        assert hits == [("lost_message", None, None)]

    def test_overwriting_a_read_message_is_fine(self):
        assert self.event(MessageCell(content=(1,), read_since_write=True)) == ()

    def test_first_write_is_fine(self):
        assert self.event(MessageCell()) == ()

    def test_duplex_own_outgoing(self):
        dx = DuplexChannel(side_a=0, side_b=1, content=(1,), dest=1)
        assert self.event(dx, pid=0) == [("lost_message", None, "own-outgoing")]

    def test_duplex_incoming(self):
        dx = DuplexChannel(side_a=0, side_b=1, content=(1,), dest=1)
        assert self.event(dx, pid=1) == [("lost_message", None, "incoming")]

    def test_other_mechanisms_report_plain(self):
        assert self.event(StatusChannel(content=(1,))) == [("lost_message", None, None)]


class TestCompileMonitors:
    def test_local_asserts_always_installed(self):
        sys = System(catalog.get("deadlock-direct-duplex"))  # no monitors declared
        mons = compile_monitors(sys)
        assert len(mons) == 1 and type(mons[0]).__name__ == "LocalAsserts"

    def test_scenario_monitors_follow(self):
        sys = System(catalog.get("duplex-strict"))
        kinds = [type(m).__name__ for m in compile_monitors(sys)]
        assert kinds == ["LocalAsserts", "RecipientTag", "SentReceivedOrder",
                         "LostUnread"]


class TestAssertLocalIntegration:
    def test_failed_assert_becomes_a_violation_class(self):
        sc = s.Scenario.from_parts(
            "bad-assert", 1, [s.status_channel("ch")],
            [s.process(0, s.write("ch", [1])),
             s.process(1, s.read("ch", "v"), s.assert_local("v", [2]))])
        report = explore(sc)
        assert report.violation_classes == {"monitor_assert:assert_local"}
        v = report.violations[0]
        assert v.detail == "p1.v"

    def test_passing_assert_is_silent(self):
        sc = s.Scenario.from_parts(
            "good-assert", 1, [s.status_channel("ch")],
            [s.process(0, s.write("ch", [1])),
             s.process(1, s.read("ch", "v"), s.assert_local("v", [1]))])
        assert explore(sc).violation_classes == frozenset()
