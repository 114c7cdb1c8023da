"""Static program checks: compilation, limits, and rejection paths."""

import pytest

import lockstep.scenarios as s
from lockstep.programs import (LABEL_KIND, MAX_NESTING, MAX_UNROLLED, MAX_VARS,
                               CompileContext, ProgramError, compile_program)

KINDS = {"cell": "raw_cell", "lc": "locked_cell", "mc": "message_cell",
         "sc": "status_channel", "lm": "last_message_channel",
         "dx": "duplex_channel", "reg": "shared_register", "dc": "direct_channel"}


def ctx(pid=0, width=2):
    return CompileContext(pid=pid, word_width=width, mech_kind=dict(KINDS),
                          mech_index={k: i for i, k in enumerate(KINDS)},
                          duplex_sides={"dx": (0, 1)})


def compile_ok(*steps, pid=0, width=2):
    return compile_program(list(steps), ctx(pid=pid, width=width))


def compile_err(*steps, pid=0, width=2):
    with pytest.raises(ProgramError) as ei:
        compile_program(list(steps), ctx(pid=pid, width=width))
    return ei.value


def test_simple_sequence_chains_successors():
    p = compile_ok(s.write_word("cell", 0, 1), s.write_word("cell", 1, 1))
    assert len(p.instrs) == 2
    assert p.instrs[0].succ == 1
    assert p.instrs[1].succ == 2  # one past the end = terminated
    assert p.heads == ((0,), (1,), ())


def test_loop_unrolls():
    p = compile_ok(s.loop(3, [s.update("reg", "inc")]))
    assert len(p.instrs) == 3
    assert [i.succ for i in p.instrs] == [1, 2, 3]


def test_loop_count_zero_vanishes():
    p = compile_ok(s.loop(0, [s.update("reg", "inc")]))
    assert len(p.instrs) == 0
    assert p.heads == ((),)


def test_if_word_branch_wiring():
    p = compile_ok(s.if_word("cell", 0, 1,
                             then=[s.write_word("cell", 1, 2)],
                             orelse=[s.write_word("cell", 1, 3)]))
    br = p.instrs[0]
    assert br.op == "if_word" and br.succ == 1 and br.succ_else == 2
    assert p.instrs[1].succ == p.instrs[2].succ == 3


def test_if_with_empty_branch_falls_through():
    p = compile_ok(s.if_status("sc", full=[s.read("sc", "v")]),
                   s.check("sc", "t"))
    br = p.instrs[0]
    assert br.succ == 1        # full branch
    assert br.succ_else == 2   # empty branch jumps over it


def test_vars_and_mechs_are_collected():
    p = compile_ok(s.read("mc", "v"), s.write("mc", s.var("v")))
    assert p.vars == frozenset({"v"})
    assert p.mechs == frozenset({"mc"})


def test_choose_heads_list_alternatives():
    p = compile_ok(s.choose([s.receive("dc", "x")], [s.update("reg", "inc")]))
    assert p.instrs[0].op == "choose"
    assert p.heads[0] == p.instrs[0].alts
    assert len(p.heads[0]) == 2


class TestLimits:
    def test_unroll_limit(self):
        e = compile_err(s.loop(MAX_UNROLLED + 1, [s.update("reg", "inc")]))
        assert f"limit is {MAX_UNROLLED}" in e.message

    def test_unroll_limit_is_inclusive(self):
        compile_ok(s.loop(MAX_UNROLLED, [s.update("reg", "inc")]))

    def test_nesting_limit(self):
        step = s.update("reg", "inc")
        nested = s.loop(1, [step])
        for _ in range(MAX_NESTING):
            nested = s.loop(1, [nested])
        e = compile_err(nested)
        assert f"deeper than {MAX_NESTING}" in str(e)

    def test_nesting_at_limit_passes(self):
        nested = s.update("reg", "inc")
        for _ in range(MAX_NESTING):
            nested = s.loop(1, [nested])
        compile_ok(nested)

    def test_var_limit(self):
        steps = [s.local(f"v{i}", [0, 0]) for i in range(MAX_VARS + 1)]
        e = compile_err(*steps)
        assert f"limit is {MAX_VARS}" in e.message
        assert "v4" in e.message  # names the offenders


class TestBinding:
    def test_unbound_value_var(self):
        e = compile_err(s.write("mc", s.var("x")))
        assert e.message == "variable 'x' may be unbound here"
        assert e.path == "steps[0].value"

    def test_bound_by_read(self):
        compile_ok(s.read("mc", "x"), s.write("mc", s.var("x")))

    def test_bound_in_one_branch_only_is_unbound_after(self):
        e = compile_err(s.if_word("cell", 0, 1, then=[s.local("x", [1, 1])]),
                        s.write("mc", s.var("x")))
        assert "may be unbound" in e.message

    def test_bound_in_both_branches_is_bound_after(self):
        compile_ok(s.if_word("cell", 0, 1,
                             then=[s.local("x", [1, 1])],
                             orelse=[s.local("x", [2, 2])]),
                   s.write("mc", s.var("x")))

    def test_choose_binds_only_the_intersection(self):
        e = compile_err(s.choose([s.receive("dc", "x")], [s.update("reg", "inc")]),
                        s.send("dc", s.var("x")))
        assert "may be unbound" in e.message

    def test_assert_local_needs_binding(self):
        e = compile_err(s.assert_local("x", 1))
        assert "unbound" in e.message

    def test_word_expr_var(self):
        compile_ok(s.read_word("cell", 0, "w"), s.write_word("cell", 1, s.var("w")))


class TestMechanismCompatibility:
    def test_undeclared_mechanism_is_named(self):
        e = compile_err(s.read("c9", "v"))
        assert "'c9'" in e.message and "undeclared" in e.message

    def test_read_on_raw_cell(self):
        e = compile_err(s.read("cell", "v"))
        assert "read is not defined for mechanism 'cell'" in e.message

    def test_write_word_on_status_channel(self):
        e = compile_err(s.write_word("sc", 0, 1))
        assert "not defined" in e.message

    def test_lock_on_message_cell(self):
        assert "not defined" in compile_err(s.lock("mc")).message

    def test_send_on_status_channel(self):
        assert "not defined" in compile_err(s.send("sc", [1, 1])).message

    def test_check_on_raw_cell(self):
        assert "not defined" in compile_err(s.check("cell", "t")).message

    def test_update_on_message_cell(self):
        assert "not defined" in compile_err(s.update("mc", "inc")).message

    def test_duplex_non_side(self):
        e = compile_err(s.write("dx", [1, 1]), pid=2)
        assert "not a side" in e.message

    def test_duplex_side_ok(self):
        compile_ok(s.write("dx", [1, 1]), pid=1)


class TestLiterals:
    def test_index_out_of_range(self):
        e = compile_err(s.read_word("cell", 2, "v"))
        assert "'index'" in e.message

    def test_word_out_of_domain(self):
        assert "'word'" in compile_err(s.wait_word("cell", 0, 8)).message

    def test_value_wrong_width(self):
        e = compile_err(s.write("mc", [1]))
        assert "word width is 2" in e.message

    def test_value_word_out_of_domain(self):
        assert "0..7" in compile_err(s.write("mc", [1, 9])).message

    def test_null_write_rejected(self):
        e = compile_err(s.write("mc", None))
        assert "null value is not allowed" in e.message

    def test_null_local_and_send_allowed(self):
        p = compile_ok(s.local("x", None), s.send("dc", None))
        assert p.instrs[0].expr == ("lit", None)

    def test_applied_fn_value(self):
        p = compile_ok(s.local("t", [1, 1]), s.local("g", s.applied("inc", "t")))
        assert p.instrs[1].expr == ("fn", ("inc",), "t")

    def test_applied_unknown_fn(self):
        assert "unknown update function" in compile_err(
            s.local("t", [1, 1]), s.local("g", s.applied("neg", "t"))).message

    def test_add_requires_k(self):
        assert "'k'" in compile_err(s.update("reg", "add")).message

    def test_add_with_k(self):
        p = compile_ok(s.update("reg", "add", k=3))
        assert p.instrs[0].fn == ("add", 3)

    def test_assert_literal_rejects_bad_token(self):
        e = compile_err(s.check("sc", "t"), s.assert_local("t", "busy"))
        assert "status token" in e.message

    def test_assert_literal_rejects_bool(self):
        assert "expected must be" in compile_err(
            s.local("t", [1, 1]), s.assert_local("t", True)).message


class TestChoose:
    def test_needs_two_alternatives(self):
        e = compile_err(s.choose([s.receive("dc", "x")]))
        assert "at least two" in e.message

    def test_alternative_must_be_nonempty(self):
        e = compile_err(s.choose([s.receive("dc", "x")], []))
        assert "non-empty" in e.message

    def test_alternative_head_must_be_simple(self):
        e = compile_err(s.choose([s.receive("dc", "x")],
                                 [s.loop(2, [s.update("reg", "inc")])]))
        assert "simple step" in e.message

    def test_indistinguishable_heads_rejected(self):
        e = compile_err(s.choose([s.receive("dc", "x")], [s.receive("dc", "y")]))
        assert "indistinguishable" in e.message

    def test_distinct_mechanisms_ok(self):
        compile_ok(s.local("x", [0, 0]),
                   s.choose([s.receive("dc", "x")], [s.send("dc", s.var("x"))]))


class TestShapeErrors:
    def test_steps_not_a_list(self):
        with pytest.raises(ProgramError, match="must be a list"):
            compile_program({"op": "lock"}, ctx())

    def test_step_without_op(self):
        assert "an 'op'" in compile_err({"mechanism": "mc"}).message

    def test_unknown_op(self):
        assert "unknown step op" in compile_err({"op": "compare_and_swap"}).message

    def test_loop_count_negative(self):
        assert "'count'" in compile_err(s.loop(-1, [s.update("reg", "inc")])).message

    def test_bad_var_name(self):
        assert "'var'" in compile_err(s.read("mc", "not a name")).message

    def test_error_carries_path(self):
        e = compile_err(s.loop(2, [s.write("mc", s.var("q"))]))
        assert e.path == "steps[0].body[0].value"
        assert str(e) == f"{e.path}: {e.message}"


def test_label_kind_covers_every_step_op():
    # every step op that can appear at a program position maps to a label kind
    for op in ("lock", "unlock", "read", "write", "send", "receive", "read_word",
               "wait_word", "if_word", "write_word", "check", "if_status",
               "update", "local", "assert_local"):
        assert op in LABEL_KIND
