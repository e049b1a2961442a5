"""Parser, writer and solution-format tests."""

import io
import itertools

import pytest
from hypothesis import given, settings, strategies as st

from pbsolve.generators import php_instance, random_instance
from pbsolve.opb import (
    OpbSyntaxError,
    ParsedInstance,
    SAT,
    UNKNOWN,
    UNSAT,
    format_solution,
    parse_opb,
    write_opb,
)
from helpers import con


class TestParse:
    def test_basic_constraint(self):
        inst = parse_opb("+5 x1 +4 x2 +1 x3 +1 x4 >= 6 ;\n")
        assert inst.constraints == [con("5a 4b c d >= 6")]

    def test_equality_splits_into_two(self):
        inst = parse_opb("+1 x1 +1 x2 = 1 ;\n")
        assert inst.constraints == [con("a b >= 1"), con("~a ~b >= 1")]

    def test_negative_weight_normalizes(self):
        inst = parse_opb("-3 x1 +2 x2 >= -1 ;\n")
        # Saturated canonical form of 3~x1 + 2x2 >= 2.
        assert inst.constraints == [con("2~a 2b >= 2")]

    def test_header_and_comments(self):
        text = "* a comment\n* #variable= 6 #constraint= 2\n+1 x1 >= 1 ;\n"
        inst = parse_opb(text)
        assert inst.declared_vars == 6
        assert inst.declared_constraints == 2
        assert inst.nvars == 6

    def test_unsigned_weights_and_crlf(self):
        inst = parse_opb("1 x1 1 x2 >= 1 ;\r\n")
        assert inst.constraints == [con("a b >= 1")]

    def test_tautology_dropped_contradiction_flagged(self):
        inst = parse_opb("+2 x1 +3 x2 >= 0 ;\n+1 x1 >= 2 ;\n")
        assert inst.constraints == []
        assert inst.contradiction

    def test_objective_rejected_by_default(self):
        with pytest.raises(OpbSyntaxError) as err:
            parse_opb("min: +1 x1 ;\n+1 x1 >= 1 ;\n")
        assert err.value.line == 1

    def test_objective_skipped_with_flag(self):
        inst = parse_opb("min: +1 x1 ;\n+1 x1 >= 1 ;\n", allow_objective=True)
        assert inst.constraints == [con("a >= 1")]

    def test_nonlinear_term_rejected_with_position(self):
        with pytest.raises(OpbSyntaxError) as err:
            parse_opb("+1 x1 x2 >= 1 ;\n")
        assert err.value.line == 1
        assert err.value.column == 7

    def test_missing_terminator(self):
        with pytest.raises(OpbSyntaxError):
            parse_opb("+1 x1 >= 1\n")

    def test_bad_relation(self):
        with pytest.raises(OpbSyntaxError):
            parse_opb("+1 x1 <= 1 ;\n")

    def test_variable_without_coefficient(self):
        with pytest.raises(OpbSyntaxError):
            parse_opb("x1 >= 1 ;\n")

    def test_rejections_carry_positions(self):
        cases = ["?? >= 1 ;", "+1 x1 >= ;", "+1 x1 >= 1 ; junk", "+1 >= 1 ;", "+1 x0 >= 1 ;"]
        for text in cases:
            with pytest.raises(OpbSyntaxError) as err:
                parse_opb(text + "\n")
            assert err.value.line == 1
            assert err.value.column >= 1


class TestWrite:
    def test_round_trip_is_canonical_identity(self):
        inst = parse_opb("+5 x1 +4 x2 +1 x3 +1 x4 >= 6 ;\n+6 x2 +6 x3 +4 x5 >= 7 ;\n")
        buf = io.StringIO()
        write_opb(inst, buf)
        again = parse_opb(buf.getvalue())
        assert again.constraints == inst.constraints

    def test_negated_literals_round_trip(self):
        inst = ParsedInstance(constraints=[con("5~a 5b 4~c >= 5")], declared_vars=3)
        buf = io.StringIO()
        write_opb(inst, buf)
        text = buf.getvalue()
        assert "-5 x1" in text and "-4 x3" in text
        assert parse_opb(text).constraints == inst.constraints

    def test_empty_instance_writes_header_only(self):
        buf = io.StringIO()
        write_opb(ParsedInstance(declared_vars=0), buf)
        assert buf.getvalue() == "* #variable= 0 #constraint= 0\n"

    def test_php_round_trip_counts(self):
        inst = php_instance(4, 3)
        buf = io.StringIO()
        write_opb(inst, buf)
        again = parse_opb(buf.getvalue())
        assert len(again.constraints) == 4 + 3
        assert again.constraints == inst.constraints


class TestSolutionFormat:
    def test_sat_lists_every_variable(self):
        out = format_solution(SAT, {1: True, 2: False}, nvars=2)
        assert out == "s SATISFIABLE\nv x1 -x2"

    def test_sat_pads_declared_but_unused_variables(self):
        out = format_solution(SAT, {1: True}, nvars=3)
        assert out == "s SATISFIABLE\nv x1 -x2 -x3"

    def test_unsat_and_unknown(self):
        assert format_solution(UNSAT) == "s UNSATISFIABLE"
        assert format_solution(UNKNOWN) == "s UNKNOWN"

    def test_model_presence_matches_status(self):
        with pytest.raises(ValueError):
            format_solution(UNSAT, {1: True})
        with pytest.raises(ValueError):
            format_solution(SAT, None)


@given(st.text(alphabet="x123 +-~;>=*\n", max_size=60))
@settings(max_examples=300, deadline=None)
def test_parser_is_total_on_arbitrary_text(text):
    # Any rejection is an OpbSyntaxError carrying a 1-based position.
    try:
        parse_opb(text)
    except OpbSyntaxError as err:
        assert err.line >= 1 and err.column >= 1


@given(st.integers(0, 10_000))
@settings(max_examples=50, deadline=None)
def test_random_instances_round_trip_semantically(seed):
    inst = random_instance(5, 4, 6, seed)
    buf = io.StringIO()
    write_opb(inst, buf)
    again = parse_opb(buf.getvalue())
    assert again.constraints == inst.constraints
    # Same satisfying sets by enumeration.
    for values in itertools.product((False, True), repeat=5):
        total = dict(zip(range(1, 6), values))
        assert all(c.satisfied_by(total) for c in inst.constraints) == all(
            c.satisfied_by(total) for c in again.constraints
        )
