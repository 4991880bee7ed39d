"""Recursive definitions, the termination measure, and evaluation."""

import hypothesis.strategies as st
import pytest
from hypothesis import given, settings

import oracles
from epsilon_engine.errors import DefinitionError, GaugeViolation, StuckTermError
from epsilon_engine.grammar import parse_term
from epsilon_engine.ordinals import OMEGA, ZERO, DescentGauge, from_int
from epsilon_engine.recursion import (
    PRRegistry, builtin_ackermann, evaluate, index, load_definitions, order,
    rank, reduce_innermost, subordinate_symbols, unfold_once,
)
from epsilon_engine.syntax import FunApp, FunctionalArg, Num, Var, succ

REG = builtin_ackermann()


def ev(text: str) -> int:
    return evaluate(parse_term(text), REG).value


# ---------------------------------------------------------------- registry


def test_registry_order():
    assert REG.names() == ["plus", "times", "notzero", "monus", "differ",
                           "same", "iterate", "seed", "ack"]


def test_register_predecessor_only_definition():
    reg = load_definitions("""
    def pred2 {
      pred2(0, b) = d(d(b))
      pred2(a+1, b) = d(pred2(a, b))
    }
    """)
    assert evaluate(parse_term("pred2(2, 9)"), reg) == Num(5)


def test_register_rejects_forward_reference():
    with pytest.raises(DefinitionError):
        load_definitions("""
        def one {
          one(0) = later(0)
          one(a+1) = 0
        }
        def later {
          later(0) = 0
          later(a+1) = 0
        }
        """)


def test_register_rejects_wrong_recursion_argument():
    with pytest.raises(DefinitionError):
        load_definitions("""
        def bad {
          bad(0, b) = 0
          bad(a+1, b) = bad(b, a)
        }
        """)


def test_register_rejects_duplicate_name():
    with pytest.raises(DefinitionError):
        load_definitions("""
        def twice {
          twice(0) = 0
          twice(a+1) = twice(a)+1+1
        }
        def twice {
          twice(0) = 0
          twice(a+1) = twice(a)
        }
        """)


def test_register_rejects_mismatched_slots():
    with pytest.raises(DefinitionError):
        load_definitions("""
        def bad {
          bad(0, b) = b
          bad(a+1, c) = bad(a, c)
        }
        """)


def test_register_rejects_two_call_shapes():
    with pytest.raises(DefinitionError):
        load_definitions("""
        def plus2 {
          plus2(0, b) = b
          plus2(a+1, b) = plus2(a, plus2(a, b))
        }
        """)


# -------------------------------------------------------------- evaluation


def test_level_zero_is_addition():
    assert ev("ack(0, 2, 3)") == 5


def test_level_one_is_product():
    assert ev("ack(1, 2, 3)") == oracles.ack_direct(1, 2, 3) == 6


def test_level_two_is_power():
    assert ev("ack(2, 2, 3)") == oracles.ack_direct(2, 2, 3) == 8


def test_branching_function_cases():
    assert ev("seed(0, 5)") == 0
    assert ev("seed(1, 5)") == 1
    assert ev("seed(4, 5)") == 5


def test_indicator_functions_brute_force():
    for a in range(11):
        for b in range(11):
            assert ev(f"differ({a}, {b})") == (1 if a != b else 0)
            assert ev(f"same({a}, {b})") == (1 if a == b else 0)
            assert ev(f"seed({a}, {b})") == oracles.seed_direct(a, b)


def test_iterating_successor():
    assert ev("iterate(3, fn c. c+1, 0)") == 3


def test_direct_oracle_agrees_with_suggestive_forms():
    checked = 0
    for a in range(4):
        for b in range(4):
            for c in range(4):
                want = oracles.ack_suggestive(a, b, c, cap=65536)
                got = oracles.ack_direct(a, b, c, cap=65536)
                assert got == want
                if want is not None:
                    checked += 1
    assert checked >= 55


def test_tower_value():
    assert ev("ack(3, 2, 3)") == 65536


def test_evaluate_rejects_open_terms():
    with pytest.raises(Exception):
        evaluate(parse_term("plus(a, 0)"), REG)


def test_evaluate_stuck_on_unknown_symbol():
    with pytest.raises(StuckTermError):
        evaluate(parse_term("mystery(0)"), REG)


def test_interpreter_oracle_agrees_on_mixed_terms():
    for text in [
        "plus(times(2, 3), d(0))",
        "monus(2, times(3, 3))",
        "iterate(2, fn c. plus(c, c), 0+1)",
        "ack(2, 2, iterate(1, fn c. d(c), 2))",
        "seed(differ(2, 3), 7)",
    ]:
        t = parse_term(text)
        assert evaluate(t, REG).value == oracles.interpret(t, REG)


# ------------------------------------------------------------------ measure


def test_order_of_numeral_is_zero():
    assert order(Num(7), REG) == ZERO


def test_order_of_predecessor_alone():
    empty = PRRegistry()
    assert order(parse_term("d(0+1)"), empty) == from_int(1)


def test_index_of_numeral_is_zero():
    assert index(Num(3), REG) == ZERO


def test_index_of_predecessor_application():
    # one non-numeral subterm, and it has order 1
    empty = PRRegistry()
    assert index(parse_term("d(0)"), empty) == OMEGA


def test_index_decreases_across_delta_step():
    empty = PRRegistry()
    before = index(parse_term("d((0+1)+1)"), empty)
    after = index(parse_term("0+1"), empty)
    assert after < before


def test_subordination_through_functional_argument():
    t = parse_term("iterate(2, fn b. ack(0, b, b), 0)")
    subs = subordinate_symbols(t, (), REG)
    assert [sym for _, sym in subs] == ["ack"]


def test_no_subordination_without_bound_variables():
    t = parse_term("plus(2, times(3, 3))")
    assert subordinate_symbols(t, (), REG) == []


def test_rank_examples():
    t = parse_term("iterate(2, fn b. ack(0, b, b), 0)")
    assert rank(t, "iterate", REG) == 2
    assert rank(t, "ack", REG) == 1
    assert rank(parse_term("plus(0, 0)"), "ack", REG) == 0


def test_order_vector_shape():
    # ranks fill every position at or below the occurrence's symbol
    t = parse_term("times(2, 2)")
    got = order(t, REG)
    assert str(got) == "w^(2) + w^(1) + 1"


def test_index_against_scope_walker():
    for text in [
        "d(0)",
        "plus(2, plus(2, 0))",
        "iterate(2, fn c. plus(c, c), ack(0, 1, 1))",
        "ack(1, seed(1, 2), times(2, d(3)))",
    ]:
        t = parse_term(text)
        mine = index(t, REG)
        walked = oracles.index_by_walking(t, REG)
        from epsilon_engine.ordinals import omega_vector, ordinal_sum
        want = ordinal_sum(
            [(omega_vector(list(o)), c) for o, c in walked])
        assert mine == want


# ---------------------------------------------------------------- reduction


def test_delta_rules():
    assert reduce_innermost(parse_term("d(0)"), REG) == (Num(0), "delta")
    assert reduce_innermost(parse_term("d(4)"), REG) == (Num(3), "delta")


def test_reduction_done_on_numeral():
    assert reduce_innermost(Num(5), REG) is None


def test_single_equation_unfolding_shape():
    t = parse_term("iterate(2, fn c. plus(1, c), 0)")
    out, fired = unfold_once(t, REG)
    assert fired == "iterate.step"
    assert out == parse_term("plus(1, iterate(1, fn c. plus(1, c), 0))")


def test_head_elimination_removes_the_symbol():
    t = parse_term("ack(1, 2, 2)")
    out, fired = reduce_innermost(t, REG)
    assert fired == "ack.step"
    assert "ack" not in out._heads
    assert evaluate(out, REG) == Num(4)


def test_reduction_replaces_every_occurrence():
    t = parse_term("plus(plus(1, 1), plus(1, 1))")
    out, _ = reduce_innermost(t, REG)
    assert out == parse_term("plus(2, 2)")


def test_gauged_evaluation_descends():
    g = DescentGauge()
    trace = []
    got = evaluate(parse_term("ack(1, 2, 2)"), REG, gauge=g, trace=trace)
    assert got == Num(4)
    assert g.steps == len(trace) == 5
    assert [row["rule"] for row in trace] == [
        "ack.step", "seed.base", "iterate.step", "plus.step", "plus.step"]


def test_gauge_survives_phi_2_2_3():
    g = DescentGauge()
    assert evaluate(parse_term("ack(2, 2, 3)"), REG, gauge=g) == Num(8)
    assert g.steps > 0


# ------------------------------------------------------- randomized checks


_small = st.integers(0, 3)


@st.composite
def _closed_terms(draw, depth=3):
    if depth == 0 or draw(st.booleans()):
        return Num(draw(_small))
    choice = draw(st.integers(0, 5))
    if choice == 0:
        return FunApp("d", (draw(_closed_terms(depth=depth - 1)),))
    if choice == 1:
        return succ(draw(_closed_terms(depth=depth - 1)))
    if choice == 2:
        return FunApp("plus", (draw(_closed_terms(depth=depth - 1)),
                               draw(_closed_terms(depth=depth - 1))))
    if choice == 3:
        return FunApp("monus", (draw(_closed_terms(depth=depth - 1)),
                                draw(_closed_terms(depth=depth - 1))))
    if choice == 4:
        return FunApp("iterate", (
            draw(_closed_terms(depth=0)),
            FunctionalArg(("c",), FunApp("plus", (Var("c"), draw(_closed_terms(depth=0))))),
            draw(_closed_terms(depth=depth - 1))))
    return FunApp("ack", (Num(draw(st.integers(0, 2))),
                          draw(_closed_terms(depth=0)),
                          draw(_closed_terms(depth=0))))


@settings(max_examples=150, deadline=None)
@given(_closed_terms())
def test_fast_path_agrees_with_interpreter(t):
    assert evaluate(t, REG).value == oracles.interpret(t, REG)


@settings(max_examples=60, deadline=None)
@given(_closed_terms(depth=2))
def test_gauged_path_agrees_with_fast_path(t):
    fast = evaluate(t, REG)
    assert evaluate(t, REG, gauge=DescentGauge()) == fast
