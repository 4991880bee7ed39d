"""The substitution method: reduction under a total substitution, the
two-round trial, and the iterated repair cases."""

import json
from functools import reduce as fold
from pathlib import Path

import pytest

import oracles
from epsilon_engine.calculus import (
    AXIOMS, AxiomInstance, Proof, ProofLine, check_proof, eps_pa, parse_proof,
)
from epsilon_engine.epsilon_sub import (
    SolverState, TotalSubstitution, canonical_key, canonize,
    default_round_budget, eterm_degree, eterm_rank, formula_level,
    hilbert_ansatz, initial_state, is_canonical, reduce_under, solve, step,
    verify_solving,
)
from epsilon_engine.errors import SolverError, StuckTermError
from epsilon_engine.grammar import format_term, parse_formula, parse_term
from epsilon_engine.recursion import builtin_ackermann
from epsilon_engine.syntax import (
    And, EpsTerm, Eq, Neq, Num, Or, PiTerm, Substitution, Var, apply_subst,
)
from epsilon_engine.transform import is_correct_tt

CORPUS = Path(__file__).parent / "corpus"
REG = builtin_ackermann()
S1 = TotalSubstitution()


def eps1_line(t, body):
    sigma = Substitution(ind={"a": t}, fml={"A": (("b",), body)})
    return ProofLine(apply_subst(AXIOMS["eps1"], sigma),
                     AxiomInstance("eps1", sigma))


def least_line(body):
    sigma = Substitution(fml={"A": (("b",), body)})
    return ProofLine(apply_subst(AXIOMS["eps4"], sigma),
                     AxiomInstance("eps4", sigma))


def eps_proof(*lines) -> Proof:
    p = Proof(tuple(lines), eps_pa())
    check_proof(p)
    return p


def any_of(values) -> "Or":
    return fold(Or, [Eq(Var("b"), Num(v)) for v in values])


def family(n: int) -> Proof:
    """One witness axiom naming n and one least-number axiom over the
    matrix (b = 1 | ... | b = n)."""
    body = any_of(range(1, n + 1))
    return eps_proof(eps1_line(Num(n), body), least_line(body))


ONE_WITNESS = eps_proof(eps1_line(Num(1), Eq(Var("b"), Num(1))))
CHAIN = family(2)
VACUOUS = eps_proof(eps1_line(Num(0), Eq(Var("b"), Num(0))))

# Rank-2 scenario: the outer witness depends on a subordinate term whose
# value moves after the witness was adopted, forcing a discard.
STALE_BODY = And(Eq(EpsTerm("c", Eq(Var("c"), Var("b"))), Num(0)),
                 Neq(Var("b"), Num(0)))
STALE = eps_proof(eps1_line(Num(1), STALE_BODY),
                  eps1_line(Num(2), STALE_BODY),
                  eps1_line(Num(1), Eq(Var("b"), Num(1))))
STALE_KEY = canonical_key(parse_term("eps a. (eps b. b = a) = 0 & a != 0"))
INNER_KEY = canonical_key(parse_term("eps a. a = 0+1"))

DEMO = parse_proof((CORPUS / "eps_demo.prf").read_text())


def replay(p: Proof, mode: str = "decrement"):
    """(state before, transcript entry, state after) for every round."""
    state = initial_state()
    out = []
    while True:
        nxt, entry = step(state, p, REG, mode)
        out.append((state, entry, nxt))
        if entry["solving"] or "stuck" in entry:
            return out
        state = nxt
        assert len(out) < 200, "replay did not terminate"


# ---------------------------------------------------------------- reduction


def test_default_substitution_sends_the_witness_term_to_zero():
    assert reduce_under(parse_term("eps a. a = 0+1"), S1) == Num(0)


def test_assigned_values_and_the_flag_companion():
    S = S1.with_pair(INNER_KEY, (1, 0))
    assert reduce_under(parse_term("eps a. a = 0+1"), S) == Num(1)
    assert reduce_under(parse_term("pi a. a = 0+1"), S) == Num(0)
    assert reduce_under(parse_term("pi a. a = 0+1"), S1) == Num(1)


def test_nested_term_resolves_inside_out():
    # The inner term becomes its value, the function symbol computes,
    # and only then is the outer term looked up under its resolved body.
    t = parse_term("eps a. a = plus(eps b. b = 0+1, 0+1)")
    outer = canonical_key(parse_term("eps a. a = 0+1+1"))
    S = S1.with_pair(INNER_KEY, (1, 0)).with_pair(outer, (2, 0))
    assert reduce_under(t, S, REG) == Num(2)
    assert reduce_under(t, S1, REG) == Num(0)


def test_explicit_input_is_a_fixpoint():
    f = parse_formula("0 = 0 -> 0+1 = 0+1+1")
    assert reduce_under(f, S1) == f


def test_reduce_rejects_open_input_and_propagates_stuck_heads():
    with pytest.raises(SolverError):
        reduce_under(parse_term("eps a. a = c"), S1)
    with pytest.raises(StuckTermError):
        reduce_under(parse_formula("mystery(0) = 0"), S1)


def test_canonize_keeps_the_binder_and_cleans_the_body():
    t = parse_term("eps a. a = plus(eps b. b = 0+1, 0)")
    S = S1.with_pair(INNER_KEY, (1, 0))
    assert canonize(t, S, REG) == parse_term("eps a. a = 0+1")
    assert not is_canonical(t)
    assert is_canonical(canonize(t, S, REG))


def test_subordinate_expressions_stay_open_under_canonize():
    t = parse_term("eps a. (eps b. b = a) = 0 & a != 0")
    assert canonize(t, S1) == t
    assert is_canonical(t)


def test_total_substitution_stays_sparse():
    S = S1.with_pair(INNER_KEY, (3, 0))
    assert S.pair(STALE_KEY) == (0, 1)
    assert S.with_pair(INNER_KEY, (0, 1)).assignments == {}


# ----------------------------------------------------- degree, rank, level


def naive_free(node) -> set:
    """Free names found by resolving every variable occurrence against the
    binder stack of its own walk, nothing read from the caches."""
    out = set()
    for _, n, stack in oracles.walk_occurrences(node):
        if isinstance(n, Var) and all(name != n.name for name, _ in stack):
            out.add(n.name)
    return out


def naive_degree(t) -> int:
    closed = [n for path, n, _ in oracles.walk_occurrences(t)
              if path and isinstance(n, (EpsTerm, PiTerm))
              and not naive_free(n)]
    return 1 + max((naive_degree(n) for n in closed), default=0)


def naive_rank(t) -> int:
    walk = oracles.walk_occurrences(t)
    rooted = []
    for vpath, v, vstack in walk:
        if isinstance(v, Var):
            owners = [bp for name, bp in vstack if name == v.name]
            if owners and owners[-1] == ():
                rooted.append(vpath)
    subs = [n for path, n, _ in walk
            if path and isinstance(n, (EpsTerm, PiTerm))
            and any(h[:len(path)] == path and len(h) > len(path)
                    for h in rooted)]
    return 1 + max((naive_rank(n) for n in subs), default=0)


def test_flat_term_has_degree_and_rank_one():
    t = parse_term("eps a. a = 0")
    assert eterm_degree(t) == 1 and eterm_rank(t) == 1


def test_subordinate_body_raises_rank_not_degree():
    t = parse_term("eps a. a = (eps b. a = b)")
    assert eterm_degree(t) == 1 and eterm_rank(t) == 2


def test_nested_closed_term_raises_degree_not_rank():
    t = parse_term("eps a. a = plus(eps b. b = 0+1, 0+1)")
    assert eterm_degree(t) == 2 and eterm_rank(t) == 1


SCOPE_SAMPLES = [
    "eps a. a = 0",
    "pi a. a = 0+1",
    "eps a. a = (eps b. a = b)",
    "eps a. a = (eps b. b = 0)",
    "eps a. a = plus(eps b. b = 0+1, 0+1)",
    "eps a. (eps b. b = a) = 0 & a != 0",
    "eps a. a = (eps b. b = (eps c. c = a))",
    "eps a. a = (eps b. b = (eps c. c = b))",
    "eps a. a = (eps b. b = (eps c. c = 0))",
    "eps a. plus(a, eps b. b = d(a)) = 0+1+1",
    "pi a. (eps b. b = plus(a, 0+1)) = a",
    "eps a. a = d(eps b. (pi c. c = b) = a)",
]


def test_degree_and_rank_agree_with_a_scope_walker():
    for text in SCOPE_SAMPLES:
        t = parse_term(text)
        assert eterm_degree(t) == naive_degree(t), text
        assert eterm_rank(t) == naive_rank(t), text


def test_level_is_the_earliest_stage_over_proof_occurrences():
    nested = "(eps a. a = d(eps b. b = 0+1)) = 0"
    direct = "0 = (eps a. a = 0)"
    key = parse_term("eps a. a = 0")
    S = S1.with_pair(INNER_KEY, (1, 0))
    one = Proof((ProofLine(parse_formula(nested), AxiomInstance("13")),),
                eps_pa())
    both = Proof(one.lines + (ProofLine(parse_formula(direct),
                                        AxiomInstance("13")),), eps_pa())
    assert formula_level(key, one, S, REG) == 2
    assert formula_level(key, both, S, REG) == 1
    assert formula_level(parse_term("eps a. a = 0+1"), both, S, REG) == 1
    with pytest.raises(SolverError):
        formula_level(parse_term("eps a. a = 0+1+1+1"), both, S, REG)


# ---------------------------------------------------------- two-round trial


def test_ansatz_adopts_the_named_witness_in_round_two():
    tr = hilbert_ansatz(ONE_WITNESS)
    assert tr.outcome == "solving" and tr.rounds == 2
    assert tr.final.pair(INNER_KEY) == (1, 0)
    assert tr.entries[0]["case"] == 1
    # the adopted value is the unique single-value substitution that makes
    # every critical formula correct
    crits = [l.formula for l in ONE_WITNESS.lines]
    good = [v for v in range(3)
            if all(is_correct_tt(reduce_under(
                f, S1.with_pair(INNER_KEY, (v, 0)), REG)) for f in crits)]
    assert good == [1]


def test_ansatz_round_one_solves_when_the_default_already_works():
    tr = hilbert_ansatz(VACUOUS)
    assert tr.outcome == "solving" and tr.rounds == 1
    assert tr.final.assignments == {}


def test_ansatz_lowers_to_the_least_witness():
    tr = hilbert_ansatz(CHAIN)
    assert tr.outcome == "solving" and tr.rounds == 2
    key = canonical_key(parse_term("eps a. a = 0+1 | a = 0+1+1"))
    assert tr.final.pair(key) == (1, 0)
    body = any_of([1, 2])
    least = oracles.least_witness(
        lambda v: is_correct_tt(reduce_under(
            apply_subst(body, Substitution(ind={"b": Num(v)})), S1, REG)), 2)
    assert tr.final.pair(key)[0] == least


def test_ansatz_preconditions():
    two_terms = eps_proof(eps1_line(Num(1), Eq(Var("b"), Num(1))),
                          eps1_line(Num(2), Eq(Var("b"), Num(2))))
    with pytest.raises(SolverError):
        hilbert_ansatz(two_terms)
    with pytest.raises(SolverError):
        hilbert_ansatz(DEMO)


# ------------------------------------------------------------- repair cases


def test_case_one_adopts_the_witness_in_one_step():
    p = eps_proof(eps1_line(Num(2), Eq(Var("b"), Num(2))))
    state, entry = step(initial_state(), p, REG)
    assert entry["case"] == 1 and not entry["solving"]
    key = canonical_key(parse_term("eps a. a = 0+1+1"))
    assert state.current.pair(key) == (2, 0)
    assert entry["changed"] == [{"term": format_term(key),
                                 "old": [0, 1], "new": [2, 0]}]


def test_case_one_drops_the_flag_when_zero_satisfies_the_matrix():
    tr = solve(DEMO)
    assert tr.outcome == "solving" and tr.rounds == 2
    assert tr.entries[0]["case"] == 1
    assert tr.final.pair(canonical_key(parse_term("eps a. a = 0"))) == (0, 0)
    assert verify_solving(DEMO, tr.final).ok


def test_case_two_decrements_a_witness_that_is_not_least():
    tr = solve(CHAIN)
    assert [e["case"] for e in tr.entries] == [1, 2, None]
    key = canonical_key(parse_term("eps a. a = 0+1 | a = 0+1+1"))
    assert tr.entries[0]["changed"][0]["new"] == [2, 0]
    assert tr.entries[1]["changed"][0]["new"] == [1, 0]
    assert tr.final.pair(key) == (1, 0)
    # exhaustive check over single-value substitutions: only value 1 makes
    # both critical formulas correct with a witness flag
    crits = [l.formula for l in CHAIN.lines]
    good = [v for v in range(4)
            if all(is_correct_tt(reduce_under(
                f, S1.with_pair(key, (v, 0)), REG)) for f in crits)]
    assert good == [1]


def test_already_solving_leaves_the_state_alone():
    state = initial_state()
    after, entry = step(state, VACUOUS, REG)
    assert entry["solving"] and after is state


def test_case_three_discards_rounds_invalidated_by_a_moved_subordinate():
    tr = solve(STALE)
    assert tr.outcome == "solving"
    assert [e["case"] for e in tr.entries] == [1, 1, 3, 1, None]
    third = tr.entries[2]
    assert third["discarded_from_round"] == 2
    assert parse_term(third["moved_term"]) == parse_term("eps c. c = 0+1")
    # the outer witness falls back to the default, the moved inner term
    # keeps its value
    assert third["changed"] == [{"term": format_term(STALE_KEY),
                                 "old": [1, 0], "new": [0, 1]}]
    assert tr.final.pair(STALE_KEY) == (2, 0)
    assert tr.final.pair(INNER_KEY) == (1, 0)
    assert verify_solving(STALE, tr.final).ok


def test_jump_mode_reaches_the_least_witness_in_fewer_rounds():
    slow = solve(family(4))
    fast = solve(family(4), mode="least")
    key = canonical_key(canonize(parse_term("eps b. b = 0+1 | b = 0+1+1 |"
                                            " b = 0+1+1+1 | b = 0+1+1+1+1"),
                                 S1))
    assert slow.outcome == fast.outcome == "solving"
    assert slow.final.pair(key) == fast.final.pair(key) == (1, 0)
    assert slow.rounds == 5 and fast.rounds == 3
    with pytest.raises(SolverError):
        step(initial_state(), CHAIN, REG, mode="weird")


def test_step_reports_stuck_without_an_anchor_round():
    forged = SolverState(history=[S1, S1.with_pair(INNER_KEY, (5, 0))],
                         marks={})
    after, entry = step(forged, ONE_WITNESS, REG)
    assert after is forged
    assert "no remembered round" in entry["stuck"]


def test_step_reports_stuck_when_nothing_subordinate_moved():
    forged = SolverState(history=[S1, S1.with_pair(INNER_KEY, (5, 0))],
                         marks={INNER_KEY: frozenset({2})})
    _, entry = step(forged, ONE_WITNESS, REG)
    assert "no subordinate term changed" in entry["stuck"]


# ------------------------------------------------------------------- solve


def test_solver_agrees_with_the_two_round_trial():
    for p in (ONE_WITNESS, CHAIN, VACUOUS):
        assert solve(p).final.assignments == hilbert_ansatz(p).final.assignments


def test_epsilon_free_proof_is_vacuously_solving():
    p = parse_proof((CORPUS / "induct_plus.prf").read_text())
    tr = solve(p)
    assert tr.outcome == "solving" and tr.rounds == 1
    assert tr.final.assignments == {}


def test_decrement_family_rounds_stay_within_witness_plus_two():
    for n in range(1, 11):
        tr = solve(family(n))
        assert tr.outcome == "solving"
        assert tr.rounds <= n + 2
        body = any_of(range(1, n + 1))
        least = oracles.least_witness(
            lambda v: is_correct_tt(reduce_under(
                apply_subst(body, Substitution(ind={"b": Num(v)})), S1, REG)),
            n)
        key = canonical_key(canonize(EpsTerm("b", body), S1))
        assert tr.final.pair(key)[0] == least == 1


def test_round_budget_yields_a_step_limit_outcome():
    tr = solve(CHAIN, max_rounds=1)
    assert tr.outcome == "step-limit" and tr.rounds == 1
    assert "budget" in tr.note


def test_environment_variable_overrides_the_budget(monkeypatch):
    monkeypatch.setenv("EE_MAX_ROUNDS", "1")
    assert solve(CHAIN).outcome == "step-limit"
    monkeypatch.delenv("EE_MAX_ROUNDS")
    assert solve(CHAIN).outcome == "solving"
    assert default_round_budget(CHAIN) == 40


def test_transcripts_are_deterministic():
    for p in (CHAIN, STALE, DEMO):
        a, b = solve(p), solve(p)
        assert a.entries == b.entries
        assert a.final.assignments == b.final.assignments


def test_transcript_serializes_as_json_lines():
    tr = solve(STALE)
    parsed = [json.loads(line) for line in tr.json_lines().splitlines()]
    assert parsed == tr.entries
    plain = {"round", "case", "critical_formula", "changed", "solving"}
    assert set(parsed[0]) == plain
    assert set(parsed[2]) == plain | {"discarded_from_round", "moved_term"}


# -------------------------------------------------------------- invariants


def test_flag_one_never_carries_a_nonzero_value():
    for p in (CHAIN, STALE, DEMO, family(5)):
        for _, _, after in replay(p):
            for s in after.history:
                for key in s.keys():
                    z, flag = s.pair(key)
                    assert flag == 0 or z == 0


def test_witness_values_were_correct_when_assigned():
    # every (z, 0) written by case 1 or 2 had its matrix correct at z
    # under the substitution the case fired from
    for p in (CHAIN, STALE, DEMO, family(6)):
        for before, entry, _ in replay(p):
            if entry["case"] not in (1, 2):
                continue
            for row in entry["changed"]:
                z, flag = row["new"]
                if flag != 0:
                    continue
                key = canonical_key(parse_term(row["term"]))
                inst = apply_subst(key.body,
                                   Substitution(ind={key.var: Num(z)}))
                assert is_correct_tt(reduce_under(inst, before.current, REG))


def test_perturbed_witness_fails_verification():
    tr = solve(ONE_WITNESS)
    assert verify_solving(ONE_WITNESS, tr.final).ok
    bumped = tr.final.with_pair(INNER_KEY, (2, 0))
    verdict = verify_solving(ONE_WITNESS, bumped)
    assert not verdict.ok
    assert verdict.entries[0][1] is False


def test_all_defaults_verify_on_a_vacuous_proof():
    assert verify_solving(VACUOUS, S1).ok
