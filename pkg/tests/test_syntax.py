"""Core term and formula behavior: alpha-canonical equality, substitution,
composition, and instance matching."""

import hypothesis.strategies as st
import pytest
from hypothesis import given, settings

from epsilon_engine.errors import SubstitutionError
from epsilon_engine.grammar import parse_formula, parse_term
from epsilon_engine.syntax import (
    EMPTY_SUBST, And, EpsTerm, Eq, FmlVar, Forall, FunApp, FunctionalArg,
    Imp, Neq, Not, Num, Or, PiTerm, Substitution, Succ, Var, apply_subst,
    compose_subst, match_instance, replace_subterm, subterms, succ,
)

AX14 = parse_formula("a = b -> (A(a) -> A(b))")


# ------------------------------------------------------------- construction


def test_numeral_folding():
    assert succ(Num(2)) == Num(3)
    with pytest.raises(ValueError):
        Succ(Num(0))


def test_negative_numeral_rejected():
    with pytest.raises(ValueError):
        Num(-1)


def test_alpha_equality_of_binders():
    a = EpsTerm("x", Eq(Var("x"), Num(1)))
    b = EpsTerm("y", Eq(Var("y"), Num(1)))
    assert a == b
    assert hash(a) == hash(b)
    assert a.var == "$1"


def test_nested_binders_get_distinct_heights():
    inner = EpsTerm("x", Eq(Var("x"), Var("y")))
    outer = EpsTerm("y", Eq(Var("y"), inner))
    assert outer.var == "$2"
    assert outer.body.right.var == "$1"
    assert outer._fv == frozenset()


def test_neq_is_negated_equation():
    assert Neq(Num(0), Num(1)) == Not(Eq(Num(0), Num(1)))
    assert hash(Neq(Num(0), Num(1))) == hash(Not(Eq(Num(0), Num(1))))
    assert Neq(Num(0), Num(1)) != Eq(Num(0), Num(1))


def test_functional_arg_variables_canonical():
    fa = FunctionalArg(("u", "v"), FunApp("f", (Var("u"), Var("v"))))
    assert fa.vars == ("$1#0", "$1#1")
    same = FunctionalArg(("p", "q"), FunApp("f", (Var("p"), Var("q"))))
    assert fa == same


# ------------------------------------------------------------- substitution


def test_simple_instance():
    f = parse_formula("a = a")
    out = apply_subst(f, Substitution(ind={"a": Num(0)}))
    assert out == parse_formula("0 = 0")


def test_equality_axiom_instance():
    s = Substitution(
        ind={"a": Num(2), "b": Num(0)},
        fml={"A": (("c",), parse_formula("d(c) = c"))})
    out = apply_subst(AX14, s)
    assert out == parse_formula("0+1+1 = 0 -> (d(0+1+1) = 0+1+1 -> d(0) = 0)")


def test_empty_substitution_is_identity():
    f = parse_formula("all a. (a = b -> ex c. c != a)")
    assert apply_subst(f, EMPTY_SUBST) is f


def test_substitution_does_not_capture():
    # plugging b under a binder must not let the binder grab it
    f = parse_formula("ex a. a = b")
    out = apply_subst(f, Substitution(ind={"b": Var("x")}))
    assert out == parse_formula("ex a. a = x")
    inner = EpsTerm("c", Eq(Var("c"), Var("c")))
    out2 = apply_subst(f, Substitution(ind={"b": inner}))
    assert out2.body.right == inner


def test_formula_variable_body_with_binder_is_not_captured():
    # Regression: with A(b) itself containing a binder, expanding the
    # template "eps b. A(b)" plugs an argument that names the outer
    # binder; the plug used to be grabbed by the body's inner binder
    # before the outer one was renamed to its new height.
    template = parse_formula("A(a) -> A(eps b. A(b))")
    body = parse_formula("(eps c. c = b) = 0 & b != 0")
    out = apply_subst(template, Substitution(
        ind={"a": Num(1)}, fml={"A": (("b",), body)}))
    want = parse_formula(
        "(eps a. a = 0+1) = 0 & 0+1 != 0 ->"
        " (eps b. b = (eps c. (eps e. e = c) = 0 & c != 0)) = 0"
        " & (eps f. (eps g. g = f) = 0 & f != 0) != 0")
    assert out == want
    captured = EpsTerm("z", Eq(Var("z"), Var("z")))
    assert captured not in subterms(out.right)


def test_function_variable_plugging():
    t = parse_term("f(0+1)")
    s = Substitution(fn={"f": FunctionalArg(("c",), parse_term("plus(c, c)"))})
    assert apply_subst(t, s) == parse_term("plus(0+1, 0+1)")
    bad = Substitution(fn={"f": FunctionalArg(("c", "e"), parse_term("plus(c, e)"))})
    with pytest.raises(SubstitutionError):
        apply_subst(t, bad)


def test_formula_variable_arity_mismatch():
    s = Substitution(fml={"A": (("c", "e"), parse_formula("c = e"))})
    with pytest.raises(SubstitutionError):
        apply_subst(FmlVar("A", (Num(0),)), s)


def test_replace_subterm_hits_every_occurrence():
    t = parse_term("plus(d(0), d(0))")
    out = replace_subterm(t, parse_term("d(0)"), Num(0))
    assert out == parse_term("plus(0, 0)")


def test_subterms_enumeration():
    t = parse_term("plus(d(0), x)")
    seen = list(subterms(t))
    assert t in seen
    assert parse_term("d(0)") in seen
    assert Var("x") in seen
    assert Num(0) in seen


# -------------------------------------------------------------- composition


_tvars = st.sampled_from(["a", "b", "c"])

_terms = st.recursive(
    st.one_of(st.integers(0, 2).map(Num), _tvars.map(Var)),
    lambda inner: st.one_of(
        inner.map(succ),
        st.tuples(inner, inner).map(lambda p: FunApp("plus", p)),
        inner.map(lambda t: FunApp("d", (t,))),
        st.tuples(_tvars, inner).map(lambda p: EpsTerm(p[0], Eq(Var(p[0]), p[1]))),
    ),
    max_leaves=8)

_formulas = st.recursive(
    st.tuples(_terms, _terms).map(lambda p: Eq(*p)),
    lambda inner: st.one_of(
        inner.map(Not),
        st.tuples(inner, inner).map(lambda p: Imp(*p)),
        st.tuples(inner, inner).map(lambda p: And(*p)),
        st.tuples(inner, inner).map(lambda p: Or(*p)),
        st.tuples(_tvars, inner).map(lambda p: Forall(p[0], p[1])),
    ),
    max_leaves=6)

_substs = st.fixed_dictionaries(
    {}, optional={v: _terms for v in ("a", "b", "c")}
).map(lambda d: Substitution(ind=d))


@settings(max_examples=200, deadline=None)
@given(_formulas, _substs, _substs)
def test_compose_agrees_with_sequential_application(f, s1, s2):
    lhs = apply_subst(f, compose_subst(s1, s2))
    rhs = apply_subst(apply_subst(f, s1), s2)
    assert lhs == rhs


@settings(max_examples=200, deadline=None)
@given(_terms, _substs, _substs)
def test_compose_agrees_on_terms(t, s1, s2):
    assert apply_subst(t, compose_subst(s1, s2)) == \
        apply_subst(apply_subst(t, s1), s2)


# ------------------------------------------------------------------ matching


def test_match_single_variable():
    got = match_instance(parse_formula("a = a"), parse_formula("0+1 = 0+1"))
    assert got is not None
    assert got.ind == {"a": Num(1)}


def test_match_inconsistent_bindings():
    assert match_instance(parse_formula("a = a"), parse_formula("0 = 0+1")) is None


def test_match_rejects_reduced_equality_axiom():
    bernays = parse_formula("0+1+1 = 0 -> (0+1 = 0+1+1 -> 0 = 0)")
    assert match_instance(AX14, bernays) is None


def test_match_finds_formula_variable_binding():
    instance = parse_formula("0+1+1 = 0 -> (d(0+1+1) = 0+1+1 -> d(0) = 0)")
    got = match_instance(AX14, instance)
    assert got is not None
    assert apply_subst(AX14, got) == instance


def test_match_respects_rigid_names():
    got = match_instance(parse_formula("a = b"), parse_formula("a = 0"),
                         rigid=frozenset({"a"}))
    assert got is not None and got.ind == {"b": Num(0)}
    assert match_instance(parse_formula("a = b"), parse_formula("0 = 0"),
                          rigid=frozenset({"a"})) is None


@settings(max_examples=150, deadline=None)
@given(_formulas, _substs)
def test_match_recovers_applied_substitution(f, s):
    instance = apply_subst(f, s)
    got = match_instance(f, instance)
    assert got is not None
    assert apply_subst(f, got) == instance


def test_match_under_binders_uses_bound_names():
    template = parse_formula("all c. c = a")
    inst = parse_formula("all c. c = 0+1")
    got = match_instance(template, inst)
    assert got is not None and got.ind == {"a": Num(1)}
    # the bound variable itself is not matchable to something else
    assert match_instance(parse_formula("all c. c = a"),
                          parse_formula("all c. 0 = 0")) is None
