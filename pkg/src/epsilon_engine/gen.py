"""Deterministic fuzz generators.

Everything here draws from a caller-supplied random.Random, so a seed pins
the whole corpus.  Proof generators only emit material that already passed
check_proof; the point of fuzzing them is to exercise the transformation
and solving pipelines, not the checker's rejection paths.
"""

import random

from .calculus import (
    AXIOMS, AxiomInstance, InductionRule, ModusPonens, Proof, ProofLine,
    SubstRule, check_proof, eps_pa, pra, stage2,
)
from .recursion import PRRegistry, builtin_ackermann
from .syntax import (
    DELTA, And, EpsTerm, Eq, Formula, FunApp, FunctionalArg, Imp, Neq, Not,
    Num, Or, Substitution, Term, Var, apply_subst, numeral, succ,
)

__all__ = [
    "break_trace",
    "gen_closed_term",
    "gen_elementary_proof",
    "gen_eps_proof",
    "gen_explicit_formula",
    "gen_pra_proof",
    "gen_trace",
]


# ------------------------------------------------------------ closed terms


def _functional(rng: random.Random) -> FunctionalArg:
    c = Var("c")
    body = rng.choice([
        succ(c),
        FunApp(DELTA, (c,)),
        FunApp("plus", (c, numeral(1 + rng.randrange(2)))),
        FunApp("times", (c, numeral(2))),
    ])
    return FunctionalArg(("c",), body)


def gen_closed_term(rng: random.Random, reg: PRRegistry | None = None,
                    nesting: int = 4) -> Term:
    """A closed choice-free term over the stock registry.

    Numerals stay small and the three-argument recursion is capped at
    first argument 2, so every term evaluates in a few hundred innermost
    steps at worst.
    """
    reg = reg or builtin_ackermann()

    def go(depth: int) -> Term:
        if depth == 0 or rng.random() < 0.3:
            return numeral(rng.randrange(4))
        roll = rng.random()
        if roll < 0.15:
            return succ(go(depth - 1))
        if roll < 0.3:
            return FunApp(DELTA, (go(depth - 1),))
        if roll < 0.45:
            return FunApp("iterate",
                          (numeral(rng.randrange(4)), _functional(rng),
                           go(depth - 1)))
        if roll < 0.55:
            return FunApp("ack", (numeral(rng.randrange(3)),
                                  numeral(rng.randrange(4)),
                                  numeral(rng.randrange(4))))
        fn = rng.choice(["plus", "times", "monus", "differ", "same",
                         "notzero", "seed"])
        arity = len(reg.defs[fn].base_eq.left.args)
        return FunApp(fn, tuple(go(depth - 1) for _ in range(arity)))

    return go(nesting)


# ------------------------------------------------------- explicit formulas


def gen_explicit_formula(rng: random.Random, depth: int = 6) -> Formula:
    """A variable-free formula whose terms are all numerals."""
    if depth == 0 or rng.random() < 0.25:
        a, b = numeral(rng.randrange(6)), numeral(rng.randrange(6))
        return Eq(a, b) if rng.random() < 0.5 else Neq(a, b)
    k = rng.randrange(4)
    if k == 0:
        return Not(gen_explicit_formula(rng, depth - 1))
    shape = (Imp, And, Or)[k - 1]
    return shape(gen_explicit_formula(rng, depth - 1),
                 gen_explicit_formula(rng, depth - 1))


# ----------------------------------------------------------- pair descents


def gen_trace(rng: random.Random, max_first: int = 12,
              max_second: int = 24) -> list[tuple[int, int]]:
    """A strictly lexicographically decreasing run of natural pairs."""
    n, m = rng.randrange(max_first), rng.randrange(max_second)
    out = [(n, m)]
    while (n, m) != (0, 0) and rng.random() < 0.9:
        if n > 0 and (m == 0 or rng.random() < 0.3):
            n, m = rng.randrange(n), rng.randrange(max_second)
        else:
            m = rng.randrange(m)
        out.append((n, m))
    return out


def break_trace(rng: random.Random, trace) -> list[tuple[int, int]]:
    """A copy of the trace with one step spoiled: a stall, a second-slot
    climb, or a negative entry.  Always rejected by pair_descent_bound."""
    out = list(trace)
    kind = rng.randrange(3)
    if kind == 0 or len(out) < 2:
        out.append(out[-1])
    elif kind == 1:
        i = rng.randrange(1, len(out))
        n, m = out[i - 1]
        out[i] = (n, m + 1 + rng.randrange(3))
    else:
        i = rng.randrange(len(out))
        out[i] = (out[i][0], -1 - rng.randrange(2))
    return out


# ------------------------------------------------------------------ proofs


def _plain_term(rng: random.Random, depth: int = 3) -> Term:
    """Closed term over zero, successor, and predecessor only."""
    if depth == 0 or rng.random() < 0.4:
        return numeral(rng.randrange(3))
    if rng.random() < 0.6:
        return succ(_plain_term(rng, depth - 1))
    return FunApp(DELTA, (_plain_term(rng, depth - 1),))


def _pr_term(rng: random.Random, var: str | None = None) -> Term:
    """Small term over the registry, optionally with one free variable."""
    base = Var(var) if var else numeral(rng.randrange(3))
    roll = rng.random()
    if roll < 0.3:
        return base
    if roll < 0.6:
        return FunApp("plus", (base, numeral(1 + rng.randrange(2))))
    if roll < 0.8:
        return FunApp("times", (base, numeral(2)))
    return succ(base)


def _seed_line(rng: random.Random, with_registry: bool) -> ProofLine:
    t = _pr_term(rng) if with_registry and rng.random() < 0.5 \
        else _plain_term(rng)
    roll = rng.random()
    if roll < 0.35:
        sigma = Substitution(ind={"a": t})
        return ProofLine(apply_subst(AXIOMS["13"], sigma),
                         AxiomInstance("13", sigma))
    if roll < 0.55:
        sigma = Substitution(ind={"a": t})
        return ProofLine(apply_subst(AXIOMS["15"], sigma),
                         AxiomInstance("15", sigma))
    if roll < 0.7:
        sigma = Substitution(ind={"a": t})
        return ProofLine(apply_subst(AXIOMS["16"], sigma),
                         AxiomInstance("16", sigma))
    body = rng.choice([Eq(Var("c"), t), Neq(succ(Var("c")), Num(0))])
    sigma = Substitution(ind={"a": _plain_term(rng), "b": _plain_term(rng)},
                         fml={"A": (("c",), body)})
    return ProofLine(apply_subst(AXIOMS["14"], sigma),
                     AxiomInstance("14", sigma))


def _grow(rng: random.Random, lines: list[ProofLine], rounds: int) -> None:
    """Derive new lines from existing ones: weakening through axiom 1 plus
    modus ponens, and numeral substitution into free variables."""
    for _ in range(rounds):
        i = rng.randrange(len(lines))
        f = lines[i].formula
        # an open induction conclusion may only feed substitutions, so
        # keep it out of the modus ponens branch
        inducted = isinstance(lines[i].just, InductionRule) and f._fv
        if rng.random() < 0.6 and not inducted:
            g = rng.choice(lines).formula if rng.random() < 0.5 \
                else gen_explicit_formula(rng, 2)
            sigma = Substitution(fml={"A": ((), f), "B": ((), g)})
            lines.append(ProofLine(apply_subst(AXIOMS["1"], sigma),
                                   AxiomInstance("1", sigma)))
            lines.append(ProofLine(Imp(g, f),
                                   ModusPonens(i + 1, len(lines))))
        elif f._fv:
            # positive numerals keep induction conclusions unfoldable
            v = sorted(f._fv)[0]
            sigma = Substitution(ind={v: numeral(1 + rng.randrange(3))})
            lines.append(ProofLine(apply_subst(f, sigma),
                                   SubstRule(i + 1, sigma)))


def _close_end(rng: random.Random, lines: list[ProofLine]) -> None:
    """Thread resolution wants a closed end formula; substitute numerals
    for whatever the last line leaves free."""
    f = lines[-1].formula
    if f._fv:
        sigma = Substitution(ind={v: numeral(1 + rng.randrange(3))
                                  for v in sorted(f._fv)})
        lines.append(ProofLine(apply_subst(f, sigma),
                               SubstRule(len(lines), sigma)))


def gen_elementary_proof(rng: random.Random) -> Proof:
    """A checkable proof in the elementary stage: axioms 1 through 16,
    modus ponens, and substitution."""
    lines = [_seed_line(rng, with_registry=False)
             for _ in range(1 + rng.randrange(3))]
    _grow(rng, lines, 2 + rng.randrange(4))
    _close_end(rng, lines)
    p = Proof(tuple(lines), stage2())
    check_proof(p)
    return p


def _induction_block(rng: random.Random, lines: list[ProofLine]) -> None:
    """Append an honest induction: A(0+1), A(a) -> A(a+1), the rule, and
    a numeral instance of the conclusion."""
    t = _pr_term(rng, "a")
    matrix = rng.choice([Eq(t, t), Neq(succ(t), Num(0))])
    axiom = "13" if isinstance(matrix, Eq) else "15"
    inner = t if isinstance(matrix, Eq) else t

    def instance(term: Term) -> tuple[Formula, Substitution]:
        sigma = Substitution(ind={"a": term})
        return apply_subst(matrix, sigma), sigma

    def seed(term: Term) -> None:
        _, sigma = instance(term)
        bind = Substitution(ind={"a": apply_subst(inner, sigma)})
        lines.append(ProofLine(apply_subst(AXIOMS[axiom], bind),
                               AxiomInstance(axiom, bind)))

    seed(Num(1))
    base_at = len(lines)
    seed(succ(Var("a")))
    at_succ = lines[-1].formula
    weaken = Substitution(fml={"A": ((), at_succ), "B": ((), matrix)})
    lines.append(ProofLine(apply_subst(AXIOMS["1"], weaken),
                           AxiomInstance("1", weaken)))
    lines.append(ProofLine(Imp(matrix, at_succ),
                           ModusPonens(len(lines) - 1, len(lines))))
    lines.append(ProofLine(matrix, InductionRule(base_at, len(lines))))
    sigma = Substitution(ind={"a": numeral(1 + rng.randrange(4))})
    lines.append(ProofLine(apply_subst(matrix, sigma),
                           SubstRule(len(lines), sigma)))


def gen_pra_proof(rng: random.Random) -> Proof:
    """A checkable proof with defining equations and induction."""
    reg = builtin_ackermann()
    lines = [_seed_line(rng, with_registry=True)]
    if rng.random() < 0.5:
        fn = rng.choice(["plus", "times", "notzero", "monus"])
        which = rng.choice(["base", "step"])
        form = reg.defining_axioms()[f"{fn}.{which}"]
        sigma = Substitution(ind={v: numeral(rng.randrange(3))
                                  for v in sorted(form._fv)})
        lines.append(ProofLine(apply_subst(form, sigma),
                               AxiomInstance(f"{fn}.{which}", sigma)))
    for _ in range(1 + rng.randrange(2)):
        _induction_block(rng, lines)
    _grow(rng, lines, 1 + rng.randrange(3))
    _close_end(rng, lines)
    p = Proof(tuple(lines), pra(reg))
    check_proof(p)
    return p


# -------------------------------------------------------- epsilon corpus


def _rank1_matrix(rng: random.Random) -> Formula:
    """A matrix over one variable with no choice subterms."""
    b = Var("b")

    def atom() -> Formula:
        roll = rng.random()
        if roll < 0.4:
            return Eq(b, numeral(rng.randrange(6)))
        if roll < 0.6:
            return Neq(b, numeral(rng.randrange(4)))
        if roll < 0.8:
            return Eq(FunApp("plus", (b, numeral(1 + rng.randrange(2)))),
                      numeral(rng.randrange(6)))
        return Eq(FunApp("times", (b, numeral(2))),
                  numeral(rng.randrange(5)))

    out = atom()
    for _ in range(rng.randrange(3)):
        out = Or(out, atom()) if rng.random() < 0.8 else And(out, atom())
    return out


def gen_eps_proof(rng: random.Random) -> Proof:
    """A checkable proof whose critical formulas all govern rank-1 terms.

    Matrices are choice-free, so nothing is subordinate to anything and
    the solver's discard case can never be needed.  Witness substituends
    may name another matrix's term, which exercises re-adoption after the
    canonical key shifts.
    """
    matrices = [_rank1_matrix(rng) for _ in range(1 + rng.randrange(3))]
    lines: list[ProofLine] = []
    for i, body in enumerate(matrices):
        fml = {"A": (("b",), body)}
        picks = [k for k in ("eps1", "eps2", "eps3", "eps4")
                 if rng.random() < 0.5]
        if not picks:
            picks = ["eps1"]
        for axiom in picks:
            if axiom == "eps1":
                others = matrices[:i] + matrices[i + 1:]
                if others and rng.random() < 0.3:
                    t: Term = EpsTerm("b", rng.choice(others))
                else:
                    t = numeral(rng.randrange(7))
                sigma = Substitution(ind={"a": t}, fml=fml)
            else:
                sigma = Substitution(fml=fml)
            lines.append(ProofLine(apply_subst(AXIOMS[axiom], sigma),
                                   AxiomInstance(axiom, sigma)))
    p = Proof(tuple(lines), eps_pa())
    check_proof(p)
    return p
