"""The three-step consistency transformation and correctness verdicts.

A checked proof is rewritten into a figure: first into tree form where
every formula is the premise of at most one inference, then variable-free
by pushing substitutions upward from the end formula, then numeral-only
by computing every constant term.  The result need not be a proof (a
reduced equality-axiom instance can fail to match any axiom) but every
formula in it is correct, and that is the property the consistency
argument rides on.
"""

from dataclasses import dataclass

from .calculus import (
    AxiomInstance, InductionRule, ModusPonens, Proof, ProofLine, SubstRule,
    induction_variable, unfold_induction,
)
from .errors import ExplicitnessError, TransformError
from .grammar import format_formula
from .recursion import PRRegistry, evaluate
from .syntax import (
    EMPTY_SUBST, And, Eq, FmlVar, Formula, Imp, Neq, Not, Num, Or,
    Substitution, Term, apply_subst, children, compose_subst, is_numeral,
    match_instance,
)

__all__ = [
    "Figure", "ProofTree", "Verdict", "consistency_figure",
    "eliminate_variables", "format_figure", "is_correct_cnf", "is_correct_tt",
    "judge_figure", "reduce_functionals", "resolve_threads",
    "unfold_all_inductions",
]


# --------------------------------------------------- trees and figures


@dataclass(frozen=True)
class ProofTree:
    """One node of a proof in tree form.

    Leaves carry initial formulas (axiom instances), nodes with one child
    are pending substitutions, nodes with two children are modus ponens
    with the premise first and the implication second.  ``line`` points
    back at the original proof line the node was copied from.
    """

    formula: Formula
    children: tuple["ProofTree", ...] = ()
    line: int = 0
    subst: Substitution | None = None

    def walk(self):
        """Yield every node, conclusion first."""
        yield self
        for c in self.children:
            yield from c.walk()

    def size(self) -> int:
        return sum(1 for _ in self.walk())


@dataclass(frozen=True)
class Figure:
    """A numeral-only formula tree, the end product of the transformation."""

    root: ProofTree

    def walk(self):
        return self.root.walk()


@dataclass(frozen=True)
class Verdict:
    """Per-node correctness flags for a figure, conclusion-first order."""

    entries: tuple[tuple[ProofTree, bool], ...]

    @property
    def ok(self) -> bool:
        return all(flag for _, flag in self.entries)

    @property
    def culprit(self) -> ProofTree | None:
        for node, flag in self.entries:
            if not flag:
                return node
        return None


# --------------------------------------------------- step 1: threads


def resolve_threads(p: Proof) -> ProofTree:
    """Rewrite a checked proof in tree form.

    Shared lemmas are duplicated so that each formula except the end
    formula is used exactly once as the premise of an inference; lines
    the end formula never draws on are left out.  The blowup is at worst
    exponential in the depth of the sharing, which is fine at the scale
    this package works at.
    """
    def build(n: int) -> ProofTree:
        ln = p.lines[n - 1]
        just = ln.just
        if isinstance(just, AxiomInstance):
            return ProofTree(ln.formula, (), n)
        if isinstance(just, ModusPonens):
            return ProofTree(ln.formula,
                             (build(just.premise), build(just.implication)), n)
        if isinstance(just, SubstRule):
            return ProofTree(ln.formula, (build(just.source),), n,
                             subst=just.subst)
        raise TransformError(
            f"line {n} applies induction; unfold it before resolving threads")

    return build(len(p.lines))


# --------------------------------------------------- step 2: variables


def _closed(f: Formula) -> bool:
    return not f._fv and not f._fmlv


def _fmlvar_arities(f: Formula) -> dict[str, int]:
    found: dict[str, int] = {}

    def go(x):
        if isinstance(x, FmlVar):
            found.setdefault(x.name, len(x.args))
        for c in children(x):
            go(c)

    go(f)
    return found


def _zero_defaults(f: Formula) -> Substitution:
    """Bindings sending every free variable of ``f`` to a harmless value:
    individual variables to 0, formula variables to 0 = 0."""
    ind = {v: Num(0) for v in f._fv}
    fml = {}
    for name, arity in _fmlvar_arities(f).items():
        params = tuple(f"x{i}" for i in range(1, arity + 1))
        fml[name] = (params, Eq(Num(0), Num(0)))
    return Substitution(ind=ind, fml=fml)


def _merge(base: Substitution, extra: Substitution) -> Substitution:
    return Substitution(ind={**base.ind, **extra.ind},
                        fml={**base.fml, **extra.fml},
                        fn={**base.fn, **extra.fn})


def eliminate_variables(t: ProofTree) -> ProofTree:
    """Push substitutions upward until no node contains a variable.

    Works from the end formula back: substitution nodes are folded into
    the pending bindings and dropped; at a modus ponens the bindings
    forced on the conclusion carry over to both premises, and whatever
    variables the premises have beyond those of the conclusion are sent
    to zero.  The end formula itself must already be closed.
    """
    if not _closed(t.formula):
        raise TransformError("the end formula is not closed: "
                             + format_formula(t.formula))

    def go(node: ProofTree, theta: Substitution) -> ProofTree:
        if node.subst is not None:
            return go(node.children[0], compose_subst(node.subst, theta))
        f = apply_subst(node.formula, theta)
        if not node.children:
            if not _closed(f):
                raise TransformError(
                    f"leaf from line {node.line} still open after elimination: "
                    + format_formula(f))
            return ProofTree(f, (), node.line)
        prem, impl = node.children
        shape = impl.formula
        if not isinstance(shape, Imp):
            raise TransformError(
                f"line {impl.line} feeds modus ponens but is not an implication")
        if apply_subst(shape.right, theta) == f:
            sigma = theta
        else:
            forced = match_instance(shape.right, f)
            if forced is None:
                raise TransformError(
                    f"conclusion at line {node.line} does not match the "
                    f"implication from line {impl.line}")
            sigma = _merge(theta, forced)
        if prem.formula != shape.left:
            raise TransformError(
                f"premise at line {prem.line} does not match the implication"
                f" from line {impl.line}")
        spare = apply_subst(shape.left, sigma)
        widened = _merge(sigma, _zero_defaults(spare))
        return ProofTree(f, (go(prem, widened), go(impl, widened)), node.line)

    return go(t, EMPTY_SUBST)


# --------------------------------------------------- step 3: functionals


def _reduce_formula(f: Formula, reg: PRRegistry) -> Formula:
    def term(t: Term) -> Term:
        if is_numeral(t):
            return t
        return evaluate(t, reg)

    def go(x: Formula) -> Formula:
        if isinstance(x, (Eq, Neq)):
            return type(x)(term(x.left), term(x.right))
        if isinstance(x, Not):
            return Not(go(x.body))
        if isinstance(x, (Imp, And, Or)):
            return type(x)(go(x.left), go(x.right))
        raise TransformError(
            "cannot reduce a formula that still has variables or binders: "
            + format_formula(x))

    return go(f)


def reduce_functionals(t: ProofTree, reg: PRRegistry | None = None) -> Figure:
    """Compute every constant term down to its numeral.

    The outcome is a figure, not necessarily a proof: a leaf can stop
    being an instance of the axiom it came from once its terms are
    computed out.  A term whose head has no defining equations in the
    registry raises the usual stuck-term error.
    """
    reg = reg if reg is not None else PRRegistry()

    def go(node: ProofTree) -> ProofTree:
        return ProofTree(_reduce_formula(node.formula, reg),
                         tuple(go(c) for c in node.children), node.line)

    return Figure(go(t))


# --------------------------------------------------- correctness


def _require_explicit(f: Formula):
    def term_ok(t: Term) -> bool:
        return is_numeral(t)

    def go(x: Formula) -> bool:
        if isinstance(x, (Eq, Neq)):
            return term_ok(x.left) and term_ok(x.right)
        if isinstance(x, Not):
            return go(x.body)
        if isinstance(x, (Imp, And, Or)):
            return go(x.left) and go(x.right)
        return False

    if not go(f):
        raise ExplicitnessError(
            "not an explicit formula: " + format_formula(f))


def is_correct_tt(f: Formula) -> bool:
    """Truth-table correctness: atoms valued by numeral (in)equality,
    connectives by the usual tables."""
    _require_explicit(f)

    def go(x: Formula) -> bool:
        if isinstance(x, Eq):
            return x.left == x.right
        if isinstance(x, Neq):
            return x.left != x.right
        if isinstance(x, Not):
            return not go(x.body)
        if isinstance(x, Imp):
            return (not go(x.left)) or go(x.right)
        if isinstance(x, And):
            return go(x.left) and go(x.right)
        return go(x.left) or go(x.right)

    return go(f)


def is_correct_cnf(f: Formula) -> bool:
    """Normal-form correctness: every conjunct of the conjunctive normal
    form must contain an equation between coinciding numerals or an
    inequality between different ones.

    Atoms are (sign, left, right) triples; a clause is a set of atoms, the
    normal form a set of clauses.  The conversion is the plain distributive
    one, deduplicating as it goes.
    """
    _require_explicit(f)

    def nnf(x: Formula, neg: bool):
        if isinstance(x, Eq):
            return ("!=" if neg else "=", x.left, x.right)
        if isinstance(x, Neq):
            return ("=" if neg else "!=", x.left, x.right)
        if isinstance(x, Not):
            return nnf(x.body, not neg)
        if isinstance(x, Imp):
            kind = "and" if neg else "or"
            return (kind, nnf(x.left, not neg), nnf(x.right, neg))
        if isinstance(x, And):
            kind = "or" if neg else "and"
            return (kind, nnf(x.left, neg), nnf(x.right, neg))
        kind = "and" if neg else "or"
        return (kind, nnf(x.left, neg), nnf(x.right, neg))

    def clauses(x) -> frozenset:
        if x[0] == "and":
            return clauses(x[1]) | clauses(x[2])
        if x[0] == "or":
            return frozenset(c | d for c in clauses(x[1]) for d in clauses(x[2]))
        return frozenset((frozenset((x,)),))

    def atom_correct(a) -> bool:
        sign, left, right = a
        return (left == right) if sign == "=" else (left != right)

    return all(any(atom_correct(a) for a in clause)
               for clause in clauses(nnf(f, False)))


# --------------------------------------------------- the whole pipeline


def _numeral_consumers(p: Proof, n: int, var: str):
    """Line numbers of SubstRule lines drawing on line ``n`` that send the
    induction variable to a definite numeral."""
    hits = []
    for m, ln in enumerate(p.lines, 1):
        j = ln.just
        if isinstance(j, SubstRule) and j.source == n:
            t = j.subst.ind.get(var)
            if t is not None and is_numeral(t) and t.value >= 1:
                hits.append(m)
            else:
                raise TransformError(
                    f"line {m} draws on the induction at line {n} without "
                    f"fixing {var} to a positive numeral; cannot unfold")
        elif isinstance(j, ModusPonens) and n in (j.premise, j.implication):
            raise TransformError(
                f"line {m} feeds the open induction conclusion from line {n} "
                "into modus ponens; fix the variable by substitution first")
        elif isinstance(j, InductionRule) and n in (j.base, j.step):
            raise TransformError(
                f"line {m} builds an induction on top of the one at line {n};"
                " unfold inner applications first")
    return hits


def _shift(just, off: int):
    if isinstance(just, ModusPonens):
        return ModusPonens(just.premise + off, just.implication + off)
    if isinstance(just, SubstRule):
        return SubstRule(just.source + off, just.subst)
    return just


def _splice_unfolded(p: Proof, n: int) -> Proof:
    """Replace the induction at line ``n`` by its unfolded derivation.

    The instances to unfold at are read off the substitution lines that
    consume the conclusion; each distinct instance gets its own copy, the
    thread-duplication idea applied one step early.  All other lines
    survive with renumbered references.
    """
    var = induction_variable(p, n)
    consumers = _numeral_consumers(p, n, var)
    if not consumers:
        raise TransformError(
            f"the induction at line {n} proves an open formula nothing "
            "instantiates; the figure has no use for it")

    lines: list[ProofLine] = []
    conclusion_for: dict[int, int] = {}
    wanted = {p.lines[m - 1].just.subst.ind[var].value for m in consumers}
    for z in sorted(wanted):
        off = len(lines)
        for ln in unfold_induction(p, n, z).lines:
            lines.append(ProofLine(ln.formula, _shift(ln.just, off)))
        conclusion_for[z] = len(lines)

    base = len(lines)
    survivors = [m for m in range(1, len(p.lines) + 1) if m != n]
    pos = {m: base + i + 1 for i, m in enumerate(survivors)}
    taking = set(consumers)
    for m in survivors:
        ln = p.lines[m - 1]
        j = ln.just
        if m in taking:
            j = SubstRule(conclusion_for[j.subst.ind[var].value], j.subst)
        elif isinstance(j, ModusPonens):
            j = ModusPonens(pos[j.premise], pos[j.implication])
        elif isinstance(j, SubstRule):
            j = SubstRule(pos[j.source], j.subst)
        elif isinstance(j, InductionRule):
            j = InductionRule(pos[j.base], pos[j.step])
        lines.append(ProofLine(ln.formula, j))
    return Proof(tuple(lines), p.profile)


def unfold_all_inductions(p: Proof) -> Proof:
    """Splice out induction applications until none remain."""
    while True:
        target = next((m for m, ln in enumerate(p.lines, 1)
                       if isinstance(ln.just, InductionRule)), None)
        if target is None:
            return p
        p = _splice_unfolded(p, target)


def consistency_figure(p: Proof, reg: PRRegistry | None = None) -> Verdict:
    """Run the three steps over a checked proof and judge every node.

    Induction applications are unfolded first at the numeral the proof
    itself substitutes for the conclusion.  The verdict lists each node
    of the figure with its correctness flag; a proof of a correct closed
    formula comes back all-correct, and a proof ending in 0 != 0 never
    can, which is the whole point.
    """
    if reg is None:
        reg = p.profile.registry if p.profile.registry is not None else PRRegistry()
    flat = unfold_all_inductions(p)
    tree = resolve_threads(flat)
    closed = eliminate_variables(tree)
    return judge_figure(reduce_functionals(closed, reg))


def judge_figure(fig: Figure) -> Verdict:
    """Flag every node of a figure by the truth-table checker."""
    return Verdict(tuple((node, is_correct_tt(node.formula))
                         for node in fig.walk()))


def format_figure(verdict: Verdict) -> str:
    """Render a judged figure in proof-file style, one node per line."""
    out = ["# figure"]
    for i, (node, flag) in enumerate(verdict.entries, 1):
        mark = "correct" if flag else "INCORRECT"
        out.append(f"{i}: {format_formula(node.formula)}"
                   f" ; from line {node.line} ; {mark}")
    return "\n".join(out) + "\n"
