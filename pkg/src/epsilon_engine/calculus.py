"""Axiom systems, inference rules, and proof checking.

A proof is a numbered list of formulas, each carrying its justification:
an axiom instance (with explicit or recoverable bindings), modus ponens,
substitution, or the induction rule.  Which axioms and rules are
admissible is decided by a profile; the four shipped profiles are the
propositional-plus-number core (``stage2``), primitive recursive
arithmetic with the induction rule (``pra``), its second-order variant
without induction (``2pra-``), and the latter extended by the
transfinite choice axioms (``eps-pa``).

Defining equations of the profile's registry are citable as axioms under
``name.base`` and ``name.step``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ParseError, ProofError, UnfoldError
from .grammar import format_formula, format_term, parse_formula, parse_term
from .recursion import PRRegistry, builtin_ackermann
from .syntax import (
    And,
    EpsTerm,
    Eq,
    Exists,
    FmlVar,
    Forall,
    Formula,
    FunApp,
    FunctionalArg,
    Imp,
    Neq,
    Not,
    Num,
    Or,
    PiTerm,
    Substitution,
    Succ,
    Term,
    Var,
    apply_subst,
    compose_subst,
    match_instance,
    succ,
)

__all__ = [
    "AXIOMS",
    "AxiomInstance",
    "CriticalFormula",
    "InductionRule",
    "ModusPonens",
    "Profile",
    "Proof",
    "ProofLine",
    "SubstRule",
    "check_proof",
    "collect_critical",
    "eliminate_quantifiers",
    "eps_pa",
    "format_bindings",
    "format_proof",
    "induction_variable",
    "parse_bindings",
    "parse_proof",
    "pra",
    "pra2",
    "profile_by_name",
    "stage2",
    "unfold_induction",
]


# ------------------------------------------------------------- axiom table


_AXIOM_TEXT = {
    "1": "A -> B -> A",
    "2": "(A -> A -> B) -> A -> B",
    "3": "(A -> B -> C) -> B -> A -> C",
    "4": "(B -> C) -> (A -> B) -> A -> C",
    "5": "A & B -> A",
    "6": "A & B -> B",
    "7": "A -> B -> A & B",
    "8": "A -> A | B",
    "9": "B -> A | B",
    "10": "(A -> C) -> (B -> C) -> A | B -> C",
    "11": "A -> ~A -> B",
    "12": "(A -> B) -> (~A -> B) -> B",
    "13": "a = a",
    "14": "a = b -> A(a) -> A(b)",
    "15": "a + 1 != 0",
    "16": "d(a + 1) = a",
    "16'": "a != 0 -> a = d(a) + 1",
    # Transfinite axioms, witness convention: eps picks a witness when one
    # exists, pi flags whether the value is a default (1) or a witness (0).
    "eps1": "A(a) -> A(eps b. A(b))",
    "eps2": "A(eps b. A(b)) -> (pi b. A(b)) = 0",
    "eps3": "~A(eps b. A(b)) -> (pi b. A(b)) = 0+1",
    "eps4": "(eps b. A(b)) != 0 -> ~A(d(eps b. A(b)))",
    # Quantifiers defined away in terms of eps.
    "defAll": "((all b. A(b)) -> A(eps b. ~A(b)))"
              " & (A(eps b. ~A(b)) -> all b. A(b))",
    "defEx": "((ex b. A(b)) -> A(eps b. A(b)))"
             " & (A(eps b. A(b)) -> ex b. A(b))",
}

AXIOMS: dict[str, Formula] = {k: parse_formula(v) for k, v in _AXIOM_TEXT.items()}

_CORE = [str(n) for n in range(1, 16)]
_TRANSFINITE = ["eps1", "eps2", "eps3", "eps4"]


# ---------------------------------------------------------------- profiles


@dataclass(frozen=True)
class Profile:
    """Admissible axioms and rules for checking one proof."""

    name: str
    axioms: dict[str, Formula] = field(repr=False)
    allows_induction: bool = False
    registry: PRRegistry | None = field(default=None, repr=False)


def _with_registry(ids: list[str], registry: PRRegistry | None) -> dict[str, Formula]:
    table = {i: AXIOMS[i] for i in ids}
    if registry is not None:
        table.update(registry.defining_axioms())
    return table


def stage2() -> Profile:
    """Elementary calculation: axioms 1 through 16, no recursion."""
    return Profile("stage2", _with_registry(_CORE + ["16"], None))


def pra(registry: PRRegistry | None = None) -> Profile:
    """Primitive recursive arithmetic: 1-16, defining equations, induction."""
    registry = registry or builtin_ackermann()
    return Profile("pra", _with_registry(_CORE + ["16"], registry),
                   allows_induction=True, registry=registry)


def pra2(registry: PRRegistry | None = None) -> Profile:
    """Second-order primitive recursive arithmetic without induction;
    axiom 16 is traded for the predecessor form 16'."""
    registry = registry or builtin_ackermann()
    return Profile("2pra-", _with_registry(_CORE + ["16'"], registry),
                   registry=registry)


def eps_pa(registry: PRRegistry | None = None) -> Profile:
    """The 2pra- system plus the transfinite axioms and the quantifier
    definitions."""
    registry = registry or builtin_ackermann()
    ids = _CORE + ["16'"] + _TRANSFINITE + ["defAll", "defEx"]
    return Profile("eps-pa", _with_registry(ids, registry), registry=registry)


_PROFILE_FACTORIES = {
    "stage2": stage2,
    "pra": pra,
    "2pra-": pra2,
    "eps-pa": eps_pa,
}


def profile_by_name(name: str, registry: PRRegistry | None = None) -> Profile:
    factory = _PROFILE_FACTORIES.get(name)
    if factory is None:
        known = ", ".join(sorted(_PROFILE_FACTORIES))
        raise ProofError(None, f"unknown system {name!r} (one of: {known})")
    if name == "stage2":
        return factory()
    return factory(registry)


# ------------------------------------------------------------------ proofs


@dataclass(frozen=True)
class AxiomInstance:
    """Cites an axiom template; bindings may be omitted when the instance
    can be recovered by matching."""

    axiom_id: str
    subst: Substitution | None = None


@dataclass(frozen=True)
class ModusPonens:
    premise: int
    implication: int


@dataclass(frozen=True)
class SubstRule:
    source: int
    subst: Substitution


@dataclass(frozen=True)
class InductionRule:
    base: int
    step: int


Justification = AxiomInstance | ModusPonens | SubstRule | InductionRule


@dataclass(frozen=True)
class ProofLine:
    formula: Formula
    just: Justification


@dataclass(frozen=True)
class Proof:
    lines: tuple[ProofLine, ...]
    profile: Profile


@dataclass(frozen=True)
class CriticalFormula:
    """A transfinite-axiom instance together with its governing term.

    kind is one of EpsAxiom (witness axiom), PiAxiom0, PiAxiom1 (the two
    flag axioms), LeastNumber (the minimality axiom).  For EpsAxiom the
    witness field holds the term substituted on the hypothesis side.
    """

    kind: str
    eterm: Term
    instance: Formula
    line: int
    witness: Term | None = None


_CRITICAL_KINDS = {
    "eps1": "EpsAxiom",
    "eps2": "PiAxiom0",
    "eps3": "PiAxiom1",
    "eps4": "LeastNumber",
}


# ---------------------------------------------------------------- checking


def _line_subst(p: Proof, n: int) -> Substitution:
    """Explicit bindings of axiom line ``n``, or bindings recovered by
    matching the template."""
    line = p.lines[n - 1]
    just = line.just
    if not isinstance(just, AxiomInstance):
        raise ProofError(n, "not an axiom line")
    if just.subst is not None:
        return just.subst
    template = p.profile.axioms.get(just.axiom_id)
    if template is None:
        raise ProofError(n, f"axiom {just.axiom_id} not available in"
                            f" system {p.profile.name}")
    sigma = match_instance(template, line.formula)
    if sigma is None:
        raise ProofError(n, f"cannot recover bindings for axiom"
                            f" {just.axiom_id}; state them explicitly")
    return sigma


def _check_axiom(p: Proof, n: int, line: ProofLine, just: AxiomInstance):
    template = p.profile.axioms.get(just.axiom_id)
    if template is None:
        raise ProofError(n, f"axiom {just.axiom_id} not available in"
                            f" system {p.profile.name}")
    if just.subst is not None:
        try:
            got = apply_subst(template, just.subst)
        except Exception as exc:
            raise ProofError(n, f"bindings do not fit axiom"
                                f" {just.axiom_id}: {exc}") from exc
        if got != line.formula:
            raise ProofError(n, f"formula is not the stated instance of"
                                f" axiom {just.axiom_id}")
    elif template != line.formula and match_instance(template, line.formula) is None:
        raise ProofError(n, f"formula does not match axiom {just.axiom_id}")


def _check_ref(n: int, ref: int, limit: int, what: str) -> None:
    if not 1 <= ref < limit:
        raise ProofError(n, f"{what} reference {ref} is not an earlier line")


def induction_variable(p: Proof, n: int) -> str:
    """The variable the induction application at line ``n`` recurses on."""
    line = p.lines[n - 1]
    just = line.just
    if not isinstance(just, InductionRule):
        raise ProofError(n, "not an induction line")
    _check_ref(n, just.base, n, "base")
    _check_ref(n, just.step, n, "step")
    conclusion = line.formula
    base = p.lines[just.base - 1].formula
    step = p.lines[just.step - 1].formula
    for v in sorted(conclusion._fv):
        want_base = apply_subst(conclusion, Substitution(ind={v: Num(1)}))
        want_step = Imp(conclusion,
                        apply_subst(conclusion, Substitution(ind={v: succ(Var(v))})))
        if base == want_base and step == want_step:
            return v
    raise ProofError(n, "no variable makes the cited lines the base and"
                        " step of this conclusion")


def check_proof(p: Proof) -> None:
    """Validate every line; raises ProofError at the first bad one."""
    for n, line in enumerate(p.lines, 1):
        just = line.just
        if isinstance(just, AxiomInstance):
            _check_axiom(p, n, line, just)
        elif isinstance(just, ModusPonens):
            _check_ref(n, just.premise, n, "premise")
            _check_ref(n, just.implication, n, "implication")
            impl = p.lines[just.implication - 1].formula
            if not isinstance(impl, Imp):
                raise ProofError(n, f"line {just.implication} is not an implication")
            if impl.left != p.lines[just.premise - 1].formula:
                raise ProofError(n, f"line {just.premise} is not the hypothesis"
                                    f" of line {just.implication}")
            if impl.right != line.formula:
                raise ProofError(n, "formula is not the conclusion of the"
                                    " cited implication")
        elif isinstance(just, SubstRule):
            _check_ref(n, just.source, n, "source")
            try:
                got = apply_subst(p.lines[just.source - 1].formula, just.subst)
            except Exception as exc:
                raise ProofError(n, f"substitution fails on line"
                                    f" {just.source}: {exc}") from exc
            if got != line.formula:
                raise ProofError(n, f"formula is not the stated substitution"
                                    f" instance of line {just.source}")
        elif isinstance(just, InductionRule):
            if not p.profile.allows_induction:
                raise ProofError(n, f"induction rule not available in"
                                    f" system {p.profile.name}")
            induction_variable(p, n)
        else:
            raise ProofError(n, f"unknown justification {just!r}")


def collect_critical(p: Proof) -> list[CriticalFormula]:
    """All transfinite-axiom instances in the proof, classified and paired
    with their governing eps/pi-term."""
    out = []
    for n, line in enumerate(p.lines, 1):
        just = line.just
        if not isinstance(just, AxiomInstance):
            continue
        kind = _CRITICAL_KINDS.get(just.axiom_id)
        if kind is None:
            continue
        sigma = _line_subst(p, n)
        if kind in ("PiAxiom0", "PiAxiom1"):
            shape: Term = PiTerm("b", FmlVar("A", (Var("b"),)))
        else:
            shape = EpsTerm("b", FmlVar("A", (Var("b"),)))
        try:
            eterm = apply_subst(shape, sigma)
        except Exception as exc:
            raise ProofError(n, f"bindings do not determine the governing"
                                f" term: {exc}") from exc
        witness = None
        if just.axiom_id == "eps1":
            witness = sigma.ind.get("a", Var("a"))
        out.append(CriticalFormula(kind, eterm, line.formula, n, witness))
    return out


# ------------------------------------------------- quantifier elimination


def eliminate_quantifiers(f: Formula) -> Formula:
    """Translate quantifiers into eps-terms, innermost first.

    A universal becomes the body at a would-be counterexample, an
    existential becomes the body at a witness; the output contains no
    Forall or Exists anywhere, including inside eps/pi bodies.
    """

    def term(t: Term) -> Term:
        k = type(t)
        if k in (Num, Var):
            return t
        if k is Succ:
            return succ(term(t.arg))
        if k is FunApp:
            return FunApp(t.fn, tuple(term(a) for a in t.args))
        if k is FunctionalArg:
            return FunctionalArg(t.vars, term(t.body))
        if k in (EpsTerm, PiTerm):
            return k(t.var, go(t.body))
        raise TypeError(f"unexpected term node {t!r}")

    def go(g: Formula) -> Formula:
        k = type(g)
        if k in (Eq, Neq):
            return k(term(g.left), term(g.right))
        if k is Not:
            return Not(go(g.body))
        if k in (Imp, And, Or):
            return k(go(g.left), go(g.right))
        if k is FmlVar:
            return FmlVar(g.name, tuple(term(a) for a in g.args))
        if k is Forall:
            body = go(g.body)
            probe = EpsTerm(g.var, Not(body))
            return apply_subst(body, Substitution(ind={g.var: probe}))
        if k is Exists:
            body = go(g.body)
            probe = EpsTerm(g.var, body)
            return apply_subst(body, Substitution(ind={g.var: probe}))
        raise TypeError(f"unexpected formula node {g!r}")

    return go(f)


# ---------------------------------------------------- induction unfolding


def _closure(lines: tuple[ProofLine, ...], n: int) -> list[int]:
    """Line numbers the proof of line ``n`` rests on, in proof order."""
    seen = set()
    stack = [n]
    while stack:
        m = stack.pop()
        if m in seen:
            continue
        seen.add(m)
        just = lines[m - 1].just
        if isinstance(just, ModusPonens):
            stack += [just.premise, just.implication]
        elif isinstance(just, SubstRule):
            stack.append(just.source)
        elif isinstance(just, InductionRule):
            stack += [just.base, just.step]
    return sorted(seen)


def _respan(just: Justification, mapping: dict[int, int]) -> Justification:
    if isinstance(just, ModusPonens):
        return ModusPonens(mapping[just.premise], mapping[just.implication])
    if isinstance(just, SubstRule):
        return SubstRule(mapping[just.source], just.subst)
    if isinstance(just, InductionRule):
        return InductionRule(mapping[just.base], mapping[just.step])
    return just


def _specialize(p: Proof, m: int, mapping: dict[int, int],
                theta: Substitution, var: str) -> ProofLine:
    """Copy line ``m`` with ``theta`` applied and references remapped."""
    line = p.lines[m - 1]
    formula = apply_subst(line.formula, theta)
    just = line.just
    if isinstance(just, AxiomInstance):
        sigma = _line_subst(p, m)
        return ProofLine(formula, AxiomInstance(just.axiom_id,
                                                compose_subst(sigma, theta)))
    if isinstance(just, SubstRule):
        if var in just.subst.ind:
            raise UnfoldError(
                f"line {m} substitutes for the induction variable {var};"
                " rename it apart before unfolding")
        return ProofLine(formula, SubstRule(mapping[just.source],
                                            compose_subst(just.subst, theta)))
    if isinstance(just, ModusPonens):
        return ProofLine(formula, ModusPonens(mapping[just.premise],
                                              mapping[just.implication]))
    raise UnfoldError(f"line {m}: cannot specialize {type(just).__name__}")


def unfold_induction(p: Proof, line: int, z: int) -> Proof:
    """Replace the induction application at ``line`` by explicit copies.

    Returns a proof of the conclusion instantiated at the numeral ``z``:
    the base-premise proof followed by z-1 specialized copies of the
    step-premise proof, chained by modus ponens.  Both premise proofs
    must themselves be induction-free.
    """
    if z < 1:
        raise UnfoldError("the instance must be a numeral from 1 up")
    target = p.lines[line - 1]
    if not isinstance(target.just, InductionRule):
        raise UnfoldError(f"line {line} is not an induction application")
    var = induction_variable(p, line)
    base_no, step_no = target.just.base, target.just.step
    base_closure = _closure(p.lines, base_no)
    step_closure = _closure(p.lines, step_no)
    for m in base_closure + step_closure:
        if isinstance(p.lines[m - 1].just, InductionRule):
            raise UnfoldError(f"line {m} is a nested induction application;"
                              " unfold it first")

    out: list[ProofLine] = []
    base_map: dict[int, int] = {}
    for m in base_closure:
        base_map[m] = len(out) + 1
        out.append(ProofLine(p.lines[m - 1].formula,
                             _respan(p.lines[m - 1].just, base_map)))
    proved = base_map[base_no]
    for k in range(1, z):
        theta = Substitution(ind={var: Num(k)})
        step_map: dict[int, int] = {}
        for m in step_closure:
            step_map[m] = len(out) + 1
            out.append(_specialize(p, m, step_map, theta, var))
        impl_at = step_map[step_no]
        impl = out[impl_at - 1].formula
        out.append(ProofLine(impl.right, ModusPonens(proved, impl_at)))
        proved = len(out)
    return Proof(tuple(out), p.profile)


# --------------------------------------------------- proof files


def _split_bindings(body: str) -> list[str]:
    parts = []
    depth = 0
    start = 0
    for i, ch in enumerate(body):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == "," and depth == 0:
            parts.append(body[start:i])
            start = i + 1
    tail = body[start:]
    if tail.strip():
        parts.append(tail)
    return parts


def _parse_binding_key(key: str) -> tuple[str, tuple[str, ...] | None]:
    key = key.strip()
    if "(" in key:
        if not key.endswith(")"):
            raise ParseError(f"malformed binding key {key!r}")
        name, inner = key[:-1].split("(", 1)
        params = tuple(s.strip() for s in inner.split(",")) if inner.strip() else ()
        return name.strip(), params
    return key, None


def parse_bindings(text: str) -> Substitution:
    """Parse ``{a: 0+1, A(c): d(c) = c, f(b): b+1}`` into a substitution.

    Uppercase keys bind formula variables, lowercase keys with parameter
    lists bind function variables, bare lowercase keys bind individual
    variables.
    """
    text = text.strip()
    if not (text.startswith("{") and text.endswith("}")):
        raise ParseError(f"bindings must be braced, got {text!r}")
    ind: dict[str, Term] = {}
    fml: dict[str, tuple[tuple[str, ...], Formula]] = {}
    fn: dict[str, FunctionalArg] = {}
    for item in _split_bindings(text[1:-1]):
        if not item.strip():
            continue
        if ":" not in item:
            raise ParseError(f"binding {item.strip()!r} has no value")
        key, value = item.split(":", 1)
        name, params = _parse_binding_key(key)
        if not name:
            raise ParseError(f"binding {item.strip()!r} has no key")
        if name[0].isupper():
            fml[name] = (params or (), parse_formula(value))
        elif params is not None:
            fn[name] = FunctionalArg(params, parse_term(value))
        else:
            ind[name] = parse_term(value)
    return Substitution(ind=ind, fml=fml, fn=fn)


def format_bindings(s: Substitution) -> str:
    parts = []
    for v in sorted(s.ind):
        parts.append(f"{v}: {format_term(s.ind[v])}")
    for a in sorted(s.fml):
        params, body = s.fml[a]
        head = f"{a}({', '.join(params)})" if params else a
        parts.append(f"{head}: {format_formula(body)}")
    for f in sorted(s.fn):
        fa = s.fn[f]
        parts.append(f"{f}({', '.join(fa.vars)}): {format_term(fa.body)}")
    return "{" + ", ".join(parts) + "}"


def _parse_justification(text: str, n: int) -> Justification:
    text = text.strip()
    head, _, rest = text.partition(" ")
    rest = rest.strip()
    if head == "ax":
        axiom_id, _, binding_text = rest.partition(" ")
        if not axiom_id:
            raise ProofError(n, "ax needs an axiom id")
        subst = parse_bindings(binding_text) if binding_text.strip() else None
        return AxiomInstance(axiom_id, subst)
    if head == "mp":
        try:
            i, j = rest.split()
            return ModusPonens(int(i), int(j))
        except ValueError:
            raise ProofError(n, f"mp needs two line numbers, got {rest!r}") from None
    if head == "subst":
        source, _, binding_text = rest.partition(" ")
        try:
            src = int(source)
        except ValueError:
            raise ProofError(n, f"subst needs a line number, got {source!r}") from None
        if not binding_text.strip():
            raise ProofError(n, "subst needs bindings")
        return SubstRule(src, parse_bindings(binding_text))
    if head == "ind":
        try:
            i, j = rest.split()
            return InductionRule(int(i), int(j))
        except ValueError:
            raise ProofError(n, f"ind needs two line numbers, got {rest!r}") from None
    raise ProofError(n, f"unknown justification {head!r}")


def parse_proof(text: str, registry: PRRegistry | None = None) -> Proof:
    """Read a proof file: a ``system:`` header, an optional ``registry:``
    header, then numbered lines ``n: <formula> ; <justification>``."""
    system = None
    lines: list[ProofLine] = []
    for raw in text.splitlines():
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if stripped.startswith("system:"):
            system = stripped.split(":", 1)[1].strip()
            continue
        if stripped.startswith("registry:"):
            which = stripped.split(":", 1)[1].strip()
            if which == "builtin":
                registry = registry or builtin_ackermann()
            elif which != "none":
                raise ProofError(None, f"unknown registry {which!r}"
                                       " (builtin or none)")
            else:
                registry = None
            continue
        label, sep, body = stripped.partition(":")
        if not sep or not label.strip().isdigit():
            raise ProofError(None, f"expected 'n: formula ; justification',"
                                   f" got {stripped!r}")
        n = int(label)
        if n != len(lines) + 1:
            raise ProofError(n, f"lines must be numbered consecutively,"
                                f" expected {len(lines) + 1}")
        formula_text, sep, just_text = body.partition(";")
        if not sep:
            raise ProofError(n, "missing justification after ';'")
        formula = parse_formula(formula_text)
        lines.append(ProofLine(formula, _parse_justification(just_text, n)))
    if system is None:
        raise ProofError(None, "missing 'system:' header")
    return Proof(tuple(lines), profile_by_name(system, registry))


def format_proof(p: Proof) -> str:
    out = [f"system: {p.profile.name}"]
    if p.profile.registry is not None:
        out.append("registry: builtin")
    for n, line in enumerate(p.lines, 1):
        just = line.just
        if isinstance(just, AxiomInstance):
            tail = f"ax {just.axiom_id}"
            if just.subst is not None and not just.subst.is_empty():
                tail += " " + format_bindings(just.subst)
        elif isinstance(just, ModusPonens):
            tail = f"mp {just.premise} {just.implication}"
        elif isinstance(just, SubstRule):
            tail = f"subst {just.source} {format_bindings(just.subst)}"
        else:
            tail = f"ind {just.base} {just.step}"
        out.append(f"{n}: {format_formula(line.formula)} ; {tail}")
    return "\n".join(out) + "\n"
