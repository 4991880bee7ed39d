"""The substitution method for choice terms.

A total substitution maps canonical witness terms to numeral and flag
pairs; reducing a proof under one yields an explicit figure.  The solver
iterates total substitutions by the three repair cases (adopt a found
witness, lower a witness by one, discard the work that a changed
subordinate term invalidated) until every critical formula reduces
correct, the round budget runs out, or no case applies.  The two-round
trial idea for a single witness term is kept separate as its own entry
point since it predates the general iteration and the tests lean on it
as an oracle.
"""

import json
import os
from dataclasses import dataclass, field

from .calculus import Proof, collect_critical, eliminate_quantifiers
from .errors import SolverError
from .grammar import format_formula, format_term
from .recursion import PRRegistry, evaluate
from .syntax import (
    And, EpsTerm, Eq, Formula, FunApp, FunctionalArg, Imp, Neq, Not, Num, Or,
    PiTerm, Substitution, Succ, Term, Var, apply_subst, children,
    match_instance, numeral_value, succ,
)
from .transform import ProofTree, Verdict, _zero_defaults, is_correct_tt

__all__ = [
    "SolverState", "SolverTranscript", "TotalSubstitution", "canonical_key",
    "canonize", "default_round_budget", "eterm_degree", "eterm_rank",
    "formula_level", "hilbert_ansatz", "initial_state", "is_canonical",
    "reduce_under", "solve", "step", "verify_solving",
]

DEFAULT_PAIR = (0, 1)


# --------------------------------------------------- canonical terms


def _has_choice(x) -> bool:
    if isinstance(x, (EpsTerm, PiTerm)):
        return True
    return any(_has_choice(c) for c in children(x))


def canonical_key(t: Term) -> EpsTerm:
    """The lookup key for a choice term: the eps and pi flavours over the
    same body share one entry, keyed on the eps form."""
    if isinstance(t, PiTerm):
        return EpsTerm(t.var, t.body)
    if isinstance(t, EpsTerm):
        return t
    raise SolverError(f"not a choice term: {format_term(t)}")


def is_canonical(t: Term) -> bool:
    """A closed choice term is canonical when every variable-free subterm
    below it is a numeral: nothing constant is left to compute and no
    nested closed choice term is left to replace."""
    if not isinstance(t, (EpsTerm, PiTerm)) or t._fv or t._fmlv:
        return False
    for sub in _walk(t.body):
        if isinstance(sub, Term) and not sub._fv and not isinstance(sub, Num):
            return False
    return True


def _walk(x):
    yield x
    for c in children(x):
        yield from _walk(c)


@dataclass(frozen=True)
class TotalSubstitution:
    """Assignment of (numeral, flag) pairs to canonical choice terms.

    Unmapped terms read as (0, 1): value zero by default, flagged as a
    trial rather than a found witness.  The flag doubles as the value of
    the pi companion term.
    """

    assignments: dict = field(default_factory=dict)

    def pair(self, key: EpsTerm) -> tuple[int, int]:
        return self.assignments.get(key, DEFAULT_PAIR)

    def with_pair(self, key: EpsTerm, pair: tuple[int, int]) -> "TotalSubstitution":
        new = dict(self.assignments)
        if pair == DEFAULT_PAIR:
            new.pop(key, None)
        else:
            new[key] = pair
        return TotalSubstitution(new)

    def value_of(self, t: Term) -> Num:
        z, flag = self.pair(canonical_key(t))
        return Num(flag) if isinstance(t, PiTerm) else Num(z)

    def keys(self):
        return self.assignments.keys()

    def describe(self) -> str:
        rows = sorted((format_term(k), v) for k, v in self.assignments.items())
        inner = ", ".join(f"{k} -> ({z}, {i})" for k, (z, i) in rows)
        return "{" + inner + "}"


# --------------------------------------------------- reduction


def _reduce(x, sub: TotalSubstitution, reg: PRRegistry):
    if isinstance(x, (Num, Var)):
        return x
    if isinstance(x, Succ):
        return succ(_reduce(x.arg, sub, reg))
    if isinstance(x, FunApp):
        args = tuple(_reduce(a, sub, reg) for a in x.args)
        t = FunApp(x.fn, args)
        if not t._fv and not _has_choice(t):
            return evaluate(t, reg)
        return t
    if isinstance(x, FunctionalArg):
        return FunctionalArg(x.params, _reduce(x.body, sub, reg))
    if isinstance(x, (EpsTerm, PiTerm)):
        body = _reduce(x.body, sub, reg)
        t = type(x)(x.var, body)
        if not t._fv:
            return sub.value_of(t)
        return t
    if isinstance(x, (Eq, Neq)):
        return type(x)(_reduce(x.left, sub, reg), _reduce(x.right, sub, reg))
    if isinstance(x, Not):
        return Not(_reduce(x.body, sub, reg))
    if isinstance(x, (Imp, And, Or)):
        return type(x)(_reduce(x.left, sub, reg), _reduce(x.right, sub, reg))
    raise SolverError(
        "cannot reduce under a substitution: " + (
            format_formula(x) if isinstance(x, Formula) else format_term(x)))


def reduce_under(e, sub: TotalSubstitution, reg: PRRegistry | None = None):
    """Reduce a closed term or formula to explicit form under ``sub``.

    Constant choice-free terms are computed to numerals, innermost closed
    choice terms are replaced by their assigned values, and the two moves
    alternate bottom-up until only numerals remain.
    """
    reg = reg if reg is not None else PRRegistry()
    if e._fv:
        raise SolverError(
            f"reduce_under needs a closed expression, got free {sorted(e._fv)}")
    out = _reduce(e, sub, reg)
    if _has_choice(out) or out._fv:
        raise SolverError(
            "reduction under the substitution did not come out explicit: "
            + (format_formula(out) if isinstance(out, Formula)
               else format_term(out)))
    return out


def canonize(t: Term, sub: TotalSubstitution, reg: PRRegistry | None = None):
    """Reduce the inside of a closed choice term, keeping its own binder.

    The result is the canonical term that ``t`` stands for under ``sub``:
    nested closed choice terms become their values, constant terms become
    numerals, open subordinate expressions stay put.
    """
    reg = reg if reg is not None else PRRegistry()
    if not isinstance(t, (EpsTerm, PiTerm)):
        raise SolverError(f"not a choice term: {format_term(t)}")
    return type(t)(t.var, _reduce(t.body, sub, reg))


# --------------------------------------------------- degree, rank, level


def eterm_degree(t: Term) -> int:
    """Nesting depth of closed choice terms: 1 with none nested inside.

    Open subordinate expressions do not bound the degree themselves, but
    closed choice terms inside them do.
    """
    best = 0
    stack = list(children(t))
    while stack:
        node = stack.pop()
        if isinstance(node, (EpsTerm, PiTerm)) and not node._fv:
            best = max(best, eterm_degree(node))
            continue
        stack.extend(children(node))
    return 1 + best


def eterm_rank(t: Term) -> int:
    """Scope depth of subordinate choice expressions: those that mention
    the binder's variable free.  1 with none."""
    if not isinstance(t, (EpsTerm, PiTerm)):
        raise SolverError(f"not a choice expression: {format_term(t)}")
    peak = 0
    for sub in _walk(t.body):
        if isinstance(sub, (EpsTerm, PiTerm)) and t.var in sub._fv:
            peak = max(peak, eterm_rank(sub))
    return 1 + peak


def formula_level(t: Term, p: Proof | None = None,
                  sub: TotalSubstitution | None = None,
                  reg: PRRegistry | None = None) -> int:
    """The stage at which a term's canonical formula enters the staged
    reduction: 1 for innermost terms, one more than the deepest nested
    closed choice term otherwise.  Structurally this is the degree of
    the occurrence.

    With a proof given, the level of a canonical term is the earliest
    stage over all occurrences in the proof that canonize to it; the
    staging itself is structural, so the substitution only picks which
    occurrences count as the same canonical formula.
    """
    if p is None:
        return eterm_degree(t)
    sub = sub if sub is not None else TotalSubstitution()
    key = canonical_key(t) if not t._fv else None
    best = None
    for line in p.lines:
        for occ in _walk(line.formula):
            if isinstance(occ, (EpsTerm, PiTerm)) and not occ._fv:
                if canonical_key(canonize(occ, sub, reg)) == key:
                    s = eterm_degree(occ)
                    best = s if best is None else min(best, s)
    if best is None:
        raise SolverError(
            "no occurrence in the proof canonizes to " + format_term(t))
    return best


# --------------------------------------------------- transcripts


@dataclass
class SolverTranscript:
    """Round-by-round record of a solver run.

    ``entries`` holds one dict per round in the JSON shape the CLI emits;
    ``outcome`` is "solving", "step-limit", or "stuck"; ``final`` is the
    last total substitution built.
    """

    entries: list
    outcome: str
    final: TotalSubstitution
    note: str = ""

    @property
    def rounds(self) -> int:
        return len(self.entries)

    @property
    def solving(self) -> bool:
        return self.outcome == "solving"

    def json_lines(self) -> str:
        return "\n".join(json.dumps(e, sort_keys=True) for e in self.entries)


def _changed_rows(old: TotalSubstitution, new: TotalSubstitution) -> list:
    rows = []
    for key in sorted(set(old.keys()) | set(new.keys()),
                      key=lambda k: format_term(k)):
        a, b = old.pair(key), new.pair(key)
        if a != b:
            rows.append({"term": format_term(key),
                         "old": list(a), "new": list(b)})
    return rows


def _round_entry(number: int, case, crit, changed, solving: bool) -> dict:
    label = None
    if crit is not None:
        label = f"{crit.line}: " + format_formula(crit.instance)
    return {"round": number, "case": case, "critical_formula": label,
            "changed": changed, "solving": solving}


# --------------------------------------------------- the Ansatz


def hilbert_ansatz(p: Proof, reg: PRRegistry | None = None) -> SolverTranscript:
    """The two-round trial for a proof governed by a single choice term.

    Round one substitutes the default zero everywhere.  If some witness
    axiom instance comes out incorrect, its antecedent names an actual
    witness; round two substitutes that.  When least-number instances
    are present the witness is then swept down to the least value that
    still satisfies the defining formula.
    """
    reg = reg if reg is not None else (
        p.profile.registry if p.profile.registry is not None else PRRegistry())
    crits = collect_critical(p)
    bad_kinds = {c.kind for c in crits} - {"EpsAxiom", "LeastNumber"}
    if bad_kinds:
        raise SolverError(
            "the two-round trial only handles witness and least-number "
            f"instances, found {sorted(bad_kinds)}")
    s1 = TotalSubstitution()
    keys = {canonical_key(canonize(c.eterm, s1, reg)) for c in crits}
    if len(keys) > 1:
        raise SolverError(
            "the two-round trial needs a single governing term, found "
            + ", ".join(sorted(format_term(k) for k in keys)))

    def incorrect(sub):
        return [c for c in crits
                if not is_correct_tt(reduce_under(c.instance, sub, reg))]

    first = incorrect(s1)
    if not first:
        entry = _round_entry(1, None, None, [], True)
        return SolverTranscript([entry], "solving", s1)

    key = keys.pop()
    trigger = next((c for c in first if c.kind == "EpsAxiom"), None)
    if trigger is None:
        raise SolverError("no witness axiom among the incorrect instances,"
                          " so the first trial names no value to adopt")
    z = numeral_value(reduce_under(trigger.witness, s1, reg))
    if any(c.kind == "LeastNumber" for c in crits):
        plug = lambda n: apply_subst(key.body,
                                     Substitution(ind={key.var: Num(n)}))
        z = next(n for n in range(z + 1)
                 if is_correct_tt(reduce_under(plug(n), s1, reg)))
    s2 = s1.with_pair(key, (z, 0))
    entries = [_round_entry(1, 1, trigger, _changed_rows(s1, s2), False)]
    if incorrect(s2):
        entries.append(_round_entry(2, None, None, [], False))
        return SolverTranscript(entries, "stuck", s2,
                                note="second trial still leaves an incorrect"
                                     " critical formula")
    entries.append(_round_entry(2, None, None, [], True))
    return SolverTranscript(entries, "solving", s2)


# --------------------------------------------------- the iteration


@dataclass
class SolverState:
    """History of total substitutions plus the discard bookkeeping.

    ``marks[key]`` is the set of round numbers whose value for ``key``
    still counts; a value is inherited from the greatest marked round.
    """

    history: list
    marks: dict

    @property
    def round(self) -> int:
        return len(self.history)

    @property
    def current(self) -> TotalSubstitution:
        return self.history[-1]

    def known_keys(self):
        keys = set(self.marks)
        for s in self.history:
            keys.update(s.keys())
        return keys

    def value_at(self, key, rnd: int):
        return self.history[rnd - 1].pair(key)

    def inherited(self, key, marks, upto: int):
        live = [m for m in marks.get(key, ()) if m <= upto]
        return self.value_at(key, max(live)) if live else DEFAULT_PAIR


def initial_state() -> SolverState:
    return SolverState(history=[TotalSubstitution()], marks={})


def _subordinate_slots(key: EpsTerm) -> list:
    """Subordinate choice expressions of a canonical term, innermost
    first and left to right within a depth, paired with their binder
    depth for the transcript."""
    found = []

    def go(x, depth, path):
        for i, c in enumerate(children(x)):
            here = path + (i,)
            if isinstance(c, (EpsTerm, PiTerm)):
                if key.var in c._fv:
                    found.append((depth + 1, here, c))
                go(c, depth + 1, here)
            else:
                go(c, depth, here)

    go(key.body, 0, ())
    return [e for _, _, e in sorted(found, key=lambda f: (-f[0], f[1]))]


def _cone(known, centers) -> set:
    """Keys that are one of ``centers`` or numeral instances of
    expressions subordinate to one of them."""
    hit = set()
    for center in centers:
        hit.add(center)
        templates = [EpsTerm(e.var, e.body) if isinstance(e, PiTerm) else e
                     for e in _subordinate_slots(center)]
        for k in known:
            for e in templates:
                m = match_instance(e, k)
                if m is not None and all(isinstance(v, Num)
                                         for v in m.ind.values()):
                    hit.add(k)
                    break
    return hit


def step(state: SolverState, p: Proof, reg: PRRegistry | None = None,
         mode: str = "decrement"):
    """One round: return ``(next_state, entry)``.

    The entry is the transcript record; when it says solving the state
    comes back unchanged.  Raising is reserved for malformed input; a
    dead end is reported as a stuck entry instead.
    """
    if mode not in ("decrement", "least"):
        raise SolverError(f"unknown mode {mode!r}")
    reg = reg if reg is not None else (
        p.profile.registry if p.profile.registry is not None else PRRegistry())
    crits = collect_critical(p)
    sub = state.current
    i = state.round

    rows = []
    for c in crits:
        reduced = reduce_under(eliminate_quantifiers(c.instance), sub, reg)
        if is_correct_tt(reduced):
            continue
        key = canonical_key(canonize(c.eterm, sub, reg))
        z, flag = sub.pair(key)
        rows.append((eterm_degree(c.eterm), c.line, c, key, z, flag))
    if not rows:
        return state, _round_entry(i, None, None, [], True)
    rows.sort(key=lambda r: (r[0], r[1]))

    def fresh_marks(extra_key=None):
        keys = state.known_keys()
        if extra_key is not None:
            keys.add(extra_key)
        return {k: frozenset(state.marks.get(k, ())) | {i + 1} for k in keys}

    def build(marks, override=None):
        out = TotalSubstitution()
        for k in marks:
            out = out.with_pair(k, state.inherited(k, marks, i))
        if override is not None:
            out = out.with_pair(*override)
        return out

    # case 1: a trial value shown wrong by a witness or flag-zero instance
    for _, _, c, key, z, flag in rows:
        if flag != 1 or c.kind not in ("EpsAxiom", "PiAxiom0"):
            continue
        if c.kind == "PiAxiom0":
            pair = (0, 0)
        else:
            pair = (numeral_value(reduce_under(c.witness, sub, reg)), 0)
        marks = fresh_marks(key)
        nxt = build(marks, override=(key, pair))
        st = SolverState(state.history + [nxt], marks)
        return st, _round_entry(i, 1, c, _changed_rows(sub, nxt), False)

    # case 2: a found witness is not least yet
    for _, _, c, key, z, flag in rows:
        if flag != 0 or c.kind != "LeastNumber":
            continue
        if mode == "least":
            plug = lambda n: apply_subst(key.body,
                                         Substitution(ind={key.var: Num(n)}))
            new_z = next(n for n in range(z + 1)
                         if is_correct_tt(reduce_under(plug(n), sub, reg)))
        else:
            new_z = z - 1
        marks = fresh_marks(key)
        nxt = build(marks, override=(key, (new_z, 0)))
        st = SolverState(state.history + [nxt], marks)
        return st, _round_entry(i, 2, c, _changed_rows(sub, nxt), False)

    # case 3: a kept witness went bad, so a subordinate term moved under it
    for _, _, c, key, z, flag in rows:
        if flag != 0 or c.kind not in ("EpsAxiom", "PiAxiom1"):
            continue
        anchors = [m for m in sorted(state.marks.get(key, ()))
                   if m <= i and state.value_at(key, m) == (z, flag)]
        if not anchors:
            return state, _stuck_entry(i, c, "no remembered round carries the"
                                             " current value")
        j = anchors[0]
        older = state.history[j - 2] if j >= 2 else TotalSubstitution()
        plug = Substitution(ind={key.var: Num(z)})
        moved = None
        for expr in _subordinate_slots(key):
            if expr._fv != frozenset((key.var,)):
                continue
            inst = apply_subst(expr, plug)
            now = sub.pair(canonical_key(canonize(inst, sub, reg)))
            was = older.pair(canonical_key(canonize(inst, older, reg)))
            if now != was:
                moved = inst
                break
        if moved is None:
            return state, _stuck_entry(i, c, "no subordinate term changed"
                                             " between the remembered rounds")
        centers = {canonical_key(canonize(moved, sub, reg)),
                   canonical_key(canonize(moved, older, reg))}
        keep = _cone(state.known_keys() | centers, centers)
        window = frozenset(range(j, i + 2))
        marks = {}
        for k in state.known_keys() | centers:
            old = frozenset(m for m in state.marks.get(k, ()) if m < j)
            marks[k] = old | window if k in keep else old
        nxt = build(marks)
        st = SolverState(state.history + [nxt], marks)
        entry = _round_entry(i, 3, c, _changed_rows(sub, nxt), False)
        entry["discarded_from_round"] = j
        entry["moved_term"] = format_term(moved)
        return st, entry

    c = rows[0][2]
    return state, _stuck_entry(i, c, "no repair case applies")


def _stuck_entry(number: int, crit, why: str) -> dict:
    entry = _round_entry(number, None, crit, [], False)
    entry["stuck"] = why
    return entry


def _largest_numeral(p: Proof) -> int:
    best = 0
    for line in p.lines:
        for node in _walk(line.formula):
            if isinstance(node, Num):
                best = max(best, node.value)
    return best


def default_round_budget(p: Proof, reg: PRRegistry | None = None) -> int:
    """Ten rounds per canonical term per numeral magnitude: generous at
    desk scale, and overridable through EE_MAX_ROUNDS."""
    reg = reg if reg is not None else (
        p.profile.registry if p.profile.registry is not None else PRRegistry())
    s1 = TotalSubstitution()
    keys = {canonical_key(canonize(c.eterm, s1, reg))
            for c in collect_critical(p)}
    return 10 * max(1, len(keys)) * (_largest_numeral(p) + 2)


def solve(p: Proof, reg: PRRegistry | None = None,
          max_rounds: int | None = None, mode: str = "decrement") -> SolverTranscript:
    """Iterate rounds from the all-defaults substitution to a verdict.

    Returns a transcript whose outcome is "solving" with the final
    substitution, "step-limit" when the budget runs out first, or
    "stuck" when no repair case applies to an incorrect critical formula.
    """
    reg = reg if reg is not None else (
        p.profile.registry if p.profile.registry is not None else PRRegistry())
    if max_rounds is None:
        env = os.environ.get("EE_MAX_ROUNDS")
        max_rounds = int(env) if env else default_round_budget(p, reg)
    state = initial_state()
    entries = []
    while True:
        state, entry = step(state, p, reg, mode)
        entries.append(entry)
        if entry["solving"]:
            return SolverTranscript(entries, "solving", state.current)
        if "stuck" in entry:
            return SolverTranscript(entries, "stuck", state.current,
                                    note=entry["stuck"])
        if state.round > max_rounds:
            return SolverTranscript(entries, "step-limit", state.current,
                                    note=f"budget of {max_rounds} rounds spent")


def verify_solving(p: Proof, sub: TotalSubstitution,
                   reg: PRRegistry | None = None) -> Verdict:
    """Judge every proof line reduced under ``sub``, trusting nothing of
    the solver's own bookkeeping.

    Open lines are closed by the transformation's convention first:
    individual variables to zero, formula variables to 0 = 0.  Quantified
    lines go through quantifier elimination before reducing.
    """
    reg = reg if reg is not None else (
        p.profile.registry if p.profile.registry is not None else PRRegistry())
    entries = []
    for n, line in enumerate(p.lines, 1):
        f = eliminate_quantifiers(line.formula)
        f = apply_subst(f, _zero_defaults(f))
        g = reduce_under(f, sub, reg)
        entries.append((ProofTree(g, (), n), is_correct_tt(g)))
    return Verdict(tuple(entries))
