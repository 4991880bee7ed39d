"""Recursive definitions with functional arguments, and their evaluation.

A definition gives two equations for a fresh symbol: a base equation for
first argument 0 and a step equation for first argument a+1.  Recursion is
always on the first argument.  The remaining argument slots are numeric
parameters or functional parameters (``fn c. f(c)`` on the left-hand side).
The right-hand sides may mention only previously defined symbols, the
predecessor ``d``, the slot parameters, and (in the step) the symbol being
defined applied at the recursion variable.

Termination of innermost reduction is tracked by an ordinal measure:
every symbol occurrence gets a rank through the subordination relation, a
subterm gets an order vector over the registry symbols (below w^w), and a
term gets an index below w^w^w counting distinct subterms per order.  One
``reduce_innermost`` step eliminates the head symbol of the leftmost
innermost constant subterm completely and strictly decreases the index;
``unfold_once`` is the single-equation rewrite underneath it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import DefinitionError, EngineError, ParseError, StuckTermError
from .grammar import parse_term
from .ordinals import DescentGauge, Ordinal, gauge_record, omega_vector, ordinal_sum
from .syntax import (
    DELTA, EpsTerm, Eq, Formula, FunApp, FunctionalArg, Num, PiTerm, Substitution,
    Succ, Term, Var, apply_subst, children, replace_subterm, succ,
)

__all__ = [
    "ParamSlot", "PRDefinition", "PRRegistry", "register", "parse_definitions",
    "load_definitions", "builtin_ackermann", "occurrences", "subordinate_symbols",
    "rank", "order", "index", "reduce_innermost", "unfold_once", "evaluate",
]


@dataclass(frozen=True)
class ParamSlot:
    kind: str            # "num" or "fn"
    name: str
    arity: int = 0       # for "fn" slots


@dataclass(frozen=True)
class PRDefinition:
    name: str
    slots: tuple[ParamSlot, ...]
    rec_var: str
    base_rhs: Term
    step_rhs: Term
    base_eq: Formula
    step_eq: Formula
    call_shape: FunApp | None
    varying: tuple[int, ...]     # argument positions where the call departs from the slot


class PRRegistry:
    """Ordered collection of definitions; the order is the symbol order the
    termination measure is built on."""

    def __init__(self):
        self.defs: dict[str, PRDefinition] = {}
        self._value_cache: dict[Term, Term] = {}
        self._order_cache: dict[Term, Ordinal] = {}

    def __contains__(self, name: str) -> bool:
        return name in self.defs

    def __len__(self):
        return len(self.defs)

    def get(self, name: str) -> PRDefinition | None:
        return self.defs.get(name)

    def names(self) -> list[str]:
        return list(self.defs)

    def position(self, name: str) -> int:
        for i, n in enumerate(self.defs):
            if n == name:
                return i
        raise KeyError(name)

    def register(self, defn: PRDefinition) -> None:
        register(self, defn)

    def defining_axioms(self) -> dict[str, Formula]:
        out = {}
        for name, d in self.defs.items():
            out[f"{name}.base"] = d.base_eq
            out[f"{name}.step"] = d.step_eq
        return out


def _slot_ref(slot: ParamSlot) -> Term:
    if slot.kind == "num":
        return Var(slot.name)
    vars = tuple(f"c{i}" for i in range(slot.arity))
    return FunctionalArg(vars, FunApp(slot.name, tuple(Var(v) for v in vars)))


def _parse_lhs(name: str, lhs: Term) -> tuple[Term, tuple[ParamSlot, ...]]:
    if not isinstance(lhs, FunApp) or lhs.fn != name:
        raise DefinitionError(f"{name}: left-hand side must apply {name}")
    if not lhs.args:
        raise DefinitionError(f"{name}: needs at least the recursion argument")
    slots = []
    for a in lhs.args[1:]:
        if isinstance(a, Var):
            slots.append(ParamSlot("num", a.name))
        elif isinstance(a, FunctionalArg):
            body = a.body
            if not (isinstance(body, FunApp)
                    and body.args == tuple(Var(v) for v in a.vars)):
                raise DefinitionError(
                    f"{name}: functional parameter must be written fn c. f(c)")
            slots.append(ParamSlot("fn", body.fn, len(a.vars)))
        else:
            raise DefinitionError(
                f"{name}: parameter slots must be variables or fn binders")
    names = [s.name for s in slots]
    if len(set(names)) != len(names):
        raise DefinitionError(f"{name}: parameter names must be distinct")
    return lhs.args[0], slots


def _walk_terms(t: Term):
    yield t
    for c in children(t):
        if isinstance(c, Term):
            yield from _walk_terms(c)


def _check_rhs(reg: PRRegistry, name: str, slots: tuple[ParamSlot, ...],
               rhs: Term, allowed_vars: frozenset, is_step: bool,
               rec_var: str | None) -> tuple[FunApp | None, tuple[int, ...]]:
    fn_slots = {s.name: s.arity for s in slots if s.kind == "fn"}
    stray = rhs._fv - allowed_vars
    if stray:
        raise DefinitionError(f"{name}: unknown variables {sorted(stray)} in equation")
    call_shape: FunApp | None = None
    for sub in _walk_terms(rhs):
        if isinstance(sub, (EpsTerm, PiTerm)):
            raise DefinitionError(f"{name}: choice terms are not allowed in equations")
        if not isinstance(sub, FunApp):
            continue
        head = sub.fn
        if head == DELTA:
            if len(sub.args) != 1 or isinstance(sub.args[0], FunctionalArg):
                raise DefinitionError(f"{name}: d takes one term argument")
            continue
        if head in fn_slots:
            if len(sub.args) != fn_slots[head] or any(
                    isinstance(a, FunctionalArg) for a in sub.args):
                raise DefinitionError(
                    f"{name}: functional parameter {head} applied wrongly")
            continue
        if head == name:
            if not is_step:
                raise DefinitionError(f"{name}: base equation may not call {name}")
            if not (sub.args and sub.args[0] == Var(rec_var)):
                raise DefinitionError(
                    f"{name}: recursion must be on the first argument {rec_var}")
            if call_shape is None:
                call_shape = sub
            elif call_shape != sub:
                raise DefinitionError(
                    f"{name}: all recursive calls must share one shape")
            continue
        prev = reg.get(head)
        if prev is None:
            raise DefinitionError(f"{name}: unknown symbol {head}")
        want = [("num", 0)] + [(s.kind, s.arity) for s in prev.slots]
        if len(sub.args) != len(want):
            raise DefinitionError(f"{name}: {head} expects {len(want)} arguments")
        for a, (kind, arity) in zip(sub.args, want):
            if kind == "num" and isinstance(a, FunctionalArg):
                raise DefinitionError(f"{name}: {head} got a functional argument "
                                      "in a numeric slot")
            if kind == "fn" and not (isinstance(a, FunctionalArg)
                                     and len(a.vars) == arity):
                raise DefinitionError(f"{name}: {head} needs a functional argument "
                                      f"of arity {arity}")
    varying: tuple[int, ...] = ()
    if call_shape is not None:
        if any(h == name for a in call_shape.args for h in a._heads):
            raise DefinitionError(f"{name}: recursive call arguments may not "
                                  f"mention {name}")
        spots = []
        for pos, (a, slot) in enumerate(zip(call_shape.args[1:], slots), start=1):
            if a == _slot_ref(slot):
                continue
            if slot.kind == "fn":
                raise DefinitionError(
                    f"{name}: functional slots must be passed through unchanged")
            if not (isinstance(a, Var) and a.name.startswith("$")):
                raise DefinitionError(
                    f"{name}: recursive call may vary only in bound-variable slots")
            spots.append(pos)
        varying = tuple(spots)
    return call_shape, varying


def make_definition(reg: PRRegistry, name: str,
                    base: tuple[Term, Term], step: tuple[Term, Term]) -> PRDefinition:
    """Validate a pair of equations against the registry and build the record."""
    base_first, slots = _parse_lhs(name, base[0])
    if base_first != Num(0):
        raise DefinitionError(f"{name}: base equation must start at 0")
    step_first, step_slots = _parse_lhs(name, step[0])
    if not (isinstance(step_first, Succ) and isinstance(step_first.arg, Var)):
        raise DefinitionError(f"{name}: step equation must have first argument a+1")
    rec_var = step_first.arg.name
    if slots != step_slots:
        raise DefinitionError(f"{name}: base and step parameter slots disagree")
    if any(s.name == rec_var for s in slots):
        raise DefinitionError(f"{name}: recursion variable shadows a parameter")
    num_names = frozenset(s.name for s in slots if s.kind == "num")
    _check_rhs(reg, name, slots, base[1], num_names, False, None)
    call_shape, varying = _check_rhs(
        reg, name, slots, step[1], num_names | {rec_var}, True, rec_var)
    if varying:
        hot = frozenset(slots[pos - 1].name for pos in varying)
        for sub in _walk_terms(step[1]):
            if isinstance(sub, FunctionalArg) and sub._fv & hot:
                raise DefinitionError(
                    f"{name}: a parameter the recursion varies in may not "
                    "appear inside a functional argument")
    return PRDefinition(
        name=name, slots=slots, rec_var=rec_var,
        base_rhs=base[1], step_rhs=step[1],
        base_eq=Eq(base[0], base[1]), step_eq=Eq(step[0], step[1]),
        call_shape=call_shape, varying=varying)


def register(reg: PRRegistry, defn: PRDefinition) -> None:
    """Add a validated definition; the name must be fresh."""
    if defn.name in reg.defs or defn.name == DELTA:
        raise DefinitionError(f"symbol {defn.name} is already defined")
    reg.defs[defn.name] = defn


# ---------------------------------------------------------- definition files


def parse_definitions(text: str) -> list[tuple[str, list[tuple[Term, Term]]]]:
    """Parse ``def name { lhs = rhs ... }`` blocks into raw equation pairs."""
    blocks = []
    name = None
    eqs: list[tuple[Term, Term]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("def "):
            if name is not None:
                raise ParseError(f"line {lineno}: previous def block not closed")
            rest = line[4:].strip()
            if not rest.endswith("{"):
                raise ParseError(f"line {lineno}: expected 'def name {{'")
            name = rest[:-1].strip()
            if not name.isidentifier() or not name[0].islower():
                raise ParseError(f"line {lineno}: bad definition name {name!r}")
            eqs = []
        elif line == "}":
            if name is None:
                raise ParseError(f"line {lineno}: unmatched '}}'")
            blocks.append((name, eqs))
            name, eqs = None, []
        else:
            if name is None:
                raise ParseError(f"line {lineno}: equation outside a def block")
            if "=" not in line:
                raise ParseError(f"line {lineno}: expected an equation")
            lhs_text, rhs_text = line.split("=", 1)
            eqs.append((parse_term(lhs_text.strip()), parse_term(rhs_text.strip())))
    if name is not None:
        raise ParseError("unterminated def block")
    return blocks


def load_definitions(text: str, reg: PRRegistry | None = None) -> PRRegistry:
    """Parse definition blocks and register them in order."""
    reg = reg if reg is not None else PRRegistry()
    for name, eqs in parse_definitions(text):
        if len(eqs) != 2:
            raise DefinitionError(f"{name}: exactly two equations expected")
        first = eqs[0][0]
        base, step = eqs
        if not (isinstance(first, FunApp) and first.args
                and first.args[0] == Num(0)):
            base, step = step, base
        register(reg, make_definition(reg, name, base, step))
    return reg


_BUILTIN_TEXT = """
def plus {
  plus(0, b) = b
  plus(a+1, b) = plus(a, b)+1
}
def times {
  times(0, b) = 0
  times(a+1, b) = plus(times(a, b), b)
}
def notzero {
  notzero(0) = 0
  notzero(a+1) = 0+1
}
def monus {
  # monus(a, b) computes b with a predecessors taken: b - a, cut off at 0
  monus(0, b) = b
  monus(a+1, b) = d(monus(a, b))
}
def differ {
  # 1 when the arguments differ, else 0
  differ(0, b) = notzero(b)
  differ(a+1, b) = notzero(plus(monus(a+1, b), monus(b, a+1)))
}
def same {
  # 1 when the arguments are equal, else 0
  same(0, b) = monus(b, 0+1)
  same(a+1, b) = monus(differ(a+1, b), 0+1)
}
def iterate {
  iterate(0, fn c. f(c), b) = b
  iterate(a+1, fn c. f(c), b) = f(iterate(a, fn c. f(c), b))
}
def seed {
  # 0, 1, b for first argument 0, 1, at least 2
  seed(0, b) = 0
  seed(a+1, b) = plus(times(differ(a+1, 0+1), times(differ(a+1, 0), b)), same(a+1, 0+1))
}
def ack {
  ack(0, b, c) = plus(b, c)
  ack(a+1, b, c) = iterate(c, fn e. ack(a, b, e), seed(a, b))
}
"""

_builtin: PRRegistry | None = None


def builtin_ackermann() -> PRRegistry:
    """The stock registry: +, *, equality indicators, iteration, and the
    three-argument branching function.  Shared instance; treat as read-only."""
    global _builtin
    if _builtin is None:
        _builtin = load_definitions(_BUILTIN_TEXT)
    return _builtin


# --------------------------------------------------------------- occurrences


def _child_nodes(x):
    return children(x)


def _positions(reg: PRRegistry) -> dict[str, int]:
    """Measured symbol order: the predecessor first, then the registry."""
    pos = {DELTA: 0}
    for i, name in enumerate(reg.defs):
        pos[name] = i + 1
    return pos


def occurrences(t: Term, reg: PRRegistry) -> list[tuple[tuple[int, ...], str]]:
    """Paths of measured-symbol applications inside ``t``, preorder."""
    out = []

    def walk(node, path):
        if isinstance(node, FunApp) and (node.fn in reg or node.fn == DELTA):
            out.append((path, node.fn))
        for i, c in enumerate(_child_nodes(node)):
            walk(c, path + (i,))

    walk(t, ())
    return out


def _node_at(t: Term, path: tuple[int, ...]):
    node = t
    for i in path:
        node = _child_nodes(node)[i]
    return node


def _binder_ancestors(t: Term, path: tuple[int, ...]):
    """(path, node) for every binder node on the way to ``path``, inclusive."""
    out = []
    node = t
    for depth, i in enumerate(path):
        if isinstance(node, (FunctionalArg, EpsTerm, PiTerm)):
            out.append((path[:depth], node))
        node = _child_nodes(node)[i]
    if isinstance(node, (FunctionalArg, EpsTerm, PiTerm)):
        out.append((path, node))
    return out


def subordinate_symbols(t: Term, occurrence: tuple[int, ...],
                        reg: PRRegistry) -> list[tuple[tuple[int, ...], str]]:
    """Registry occurrences inside the subterm at ``occurrence`` that are
    subordinate to it: their subterm mentions a variable whose binder scope
    covers the occurrence (or is one of its own functional arguments)."""
    root = _node_at(t, occurrence)
    if not isinstance(root, FunApp):
        raise EngineError("occurrence does not point at an application")
    out = []
    for rel, sym in occurrences(root, reg):
        if not rel:
            continue
        sub = _node_at(root, rel)
        if not sub._fv:
            continue
        if _is_subordinate(t, occurrence, occurrence + rel, sub):
            out.append((occurrence + rel, sym))
    return out


def _is_subordinate(t: Term, outer: tuple[int, ...],
                    inner: tuple[int, ...], sub: Term) -> bool:
    binders = {}
    for bpath, bnode in _binder_ancestors(t, inner[:-1] if inner else ()):
        names = bnode.vars if isinstance(bnode, FunctionalArg) else (bnode.var,)
        for n in names:
            binders[n] = bpath
    for v in sub._fv:
        bpath = binders.get(v)
        if bpath is None:
            continue
        if len(bpath) <= len(outer) and bpath == outer[:len(bpath)]:
            return True
        if len(bpath) == len(outer) + 1 and bpath[:len(outer)] == outer:
            return True
    return False


def _occurrence_ranks(t: Term, reg: PRRegistry) -> dict[tuple[int, ...], tuple[str, int]]:
    """Rank of every measured-symbol occurrence in ``t`` (on ``t`` itself)."""
    occs = occurrences(t, reg)
    pos = _positions(reg)
    ranks: dict[tuple[int, ...], tuple[str, int]] = {}

    def rank_of(path: tuple[int, ...], sym: str) -> int:
        got = ranks.get(path)
        if got is not None:
            return got[1]
        # Subordinate occurrences of the same symbol count, not only
        # strictly later ones.  Unfolding iterate at level two and up
        # produces an iterate whose functional argument holds another
        # iterate on the bound variable; the outer occurrence must sit
        # one rank above it or the index would grow on elimination.
        best = 0
        for spath, ssym in subordinate_symbols(t, path, reg):
            if pos[ssym] >= pos[sym]:
                r = rank_of(spath, ssym)
                if r > best:
                    best = r
        ranks[path] = (sym, 1 + best)
        return 1 + best

    for path, sym in occs:
        rank_of(path, sym)
    return ranks


def rank(t: Term, symbol: str, reg: PRRegistry) -> int:
    """Max rank of occurrences of ``symbol`` or of later measured symbols
    inside ``t``; 0 when there are none."""
    pos = _positions(reg)
    if symbol not in pos:
        raise EngineError(f"unknown registry symbol {symbol}")
    cut = pos[symbol]
    best = 0
    for _, (sym, r) in _occurrence_ranks(t, reg).items():
        if pos[sym] >= cut and r > best:
            best = r
    return best


def order(s: Term, reg: PRRegistry) -> Ordinal:
    """Order vector of a subterm: sum of w^(i) * rank(s, symbol i)."""
    cached = reg._order_cache.get(s)
    if cached is not None:
        return cached
    pos = _positions(reg)
    coeffs = [0] * len(pos)
    for _, (sym, r) in _occurrence_ranks(s, reg).items():
        i = pos[sym]
        for j in range(i + 1):
            if r > coeffs[j]:
                coeffs[j] = r
    out = omega_vector(coeffs)
    reg._order_cache[s] = out
    return out


def index(t: Term, reg: PRRegistry) -> Ordinal:
    """Index of a term: sum over orders o of w^(o) times the number of
    distinct non-numeral subterms of order o."""
    distinct: dict[Term, None] = {}
    seen_ids: set[int] = set()

    def collect(node):
        if id(node) in seen_ids:
            return
        seen_ids.add(id(node))
        if isinstance(node, Term) and not isinstance(node, (Num, FunctionalArg)):
            distinct[node] = None
        for c in _child_nodes(node):
            collect(c)

    collect(t)
    counts: dict[Ordinal, int] = {}
    for s in distinct:
        o = order(s, reg)
        counts[o] = counts.get(o, 0) + 1
    return ordinal_sum(counts.items())


# ----------------------------------------------------------------- reduction


def _find_innermost_constant(t: Term) -> FunApp | None:
    k = type(t)
    if k in (Num, Var, EpsTerm, PiTerm):
        return None
    if k is Succ:
        return _find_innermost_constant(t.arg)
    if k is FunctionalArg:
        return _find_innermost_constant(t.body)
    if k is FunApp:
        for a in t.args:
            got = _find_innermost_constant(a)
            if got is not None:
                return got
        if not t._fv:
            return t
        return None
    raise EngineError(f"not a term: {t!r}")


def _stage_subst(defn: PRDefinition, args, stage_vars, rec_val: Num | None) -> Substitution:
    ind = {}
    fn = {}
    if rec_val is not None:
        ind[defn.rec_var] = rec_val
    for pos, (slot, arg) in enumerate(zip(defn.slots, args[1:]), start=1):
        if slot.kind == "fn":
            fn[slot.name] = arg
        elif pos in stage_vars:
            ind[slot.name] = stage_vars[pos]
        else:
            ind[slot.name] = arg
    return Substitution(ind=ind, fn=fn)


def _check_app(defn: PRDefinition, app: FunApp) -> None:
    if len(app.args) != 1 + len(defn.slots):
        raise StuckTermError(
            f"{defn.name} expects {1 + len(defn.slots)} arguments in {app!r}")
    for slot, arg in zip(defn.slots, app.args[1:]):
        got_fn = isinstance(arg, FunctionalArg)
        if slot.kind == "fn" and not (got_fn and len(arg.vars) == slot.arity):
            raise StuckTermError(
                f"{defn.name} needs a functional argument of arity "
                f"{slot.arity} for slot {slot.name} in {app!r}")
        if slot.kind == "num" and got_fn:
            raise StuckTermError(
                f"{defn.name} got a functional argument in numeric slot "
                f"{slot.name} in {app!r}")


def _eliminate_head(reg: PRRegistry, app: FunApp, normalize=None) -> Term:
    """Fully eliminate the head symbol of ``app`` (first argument a numeral),
    unfolding the recursion all the way down."""
    defn = reg.defs[app.fn]
    _check_app(defn, app)
    k = app.args[0].value
    stage_vars = {pos: Var("%%s%d" % i) for i, pos in enumerate(defn.varying)}
    if k == 0 or defn.call_shape is None:
        if k == 0:
            out = apply_subst(defn.base_rhs, _stage_subst(defn, app.args, {}, None))
        else:
            out = apply_subst(defn.step_rhs,
                              _stage_subst(defn, app.args, {}, Num(k - 1)))
        return normalize(out) if normalize else out
    stage = apply_subst(defn.base_rhs, _stage_subst(defn, app.args, stage_vars, None))
    if normalize:
        stage = normalize(stage)
    for j in range(1, k + 1):
        s = _stage_subst(defn, app.args, stage_vars, Num(j - 1))
        inst = apply_subst(defn.step_rhs, s)
        call = apply_subst(defn.call_shape, s)
        repl = stage
        if defn.varying:
            plug = {stage_vars[pos].name: call.args[pos] for pos in defn.varying}
            repl = apply_subst(stage, Substitution(ind=plug))
        stage = replace_subterm(inst, call, repl)
        if normalize:
            stage = normalize(stage)
    if defn.varying:
        plug = {stage_vars[pos].name: app.args[pos] for pos in defn.varying}
        stage = apply_subst(stage, Substitution(ind=plug))
        if normalize:
            stage = normalize(stage)
    return stage


def _delta_value(arg: Num) -> Num:
    return Num(arg.value - 1 if arg.value else 0)


def reduce_innermost(t: Term, reg: PRRegistry) -> tuple[Term, str] | None:
    """One measured step: pick the leftmost innermost constant non-numeral
    subterm, eliminate its head symbol completely, and replace every
    occurrence of that subterm.  Returns None when no such subterm is left.
    """
    s = _find_innermost_constant(t)
    if s is None:
        return None
    if s.fn == DELTA:
        if len(s.args) != 1 or not isinstance(s.args[0], Num):
            raise StuckTermError(f"cannot reduce {s!r}")
        out, fired = _delta_value(s.args[0]), "delta"
    elif s.fn in reg:
        if not isinstance(s.args[0], Num):
            raise StuckTermError(f"recursion argument is not a numeral in {s!r}")
        out = _eliminate_head(reg, s)
        fired = f"{s.fn}.{'step' if s.args[0].value else 'base'}"
    else:
        raise StuckTermError(f"no rule for symbol {s.fn!r} in {s!r}")
    return replace_subterm(t, s, out), fired


def unfold_once(t: Term, reg: PRRegistry) -> tuple[Term, str] | None:
    """One single-equation rewrite at the same spot reduce_innermost picks.

    The recursive calls stay in the result, so this step does not in
    general decrease the index; it exists for inspection and for the
    stagewise reading of the step equation.
    """
    s = _find_innermost_constant(t)
    if s is None:
        return None
    if s.fn == DELTA:
        if len(s.args) != 1 or not isinstance(s.args[0], Num):
            raise StuckTermError(f"cannot reduce {s!r}")
        out, fired = _delta_value(s.args[0]), "delta"
    elif s.fn in reg:
        defn = reg.defs[s.fn]
        _check_app(defn, s)
        if not isinstance(s.args[0], Num):
            raise StuckTermError(f"recursion argument is not a numeral in {s!r}")
        k = s.args[0].value
        if k == 0:
            out = apply_subst(defn.base_rhs, _stage_subst(defn, s.args, {}, None))
            fired = f"{s.fn}.base"
        else:
            sub = _stage_subst(defn, s.args, {}, Num(k - 1))
            out = apply_subst(defn.step_rhs, sub)
            fired = f"{s.fn}.step"
    else:
        raise StuckTermError(f"no rule for symbol {s.fn!r} in {s!r}")
    return replace_subterm(t, s, out), fired


def _contains_choice(t) -> bool:
    if isinstance(t, (EpsTerm, PiTerm)):
        return True
    return any(_contains_choice(c) for c in _child_nodes(t))


def evaluate(t: Term, reg: PRRegistry, gauge: DescentGauge | None = None,
             trace: list | None = None) -> Num:
    """Evaluate a closed choice-free term to its numeral.

    With neither ``gauge`` nor ``trace``, evaluation normalizes bottom-up by
    value.  With either, it runs literal reduce_innermost steps, records the
    index before each one in the gauge (failing loudly if a step does not
    strictly descend), and appends {"step", "rule", "index"} rows to
    ``trace``.  The rule label names the defining equation of the symbol
    eliminated by the step.
    """
    if t._fv:
        raise EngineError(f"evaluate needs a closed term, got free {sorted(t._fv)}")
    if _contains_choice(t):
        raise EngineError("evaluate does not handle choice terms")
    if gauge is None and trace is None:
        out = _norm(t, reg)
        if not isinstance(out, Num):
            raise StuckTermError(f"normal form is not a numeral: {out!r}")
        return out
    if gauge is None:
        gauge = DescentGauge()
    step = 0
    while True:
        got = reduce_innermost(t, reg)
        if got is None:
            break
        gauge_record(gauge, index(t, reg))
        t, fired = got
        step += 1
        if trace is not None:
            trace.append({"step": step, "rule": fired, "index": str(gauge.last)})
    if not isinstance(t, Num):
        raise StuckTermError(f"normal form is not a numeral: {t!r}")
    return t


def _norm(t: Term, reg: PRRegistry) -> Term:
    k = type(t)
    if k in (Num, Var, EpsTerm, PiTerm):
        return t
    if k is Succ:
        return succ(_norm(t.arg, reg))
    if k is FunctionalArg:
        return FunctionalArg(t.vars, _norm(t.body, reg))
    if k is FunApp:
        args = tuple(_norm(a, reg) for a in t.args)
        if t.fn == DELTA:
            if len(args) == 1 and isinstance(args[0], Num):
                return _delta_value(args[0])
            return FunApp(DELTA, args)
        defn = reg.get(t.fn)
        if defn is not None and args and isinstance(args[0], Num):
            node = FunApp(t.fn, args)
            if not node._fv:
                hit = reg._value_cache.get(node)
                if hit is not None:
                    return hit
            out = _eliminate_head(reg, node, normalize=lambda x: _norm(x, reg))
            if not node._fv and isinstance(out, Num):
                reg._value_cache[node] = out
            return out
        return FunApp(t.fn, args)
    raise EngineError(f"not a term: {t!r}")
