"""Terms, formulas, substitutions, and instance matching.

The term language has numerals, a successor postfix, the predecessor symbol
``d``, applications of function symbols (possibly taking functional arguments
written ``fn c. t``), and the choice binders ``eps x. F`` and ``pi x. F``.
Formulas are equations and inequations between terms, the propositional
connectives, parameterized formula variables, and the two quantifiers.

Bound variables are renamed at construction time to height-indexed internal
names (``$1``, ``$2``, ... counted from the innermost binder), so plain
structural equality is alpha-equivalence and substitution cannot capture:
an internal name can only be captured by a binder of the same height, and
binder heights strictly increase from a node towards the root.  Surface
names reappear only in the printer.  ``a != b`` is kept as its own node but
compares and hashes equal to ``~(a = b)``.
"""

from __future__ import annotations

from typing import Iterator, Mapping, Union

from .errors import NotNumeralError, SubstitutionError

__all__ = [
    "Term", "Formula", "Num", "Succ", "Var", "FunApp", "FunctionalArg",
    "EpsTerm", "PiTerm", "Eq", "Neq", "Not", "Imp", "And", "Or", "FmlVar",
    "Forall", "Exists", "Substitution", "EMPTY_SUBST", "DELTA",
    "numeral", "succ", "delta", "numeral_value", "is_numeral",
    "apply_subst", "compose_subst", "match_instance", "children",
    "replace_subterm", "subterms", "bound_name",
]

DELTA = "d"

_EMPTY = frozenset()


def bound_name(height: int, slot: int | None = None) -> str:
    """Internal name for a bound variable introduced at binder height ``height``."""
    if slot is None:
        return "$%d" % height
    return "$%d#%d" % (height, slot)


class _Node:
    """Cache-carrying base for terms and formulas."""

    __slots__ = ()

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, _Node):
            return NotImplemented
        return _eq(self, other)

    def __ne__(self, other):
        result = self.__eq__(other)
        if result is NotImplemented:
            return result
        return not result


class Term(_Node):
    __slots__ = ()

    def __str__(self):
        from .grammar import format_term
        return format_term(self)


class Formula(_Node):
    __slots__ = ()

    def __str__(self):
        from .grammar import format_formula
        return format_formula(self)


Expr = Union[Term, Formula]

_CACHES = ("_hash", "_bh", "_fv", "_heads", "_fmlv")


class Num(Term):
    """Canonical numeral: ``Num(0)`` is 0, ``Num(3)`` is 0+1+1+1."""

    __slots__ = ("value",) + _CACHES

    def __init__(self, value: int):
        if value < 0:
            raise ValueError("numerals are non-negative")
        self.value = value
        self._hash = hash(("num", value))
        self._bh = 0
        self._fv = _EMPTY
        self._heads = _EMPTY
        self._fmlv = _EMPTY

    def __repr__(self):
        return f"Num({self.value})"


class Var(Term):
    __slots__ = ("name",) + _CACHES

    def __init__(self, name: str):
        self.name = name
        self._hash = hash(("var", name))
        self._bh = 0
        self._fv = frozenset((name,))
        self._heads = _EMPTY
        self._fmlv = _EMPTY

    def __repr__(self):
        return f"Var({self.name!r})"


class Succ(Term):
    """Successor of a term that is not itself a numeral (use ``succ`` to build)."""

    __slots__ = ("arg",) + _CACHES

    def __init__(self, arg: Term):
        if isinstance(arg, Num):
            raise ValueError("Succ over a numeral; use succ()")
        self.arg = arg
        self._hash = hash(("succ", arg._hash))
        self._bh = arg._bh
        self._fv = arg._fv
        self._heads = arg._heads
        self._fmlv = arg._fmlv

    def __repr__(self):
        return f"Succ({self.arg!r})"


class FunctionalArg(Term):
    """A functional argument ``fn c1 c2. t``, legal only in argument position."""

    __slots__ = ("vars", "body") + _CACHES

    def __init__(self, vars: tuple[str, ...], body: Term):
        if not vars:
            raise ValueError("functional argument needs at least one variable")
        if len(set(vars)) != len(vars):
            raise ValueError("functional argument variables must be distinct")
        h = body._bh + 1
        if len(vars) == 1:
            targets = (bound_name(h),)
        else:
            targets = tuple(bound_name(h, i) for i in range(len(vars)))
        if vars != targets:
            body = _rename(body, dict(zip(vars, targets)))
        self.vars = targets
        self.body = body
        self._hash = hash(("fnarg", len(targets), body._hash))
        self._bh = h
        self._fv = body._fv - frozenset(targets)
        self._heads = body._heads
        self._fmlv = body._fmlv

    def __repr__(self):
        return f"FunctionalArg({self.vars!r}, {self.body!r})"


class FunApp(Term):
    """Application of a function symbol or function variable."""

    __slots__ = ("fn", "args") + _CACHES

    def __init__(self, fn: str, args: tuple[Term, ...]):
        self.fn = fn
        self.args = args = tuple(args)
        self._hash = hash(("app", fn) + tuple(a._hash for a in args))
        self._bh = max((a._bh for a in args), default=0)
        self._fv = _union(a._fv for a in args)
        self._heads = _union(a._heads for a in args) | {fn}
        self._fmlv = _union(a._fmlv for a in args)

    def __repr__(self):
        return f"FunApp({self.fn!r}, {self.args!r})"


class EpsTerm(Term):
    """``eps x. F``: a witness for F if one exists, else 0."""

    __slots__ = ("var", "body") + _CACHES

    def __init__(self, var: str, body: Formula):
        h = body._bh + 1
        target = bound_name(h)
        if var != target:
            body = _rename(body, {var: target})
        self.var = target
        self.body = body
        self._hash = hash(("eps", body._hash))
        self._bh = h
        self._fv = body._fv - {target}
        self._heads = body._heads
        self._fmlv = body._fmlv

    def __repr__(self):
        return f"EpsTerm({self.var!r}, {self.body!r})"


class PiTerm(Term):
    """``pi x. F``: 1 if F holds nowhere, else 0."""

    __slots__ = ("var", "body") + _CACHES

    def __init__(self, var: str, body: Formula):
        h = body._bh + 1
        target = bound_name(h)
        if var != target:
            body = _rename(body, {var: target})
        self.var = target
        self.body = body
        self._hash = hash(("pi", body._hash))
        self._bh = h
        self._fv = body._fv - {target}
        self._heads = body._heads
        self._fmlv = body._fmlv

    def __repr__(self):
        return f"PiTerm({self.var!r}, {self.body!r})"


# ------------------------------------------------------------------ formulas


class Eq(Formula):
    __slots__ = ("left", "right") + _CACHES

    def __init__(self, left: Term, right: Term):
        self.left = left
        self.right = right
        self._hash = hash(("eq", left._hash, right._hash))
        self._bh = max(left._bh, right._bh)
        self._fv = left._fv | right._fv
        self._heads = left._heads | right._heads
        self._fmlv = left._fmlv | right._fmlv

    def __repr__(self):
        return f"Eq({self.left!r}, {self.right!r})"


class Neq(Formula):
    """``a != b``; equal (and hashes equal) to ``Not(Eq(a, b))``."""

    __slots__ = ("left", "right", "_view") + _CACHES

    def __init__(self, left: Term, right: Term):
        self.left = left
        self.right = right
        self._view = None
        self._hash = hash(("not", hash(("eq", left._hash, right._hash))))
        self._bh = max(left._bh, right._bh)
        self._fv = left._fv | right._fv
        self._heads = left._heads | right._heads
        self._fmlv = left._fmlv | right._fmlv

    def as_not(self) -> "Not":
        if self._view is None:
            self._view = Not(Eq(self.left, self.right))
        return self._view

    def __repr__(self):
        return f"Neq({self.left!r}, {self.right!r})"


class Not(Formula):
    __slots__ = ("body",) + _CACHES

    def __init__(self, body: Formula):
        self.body = body
        self._hash = hash(("not", body._hash))
        self._bh = body._bh
        self._fv = body._fv
        self._heads = body._heads
        self._fmlv = body._fmlv

    def __repr__(self):
        return f"Not({self.body!r})"


class _BinOp(Formula):
    __slots__ = ("left", "right") + _CACHES

    _tag = ""

    def __init__(self, left: Formula, right: Formula):
        self.left = left
        self.right = right
        self._hash = hash((self._tag, left._hash, right._hash))
        self._bh = max(left._bh, right._bh)
        self._fv = left._fv | right._fv
        self._heads = left._heads | right._heads
        self._fmlv = left._fmlv | right._fmlv

    def __repr__(self):
        return f"{type(self).__name__}({self.left!r}, {self.right!r})"


class Imp(_BinOp):
    __slots__ = ()
    _tag = "imp"


class And(_BinOp):
    __slots__ = ()
    _tag = "and"


class Or(_BinOp):
    __slots__ = ()
    _tag = "or"


class FmlVar(Formula):
    """A formula variable, possibly applied to term arguments: ``A`` or ``A(t)``."""

    __slots__ = ("name", "args") + _CACHES

    def __init__(self, name: str, args: tuple[Term, ...] = ()):
        self.name = name
        self.args = args = tuple(args)
        self._hash = hash(("fvar", name) + tuple(a._hash for a in args))
        self._bh = max((a._bh for a in args), default=0)
        self._fv = _union(a._fv for a in args)
        self._heads = _union(a._heads for a in args)
        self._fmlv = _union(a._fmlv for a in args) | {name}

    def __repr__(self):
        if not self.args:
            return f"FmlVar({self.name!r})"
        return f"FmlVar({self.name!r}, {self.args!r})"


class _Quant(Formula):
    __slots__ = ("var", "body") + _CACHES

    _tag = ""

    def __init__(self, var: str, body: Formula):
        h = body._bh + 1
        target = bound_name(h)
        if var != target:
            body = _rename(body, {var: target})
        self.var = target
        self.body = body
        self._hash = hash((self._tag, body._hash))
        self._bh = h
        self._fv = body._fv - {target}
        self._heads = body._heads
        self._fmlv = body._fmlv

    def __repr__(self):
        return f"{type(self).__name__}({self.var!r}, {self.body!r})"


class Forall(_Quant):
    __slots__ = ()
    _tag = "all"


class Exists(_Quant):
    __slots__ = ()
    _tag = "ex"


# ------------------------------------------------------------ small builders


def _union(sets) -> frozenset:
    out = _EMPTY
    for s in sets:
        if s:
            out = out | s
    return out


def numeral(n: int) -> Num:
    return Num(n)


def succ(t: Term) -> Term:
    """Successor with numeral folding: succ(Num(n)) is Num(n + 1)."""
    if isinstance(t, Num):
        return Num(t.value + 1)
    return Succ(t)


def delta(t: Term) -> FunApp:
    """The predecessor symbol applied to ``t``."""
    return FunApp(DELTA, (t,))


def is_numeral(t: Expr) -> bool:
    return isinstance(t, Num)


def numeral_value(t: Term) -> int:
    if isinstance(t, Num):
        return t.value
    raise NotNumeralError(f"not a numeral: {t!r}")


def children(x: Expr) -> tuple[Expr, ...]:
    """Immediate term/formula children, functional-argument bodies included."""
    t = type(x)
    if t in (Num, Var):
        return ()
    if t is Succ:
        return (x.arg,)
    if t in (FunApp, FmlVar):
        return x.args
    if t in (FunctionalArg, Not, EpsTerm, PiTerm, Forall, Exists):
        return (x.body,)
    if t in (Eq, Neq, Imp, And, Or):
        return (x.left, x.right)
    raise TypeError(f"not a term or formula: {x!r}")


# ------------------------------------------------------------------ equality


def _eq(a: Expr, b: Expr) -> bool:
    if a is b:
        return True
    if a._hash != b._hash:
        return False
    ta, tb = type(a), type(b)
    if ta is not tb:
        if ta is Neq and tb is Not:
            return _eq(a.as_not(), b)
        if ta is Not and tb is Neq:
            return _eq(a, b.as_not())
        return False
    if ta is Num:
        return a.value == b.value
    if ta is Var:
        return a.name == b.name
    if ta is Succ:
        return _eq(a.arg, b.arg)
    if ta is FunApp:
        return (a.fn == b.fn and len(a.args) == len(b.args)
                and all(_eq(x, y) for x, y in zip(a.args, b.args)))
    if ta is FmlVar:
        return (a.name == b.name and len(a.args) == len(b.args)
                and all(_eq(x, y) for x, y in zip(a.args, b.args)))
    if ta in (FunctionalArg,):
        return len(a.vars) == len(b.vars) and _eq(a.body, b.body)
    if ta in (EpsTerm, PiTerm, Forall, Exists, Not):
        return _eq(a.body, b.body)
    if ta in (Eq, Neq, Imp, And, Or):
        return _eq(a.left, b.left) and _eq(a.right, b.right)
    raise TypeError(f"not a term or formula: {a!r}")


# -------------------------------------------------------------- substitution


class Substitution:
    """Maps individual variables to terms, formula variables to a formula with
    designated argument slots, and function variables to functional arguments.
    """

    __slots__ = ("ind", "fml", "fn")

    def __init__(self,
                 ind: Mapping[str, Term] | None = None,
                 fml: Mapping[str, tuple[tuple[str, ...], Formula]] | None = None,
                 fn: Mapping[str, FunctionalArg] | None = None):
        self.ind = dict(ind) if ind else {}
        self.fml = dict(fml) if fml else {}
        self.fn = dict(fn) if fn else {}

    def is_empty(self) -> bool:
        return not (self.ind or self.fml or self.fn)

    def __repr__(self):
        parts = []
        for v, t in self.ind.items():
            parts.append(f"{v}: {t!r}")
        for a, (params, body) in self.fml.items():
            parts.append(f"{a}({', '.join(params)}): {body!r}")
        for f, fa in self.fn.items():
            parts.append(f"{f}: {fa!r}")
        return "Substitution{" + ", ".join(parts) + "}"


EMPTY_SUBST = Substitution()


def _rename(body: Expr, mapping: dict[str, str]) -> Expr:
    live = {old: Var(new) for old, new in mapping.items() if old != new}
    if not live:
        return body
    return apply_subst(body, Substitution(ind=live))


def _touches(x: Expr, s: Substitution) -> bool:
    return (any(v in x._fv for v in s.ind)
            or any(a in x._fmlv for a in s.fml)
            or any(f in x._heads for f in s.fn))


def _mask(s: Substitution, names: tuple[str, ...]) -> Substitution:
    if not any(n in s.ind for n in names):
        return s
    ind = {v: t for v, t in s.ind.items() if v not in names}
    return Substitution(ind=ind, fml=s.fml, fn=s.fn)


def _lift_names(count: int, body: Expr, s: Substitution) -> tuple[str, ...]:
    """Fresh stand-in names for bound variables while ``s`` runs under their
    binder; chosen outside the surface and internal namespaces."""
    used = set(body._fv) | set(s.ind) | set(_range_free_vars(s))
    out = []
    for _ in range(count):
        n = _fresh_name("@bound", used)
        used.add(n)
        out.append(n)
    return tuple(out)


def apply_subst(x: Expr, s: Substitution) -> Expr:
    """Capture-free simultaneous substitution on a term or formula."""
    if s.is_empty() or not _touches(x, s):
        return x
    t = type(x)
    if t is Var:
        return s.ind.get(x.name, x)
    if t is Succ:
        return succ(apply_subst(x.arg, s))
    if t is FunApp:
        args = tuple(apply_subst(a, s) for a in x.args)
        if x.fn in s.fn:
            fa = s.fn[x.fn]
            if len(fa.vars) != len(args):
                raise SubstitutionError(
                    f"function variable {x.fn} applied to {len(args)} arguments, "
                    f"bound to one of {len(fa.vars)}")
            if any(isinstance(a, FunctionalArg) for a in args):
                raise SubstitutionError(
                    f"function variable {x.fn} cannot take functional arguments")
            plug = Substitution(ind=dict(zip(fa.vars, args)))
            return apply_subst(fa.body, plug)
        return FunApp(x.fn, args)
    if t is FunctionalArg:
        inner = _mask(s, x.vars)
        if inner.is_empty() or not _touches(x.body, inner):
            return x
        names = _lift_names(len(x.vars), x.body, inner)
        body = apply_subst(x.body, Substitution(
            ind={v: Var(n) for v, n in zip(x.vars, names)}))
        return FunctionalArg(names, apply_subst(body, inner))
    if t in (EpsTerm, PiTerm, Forall, Exists):
        inner = _mask(s, (x.var,))
        if inner.is_empty() or not _touches(x.body, inner):
            return x
        # The substituted body may grow in binder height, in which case the
        # constructor renames the bound variable upward.  Occurrences that
        # went in through the substitution itself (a formula-variable
        # argument naming this binder) would meet same-height binders from
        # the plugged body before that rename happens, so the bound
        # variable rides through the substitution under a fresh name that
        # no canonical binder can capture.
        (fresh,) = _lift_names(1, x.body, inner)
        body = apply_subst(x.body, Substitution(ind={x.var: Var(fresh)}))
        return t(fresh, apply_subst(body, inner))
    if t is Eq:
        return Eq(apply_subst(x.left, s), apply_subst(x.right, s))
    if t is Neq:
        return Neq(apply_subst(x.left, s), apply_subst(x.right, s))
    if t is Not:
        return Not(apply_subst(x.body, s))
    if t in (Imp, And, Or):
        return t(apply_subst(x.left, s), apply_subst(x.right, s))
    if t is FmlVar:
        args = tuple(apply_subst(a, s) for a in x.args)
        if x.name in s.fml:
            params, body = s.fml[x.name]
            if len(params) != len(args):
                raise SubstitutionError(
                    f"formula variable {x.name} applied to {len(args)} arguments, "
                    f"bound with {len(params)} slots")
            if args:
                plug = Substitution(ind=dict(zip(params, args)))
                return apply_subst(body, plug)
            return body
        return FmlVar(x.name, args)
    return x


def _fresh_name(base: str, used: set[str]) -> str:
    if base not in used:
        return base
    k = 1
    while f"{base}_{k}" in used:
        k += 1
    return f"{base}_{k}"


def _range_free_vars(s: Substitution) -> frozenset:
    out = _EMPTY
    for t in s.ind.values():
        out |= t._fv
    for _, body in s.fml.values():
        out |= body._fv
    for fa in s.fn.values():
        out |= fa._fv
    return out


def compose_subst(first: Substitution, then: Substitution) -> Substitution:
    """Substitution with ``apply(x, result) == apply(apply(x, first), then)``."""
    ind = {v: apply_subst(t, then) for v, t in first.ind.items()}
    for v, t in then.ind.items():
        ind.setdefault(v, t)
    fml = {}
    hazard = _range_free_vars(then) | set(then.ind)
    for name, (params, body) in first.fml.items():
        if any(p in hazard for p in params):
            used = set(params) | set(hazard) | set(body._fv)
            renamed = []
            mapping = {}
            for p in params:
                if p in hazard:
                    q = _fresh_name(p, used)
                    used.add(q)
                    mapping[p] = Var(q)
                    renamed.append(q)
                else:
                    renamed.append(p)
            body = apply_subst(body, Substitution(ind=mapping))
            params = tuple(renamed)
        fml[name] = (params, apply_subst(body, _mask(then, params)))
    for name, pb in then.fml.items():
        fml.setdefault(name, pb)
    fn = {f: apply_subst(fa, then) for f, fa in first.fn.items()}
    for f, fa in then.fn.items():
        fn.setdefault(f, fa)
    return Substitution(ind=ind, fml=fml, fn=fn)


def replace_subterm(x: Expr, old: Term, new: Term) -> Expr:
    """Replace every occurrence of the subtree ``old`` (up to alpha) by ``new``."""
    if isinstance(x, Term) and x == old:
        return new
    t = type(x)
    if t in (Num, Var):
        return x
    if t is Succ:
        return succ(replace_subterm(x.arg, old, new))
    if t is FunApp:
        return FunApp(x.fn, tuple(replace_subterm(a, old, new) for a in x.args))
    if t is FmlVar:
        return FmlVar(x.name, tuple(replace_subterm(a, old, new) for a in x.args))
    if t is FunctionalArg:
        return FunctionalArg(x.vars, replace_subterm(x.body, old, new))
    if t in (EpsTerm, PiTerm, Forall, Exists):
        return t(x.var, replace_subterm(x.body, old, new))
    if t is Eq:
        return Eq(replace_subterm(x.left, old, new), replace_subterm(x.right, old, new))
    if t is Neq:
        return Neq(replace_subterm(x.left, old, new), replace_subterm(x.right, old, new))
    if t is Not:
        return Not(replace_subterm(x.body, old, new))
    if t in (Imp, And, Or):
        return t(replace_subterm(x.left, old, new), replace_subterm(x.right, old, new))
    raise TypeError(f"not a term or formula: {x!r}")


# ------------------------------------------------------------------ matching


class _Match:
    """Worklist matcher binding free variables of a template to make it equal
    a concrete instance.  Formula-variable constraints whose arguments are not
    yet determined are deferred and retried until a fixpoint.
    """

    def __init__(self, rigid: frozenset):
        self.rigid = rigid
        self.ind: dict[str, Term] = {}
        self.fml: dict[str, tuple[tuple[str, ...], Formula]] = {}
        self.deferred: list[tuple[str, tuple[Term, ...], Formula, dict[str, str]]] = []

    def walk(self, p: Expr, t: Expr, env: dict[str, str]) -> bool:
        if isinstance(p, Formula):
            if type(p) is Neq:
                p = p.as_not()
            if isinstance(t, Formula) and type(t) is Neq:
                t = t.as_not()
        tp, tt = type(p), type(t)
        if tp is Var:
            name = p.name
            if name in env:
                return tt is Var and t.name == env[name]
            if name.startswith("$"):
                return tt is Var and t.name == name
            if name in self.rigid:
                return tt is Var and t.name == name
            seen = self.ind.get(name)
            if seen is not None:
                return seen == t
            if not isinstance(t, Term) or isinstance(t, FunctionalArg):
                return False
            self.ind[name] = t
            return True
        if tp is FmlVar:
            self.deferred.append((p.name, p.args, t, dict(env)))
            return isinstance(t, Formula)
        if tp is Num:
            return tt is Num and p.value == t.value
        if tp is Succ:
            if tt is Succ:
                return self.walk(p.arg, t.arg, env)
            if tt is Num and t.value > 0:
                return self.walk(p.arg, Num(t.value - 1), env)
            return False
        if tp is FunApp:
            if tt is not FunApp or p.fn != t.fn or len(p.args) != len(t.args):
                return False
            for pa, ta in zip(p.args, t.args):
                pa_f = type(pa) is FunctionalArg
                if pa_f != (type(ta) is FunctionalArg):
                    return False
                if pa_f:
                    if len(pa.vars) != len(ta.vars):
                        return False
                    inner = dict(env)
                    inner.update(zip(pa.vars, ta.vars))
                    if not self.walk(pa.body, ta.body, inner):
                        return False
                elif not self.walk(pa, ta, env):
                    return False
            return True
        if tp in (EpsTerm, PiTerm, Forall, Exists):
            if tt is not tp:
                return False
            inner = dict(env)
            inner[p.var] = t.var
            return self.walk(p.body, t.body, inner)
        if tp is Eq:
            return tt is Eq and self.walk(p.left, t.left, env) \
                and self.walk(p.right, t.right, env)
        if tp is Not:
            return tt is Not and self.walk(p.body, t.body, env)
        if tp in (Imp, And, Or):
            return tt is tp and self.walk(p.left, t.left, env) \
                and self.walk(p.right, t.right, env)
        raise TypeError(f"cannot match pattern node {p!r}")

    def _translate(self, parg: Term, env: dict[str, str]) -> Term | None:
        if any(a not in self.fml for a in parg._fmlv):
            return None
        mapping: dict[str, Term] = {}
        for v in parg._fv:
            if v in env:
                mapping[v] = Var(env[v])
            elif v in self.ind:
                mapping[v] = self.ind[v]
            elif v in self.rigid:
                pass
            else:
                return None
        return apply_subst(parg, Substitution(ind=mapping, fml=self.fml))

    def settle(self) -> bool:
        pending = self.deferred
        while pending:
            rest = []
            progress = False
            for item in pending:
                name, pargs, t, env = item
                known = self.fml.get(name)
                cargs = []
                ok = True
                for pa in pargs:
                    ca = self._translate(pa, env)
                    if ca is None:
                        ok = False
                        break
                    cargs.append(ca)
                if not ok:
                    rest.append(item)
                    continue
                if known is not None:
                    params, body = known
                    if len(params) != len(cargs):
                        return False
                    expected = apply_subst(
                        FmlVar(name, tuple(cargs)),
                        Substitution(fml={name: known}))
                    if expected != t:
                        return False
                else:
                    used = set(t._fv) | {v for c in cargs for v in c._fv}
                    params = []
                    body = t
                    for i, ca in enumerate(cargs):
                        q = _fresh_name("slot%d" % i, used)
                        used.add(q)
                        params.append(q)
                        body = replace_subterm(body, ca, Var(q))
                    self.fml[name] = (tuple(params), body)
                progress = True
            if not progress:
                return False
            pending = rest
        return True


def match_instance(template: Expr, instance: Expr,
                   rigid: frozenset = _EMPTY) -> Substitution | None:
    """Find a substitution making ``template`` equal ``instance``.

    Free individual variables and formula variables of the template are
    matchable; names in ``rigid`` and bound variables are not.  Function
    variables are treated as rigid heads.  Returns None when no match is
    found.  The result is verified by applying it, so a returned
    substitution really does map the template onto the instance.
    """
    m = _Match(rigid)
    if not m.walk(template, instance, {}):
        return None
    if not m.settle():
        return None
    s = Substitution(ind=m.ind, fml=m.fml)
    try:
        if apply_subst(template, s) != instance:
            return None
    except SubstitutionError:
        return None
    return s


def subterms(x: Expr) -> Iterator[Term]:
    """Yield every term node inside ``x``, functional-argument bodies included.

    Nodes are yielded once per occurrence, outermost first.
    """
    stack = [x]
    while stack:
        node = stack.pop()
        if isinstance(node, Term):
            yield node
        stack.extend(reversed(children(node)))
