"""Independent reference computations the tests check the engine against.

Everything here is deliberately written against the definitions directly,
bypassing the engine's term machinery: plain integer recursion, an
environment-passing interpreter, a path-based scope walker, and ordinal
vectors as nested tuples.  Expected values in the test modules are frozen
from these, so a disagreement means one side misreads the definitions.
"""

from __future__ import annotations

import sys
from functools import lru_cache

sys.setrecursionlimit(100000)


# ------------------------------------------------- the branching function


def seed_direct(a: int, b: int) -> int:
    if a == 0:
        return 0
    if a == 1:
        return 1
    return b


@lru_cache(maxsize=None)
def ack_direct(a: int, b: int, c: int, cap: int | None = None) -> int | None:
    """Direct recursion, f(a+1,b,c) = f(a,b,f(a+1,b,c-1)) unrolled into a
    loop so the call depth stays bounded by the level.

    With ``cap`` set, returns None as soon as an intermediate value
    exceeds it, so the tower cells never materialize huge integers.
    """
    if a == 0:
        v = b + c
        return None if cap is not None and v > cap else v
    v = seed_direct(a - 1, b)
    for _ in range(c):
        v = ack_direct(a - 1, b, v, cap)
        if v is None or (cap is not None and v > cap):
            return None
    return v


def _pow_capped(b: int, e: int, cap: int | None) -> int | None:
    if cap is None or b <= 1:
        return b ** e
    v = 1
    for _ in range(e):
        v = v * b
        if v > cap:
            return None
    return v


def ack_suggestive(a: int, b: int, c: int, cap: int | None = None) -> int | None:
    """Closed forms for the first levels (sum, product, power, tower),
    used to sanity-check ack_direct itself inside the test suite.  Same
    ``cap`` contract as ack_direct."""
    if a == 0:
        v = b + c
    elif a == 1:
        v = b * c
    elif a == 2:
        v = _pow_capped(b, c, cap)
        if v is None:
            return None
    elif a == 3:
        v = b
        for _ in range(c):
            v = _pow_capped(b, v, cap)
            if v is None:
                return None
    else:
        raise ValueError("no closed form frozen beyond level 3")
    return None if cap is not None and v > cap else v


def least_witness(pred, bound: int) -> int | None:
    """Smallest n in [0, bound] with pred(n), or None."""
    for n in range(bound + 1):
        if pred(n):
            return n
    return None


# ------------------------------------------- environment-passing evaluator


class Budget:
    def __init__(self, limit: int):
        self.limit = limit
        self.spent = 0

    def tick(self, n: int = 1):
        self.spent += n
        if self.spent > self.limit:
            raise BudgetExceeded(self.spent)


class BudgetExceeded(Exception):
    pass


def interpret(term, registry, env=None, fenv=None, budget=None):
    """Evaluate a term AST to an int by structural recursion with explicit
    environments; defined symbols recurse through the registry equations
    directly, nothing shared with the engine's reducer.

    ``env`` maps variable names to ints, ``fenv`` maps function-variable
    names to Python callables.  ``budget`` caps the node-visit count.
    """
    from epsilon_engine.syntax import DELTA, FunApp, FunctionalArg, Num, Succ, Var

    def ev(t, env, fenv):
        if budget is not None:
            budget.tick()
        k = type(t)
        if k is Num:
            return t.value
        if k is Var:
            return env[t.name]
        if k is Succ:
            return ev(t.arg, env, fenv) + 1
        if k is FunApp:
            if t.fn == DELTA:
                v = ev(t.args[0], env, fenv)
                return v - 1 if v else 0
            defn = registry.defs.get(t.fn)
            if defn is None:
                return fenv[t.fn](*[ev(a, env, fenv) for a in t.args])
            vals = {}
            funs = {}
            for slot, a in zip(defn.slots, t.args[1:]):
                if slot.kind == "num":
                    vals[slot.name] = ev(a, env, fenv)
                else:
                    funs[slot.name] = close(a, env, fenv)
            n = ev(t.args[0], env, fenv)
            if n == 0:
                return ev(defn.base_rhs, vals, funs)
            step_env = dict(vals)
            step_env[defn.rec_var] = n - 1
            return ev(defn.step_rhs, step_env, funs)
        raise TypeError(f"interpreter got {t!r}")

    def close(fa, env, fenv):
        def call(*xs):
            inner = dict(env)
            inner.update(zip(fa.vars, xs))
            return ev(fa.body, inner, fenv)
        return call

    return ev(term, env or {}, fenv or {})


# ---------------------------------------------------- scope-walking index


def walk_occurrences(t):
    """(path, node, binder_stack) for every node; binder_stack holds
    (bound_name, binder_path) pairs in force at that node."""
    from epsilon_engine.syntax import EpsTerm, FunctionalArg, PiTerm
    from epsilon_engine.syntax import children

    out = []

    def go(node, path, stack):
        out.append((path, node, stack))
        inner = stack
        if isinstance(node, FunctionalArg):
            inner = stack + tuple((v, path) for v in node.vars)
        elif isinstance(node, (EpsTerm, PiTerm)):
            inner = stack + ((node.var, path),)
        for i, c in enumerate(children(node)):
            go(c, path + (i,), inner)

    go(t, (), ())
    return out


def free_names(t):
    return t._fv


def index_by_walking(t, registry):
    """Index of a term as a descending list of (order, count) pairs, with
    orders as plain coefficient tuples (position i of the tuple belongs to
    measured symbol i, predecessor first).  Subordination is decided from
    the binder stacks collected in one walk, not from the engine's path
    arithmetic.
    """
    from epsilon_engine.syntax import DELTA, FunApp, FunctionalArg, Num, Term

    symbols = [DELTA] + registry.names()
    posn = {s: i for i, s in enumerate(symbols)}
    nodes = walk_occurrences(t)

    def order_of(sub):
        occs = [(p, n, st) for p, n, st in walk_occurrences(sub)
                if isinstance(n, FunApp) and n.fn in posn]

        def subordinate(inner, outer):
            ip, inode, istack = inner
            op, onode, ostack = outer
            if not (len(ip) > len(op) and ip[:len(op)] == op):
                return False
            for v in free_names(inode):
                for name, bpath in istack:
                    if name != v:
                        continue
                    covers = len(bpath) <= len(op) and bpath == op[:len(bpath)]
                    own_arg = (len(bpath) == len(op) + 1
                               and bpath[:len(op)] == op)
                    if covers or own_arg:
                        return True
            return False

        def occ_rank(outer):
            # A subordinate occurrence of the same symbol bumps the rank
            # just like a later one does; without that the nested-iterate
            # terms produced by unfolding the branching function would not
            # descend under the index.
            best = 0
            for inner in occs:
                if (posn[inner[1].fn] >= posn[outer[1].fn]
                        and subordinate(inner, outer)):
                    r = occ_rank(inner)
                    if r > best:
                        best = r
            return 1 + best

        coeffs = [0] * len(symbols)
        for occ in occs:
            r = occ_rank(occ)
            for j in range(posn[occ[1].fn] + 1):
                if r > coeffs[j]:
                    coeffs[j] = r
        return tuple(coeffs)

    distinct = {}
    for _, node, _ in nodes:
        if isinstance(node, Term) and not isinstance(node, (Num, FunctionalArg)):
            distinct[node] = None
    counts = {}
    for sub in distinct:
        o = order_of(sub)
        counts[o] = counts.get(o, 0) + 1

    def key(o):
        # lexicographic from the highest measured symbol down
        return tuple(reversed(o))

    return sorted(counts.items(), key=lambda kv: key(kv[0]), reverse=True)


def index_tuple_less(a, b):
    """Strict comparison of two index_by_walking results: compare the
    (order, count) sequences lexicographically, higher orders first."""

    def norm(pairs):
        return [(tuple(reversed(o)), c) for o, c in pairs if c]

    na, nb = norm(a), norm(b)
    for (oa, ca), (ob, cb) in zip(na, nb):
        if oa != ob:
            return oa < ob
        if ca != cb:
            return ca < cb
    return len(na) < len(nb)


# ------------------------------------------------------ formula truth value


def truth_value(f) -> bool:
    """Truth of a variable-free formula with numeral sides, by recursion."""
    from epsilon_engine.syntax import And, Eq, Imp, Neq, Not, Num, Or

    k = type(f)
    if k is Eq or k is Neq:
        if not (isinstance(f.left, Num) and isinstance(f.right, Num)):
            raise ValueError(f"sides are not numerals: {f!r}")
        same = f.left.value == f.right.value
        return same if k is Eq else not same
    if k is Not:
        return not truth_value(f.body)
    if k is Imp:
        return (not truth_value(f.left)) or truth_value(f.right)
    if k is And:
        return truth_value(f.left) and truth_value(f.right)
    if k is Or:
        return truth_value(f.left) or truth_value(f.right)
    raise ValueError(f"not an explicit formula: {f!r}")
