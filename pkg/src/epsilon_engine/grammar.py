"""Concrete syntax: lexer, recursive-descent parser, and printer.

Grammar, loosest first:

    formula  :=  imp
    imp      :=  or ('->' imp)?                   right associative
    or       :=  and ('|' and)*
    and      :=  unary ('&' unary)*
    unary    :=  '~' unary | 'all' var '.' imp | 'ex' var '.' imp
               | UPPER ('(' term,* ')')?          formula variable
               | term ('=' | '!=') term | '(' imp ')'
    term     :=  base ('+' '1')*
    base     :=  NUM | var | fname '(' arg,* ')' | '(' term ')'
               | 'eps' var '.' imp | 'pi' var '.' imp
    arg      :=  term | 'fn' var+ '.' term

Binder bodies extend as far right as possible and stop at a comma or a
closing parenthesis that does not belong to them, so arguments like
``f(eps x. x = 0, y)`` need no extra parentheses.  The printer re-derives
surface names for bound variables (the tree stores height-indexed internal
names) and parenthesizes so that printing and reparsing round-trips.
"""

from __future__ import annotations

from .errors import ParseError
from .syntax import (
    And, EpsTerm, Eq, Exists, FmlVar, Forall, Formula, FunApp, FunctionalArg,
    Imp, Neq, Not, Num, Or, PiTerm, Succ, Term, Var, succ,
)

__all__ = ["parse_term", "parse_formula", "format_term", "format_formula"]

KEYWORDS = frozenset({"eps", "pi", "fn", "all", "ex"})

_PUNCT = ("->", "!=", "(", ")", ",", ".", "+", "=", "~", "&", "|")


def _lex(text: str) -> list[tuple[str, str, int]]:
    toks = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
            continue
        if c.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            toks.append(("num", text[i:j], i))
            i = j
            continue
        if c.isalpha():
            j = i
            while j < n and (text[j].isalnum() or text[j] in "_'"):
                j += 1
            toks.append(("ident", text[i:j], i))
            i = j
            continue
        for p in _PUNCT:
            if text.startswith(p, i):
                toks.append((p, p, i))
                i += len(p)
                break
        else:
            raise ParseError(f"unexpected character {c!r}", text, i)
    toks.append(("eof", "", n))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _lex(text)
        self.i = 0

    def peek(self) -> tuple[str, str, int]:
        return self.toks[self.i]

    def next(self) -> tuple[str, str, int]:
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, kind: str) -> tuple[str, str, int]:
        t = self.next()
        if t[0] != kind:
            raise ParseError(f"expected {kind!r}, found {t[1] or 'end of input'!r}",
                             self.text, t[2])
        return t

    def fail(self, message: str):
        raise ParseError(message, self.text, self.peek()[2])

    # ---- formulas

    def formula(self) -> Formula:
        left = self.disjunction()
        if self.peek()[0] == "->":
            self.next()
            return Imp(left, self.formula())
        return left

    def disjunction(self) -> Formula:
        left = self.conjunction()
        while self.peek()[0] == "|":
            self.next()
            left = Or(left, self.conjunction())
        return left

    def conjunction(self) -> Formula:
        left = self.unary()
        while self.peek()[0] == "&":
            self.next()
            left = And(left, self.unary())
        return left

    def unary(self) -> Formula:
        kind, value, pos = self.peek()
        if kind == "~":
            self.next()
            return Not(self.unary())
        if kind == "ident" and value in ("all", "ex"):
            self.next()
            var = self.variable()
            self.expect(".")
            body = self.formula()
            return (Forall if value == "all" else Exists)(var, body)
        if kind == "ident" and value[0].isupper():
            self.next()
            args: tuple[Term, ...] = ()
            if self.peek()[0] == "(":
                self.next()
                args = self.term_list()
                self.expect(")")
            return FmlVar(value, args)
        # Could be a relation between terms or a parenthesized formula.
        save = self.i
        try:
            left = self.term()
            op = self.peek()[0]
            if op in ("=", "!="):
                self.next()
                right = self.term()
                return Eq(left, right) if op == "=" else Neq(left, right)
            raise ParseError("expected '=' or '!='", self.text, self.peek()[2])
        except ParseError:
            self.i = save
        if kind == "(":
            self.next()
            inner = self.formula()
            self.expect(")")
            return inner
        self.fail(f"cannot start a formula with {value or 'end of input'!r}")

    # ---- terms

    def term(self) -> Term:
        base = self.base()
        while self.peek()[0] == "+":
            plus = self.next()
            kind, value, pos = self.next()
            if kind != "num" or value != "1":
                raise ParseError("only '+1' is a term operator", self.text, plus[2])
            base = succ(base)
        return base

    def base(self) -> Term:
        kind, value, pos = self.peek()
        if kind == "num":
            self.next()
            return Num(int(value))
        if kind == "(":
            self.next()
            inner = self.term()
            self.expect(")")
            return inner
        if kind == "ident":
            if value in ("eps", "pi"):
                self.next()
                var = self.variable()
                self.expect(".")
                body = self.formula()
                return (EpsTerm if value == "eps" else PiTerm)(var, body)
            if value in ("all", "ex", "fn"):
                self.fail(f"{value!r} cannot start a term here")
            if value[0].isupper():
                self.fail(f"formula variable {value!r} in term position")
            self.next()
            if self.peek()[0] == "(":
                self.next()
                args = self.arg_list()
                self.expect(")")
                return FunApp(value, args)
            return Var(value)
        self.fail(f"cannot start a term with {value or 'end of input'!r}")

    def variable(self) -> str:
        kind, value, pos = self.next()
        if kind != "ident" or not value[0].islower() or value in KEYWORDS:
            raise ParseError(f"expected a variable, found {value!r}", self.text, pos)
        return value

    def term_list(self) -> tuple[Term, ...]:
        items = [self.term()]
        while self.peek()[0] == ",":
            self.next()
            items.append(self.term())
        return tuple(items)

    def arg_list(self) -> tuple[Term, ...]:
        items = [self.argument()]
        while self.peek()[0] == ",":
            self.next()
            items.append(self.argument())
        return tuple(items)

    def argument(self) -> Term:
        kind, value, pos = self.peek()
        if kind == "ident" and value == "fn":
            self.next()
            vars = [self.variable()]
            while self.peek()[0] == "ident" and self.peek()[1] not in KEYWORDS:
                vars.append(self.variable())
            self.expect(".")
            body = self.term()
            return FunctionalArg(tuple(vars), body)
        return self.term()


def parse_term(text: str) -> Term:
    p = _Parser(text)
    t = p.term()
    p.expect("eof")
    return t


def parse_formula(text: str) -> Formula:
    p = _Parser(text)
    f = p.formula()
    p.expect("eof")
    return f


# ------------------------------------------------------------------ printing

STRUCTURAL_NUMERAL_MAX = 16

_POOL = "abcefghijklmnopqrstuvwxyz"  # 'd' is the predecessor symbol


def _used_names(x) -> set[str]:
    used = set(n for n in x._fv if not n.startswith("$"))
    used |= set(x._heads)
    used |= set(n for n in x._fmlv)
    return used


class _Printer:
    def __init__(self, root):
        self.used = _used_names(root) | set(KEYWORDS) | {"d"}
        self.counter = 0

    def fresh(self) -> str:
        for name in _POOL:
            if name not in self.used:
                self.used.add(name)
                return name
        while True:
            self.counter += 1
            name = f"v{self.counter}"
            if name not in self.used:
                self.used.add(name)
                return name

    # ---- terms

    def term(self, t: Term, env: dict[str, str]) -> str:
        k = type(t)
        if k is Num:
            if t.value <= STRUCTURAL_NUMERAL_MAX:
                return "0" + "+1" * t.value
            return str(t.value)
        if k is Var:
            return env.get(t.name, t.name)
        if k is Succ:
            inner = self.term(t.arg, env)
            if isinstance(t.arg, (EpsTerm, PiTerm)):
                inner = f"({inner})"
            return inner + "+1"
        if k is FunApp:
            args = ", ".join(self.term(a, env) for a in t.args)
            return f"{t.fn}({args})"
        if k is FunctionalArg:
            names = [self.fresh() for _ in t.vars]
            inner = dict(env)
            inner.update(zip(t.vars, names))
            return f"fn {' '.join(names)}. {self.term(t.body, inner)}"
        if k in (EpsTerm, PiTerm):
            name = self.fresh()
            inner = dict(env)
            inner[t.var] = name
            word = "eps" if k is EpsTerm else "pi"
            return f"{word} {name}. {self.formula(t.body, inner)}"
        raise TypeError(f"not a term: {t!r}")

    def side(self, t: Term, env: dict[str, str]) -> str:
        out = self.term(t, env)
        if isinstance(t, (EpsTerm, PiTerm)):
            return f"({out})"
        return out

    # ---- formulas

    def formula(self, f: Formula, env: dict[str, str]) -> str:
        k = type(f)
        if k is Imp:
            left = self.formula(f.left, env)
            if type(f.left) is Imp or _open_tail(f.left):
                left = f"({left})"
            right = self.formula(f.right, env)
            if type(f.right) is Imp:
                right = f"({right})"
            return f"{left} -> {right}"
        if k is Or:
            left = self.formula(f.left, env)
            if type(f.left) is Imp or _open_tail(f.left):
                left = f"({left})"
            right = self.formula(f.right, env)
            if type(f.right) in (Imp, Or):
                right = f"({right})"
            return f"{left} | {right}"
        if k is And:
            left = self.formula(f.left, env)
            if type(f.left) in (Imp, Or) or _open_tail(f.left):
                left = f"({left})"
            right = self.formula(f.right, env)
            if type(f.right) in (Imp, Or, And):
                right = f"({right})"
            return f"{left} & {right}"
        if k is Not:
            return f"~({self.formula(f.body, env)})"
        if k is Eq:
            return f"{self.side(f.left, env)} = {self.side(f.right, env)}"
        if k is Neq:
            return f"{self.side(f.left, env)} != {self.side(f.right, env)}"
        if k is FmlVar:
            if not f.args:
                return f.name
            args = ", ".join(self.term(a, env) for a in f.args)
            return f"{f.name}({args})"
        if k in (Forall, Exists):
            name = self.fresh()
            inner = dict(env)
            inner[f.var] = name
            word = "all" if k is Forall else "ex"
            return f"{word} {name}. {self.formula(f.body, inner)}"
        raise TypeError(f"not a formula: {f!r}")


def _open_tail(f: Formula) -> bool:
    """True if the printed form of ``f`` ends in an unparenthesized binder
    body, which would swallow anything printed after it."""
    k = type(f)
    if k in (Forall, Exists):
        return True
    if k in (Imp, Or, And):
        return _open_tail(f.right)
    return False


def format_term(t: Term) -> str:
    return _Printer(t).term(t, {})


def format_formula(f: Formula) -> str:
    return _Printer(f).formula(f, {})
