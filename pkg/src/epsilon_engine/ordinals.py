"""Ordinal notations below w^w^w, descent gauges, and pair traces.

An ordinal is a Cantor normal form sum of terms w^(e)*c with the exponents
strictly decreasing and themselves notations of one level down.  Only
comparison is needed, no arithmetic.  A DescentGauge receives one ordinal
per recorded step and fails loudly the moment a step does not strictly
decrease; it is how termination claims are enforced empirically.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import GaugeViolation, PairDescentViolation

__all__ = [
    "Ordinal", "ZERO", "ONE", "OMEGA", "from_int", "omega_power",
    "omega_vector", "ordinal_sum", "pair_ordinal", "DescentGauge",
    "gauge_record", "pair_descent_bound", "compare",
]


class Ordinal:
    """Cantor normal form: ``terms`` is a tuple of (exponent, coefficient)
    pairs, exponents strictly decreasing, coefficients positive."""

    __slots__ = ("terms", "_hash")

    def __init__(self, terms: tuple[tuple["Ordinal", int], ...] = ()):
        last = None
        for e, c in terms:
            if not isinstance(e, Ordinal) or not isinstance(c, int):
                raise TypeError("ordinal terms are (Ordinal, int) pairs")
            if c <= 0:
                raise ValueError("coefficients must be positive")
            if last is not None and compare(e, last) >= 0:
                raise ValueError("exponents must strictly decrease")
            last = e
        self.terms = tuple(terms)
        if self.height() > 3:
            raise ValueError("notation exceeds w^w^w")
        self._hash = hash(tuple((e._hash, c) for e, c in self.terms))

    def height(self) -> int:
        if not self.terms:
            return 0
        return 1 + max(e.height() for e, _ in self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other):
        if not isinstance(other, Ordinal):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return self._hash

    def __lt__(self, other):
        return compare(self, other) < 0

    def __le__(self, other):
        return compare(self, other) <= 0

    def __gt__(self, other):
        return compare(self, other) > 0

    def __ge__(self, other):
        return compare(self, other) >= 0

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for e, c in self.terms:
            if e.is_zero():
                parts.append(str(c))
            elif c == 1:
                parts.append(f"w^({e})")
            else:
                parts.append(f"w^({e})*{c}")
        return " + ".join(parts)

    def __repr__(self):
        return f"<Ordinal {self}>"


def compare(a: Ordinal, b: Ordinal) -> int:
    """Lexicographic comparison of normal forms: -1, 0, or 1."""
    for (ea, ca), (eb, cb) in zip(a.terms, b.terms):
        k = compare(ea, eb)
        if k != 0:
            return k
        if ca != cb:
            return -1 if ca < cb else 1
    if len(a.terms) != len(b.terms):
        return -1 if len(a.terms) < len(b.terms) else 1
    return 0


ZERO = Ordinal()
ONE = Ordinal(((ZERO, 1),))
OMEGA = Ordinal(((ONE, 1),))


def from_int(n: int) -> Ordinal:
    if n < 0:
        raise ValueError("ordinals are non-negative")
    if n == 0:
        return ZERO
    return Ordinal(((ZERO, n),))


def omega_power(e: Ordinal, c: int = 1) -> Ordinal:
    if c == 0:
        return ZERO
    return Ordinal(((e, c),))


def ordinal_sum(pairs) -> Ordinal:
    """Normal form of a sum of w^(e)*c pieces given in any order."""
    merged: dict[Ordinal, int] = {}
    for e, c in pairs:
        if c:
            merged[e] = merged.get(e, 0) + c
    ordered = sorted(merged.items(), key=lambda ec: ec[0], reverse=True)
    return Ordinal(tuple((e, c) for e, c in ordered if c > 0))


def omega_vector(coeffs: list[int]) -> Ordinal:
    """``coeffs[i]`` is the coefficient of w^(i); handy for order vectors."""
    return ordinal_sum((from_int(i), c) for i, c in enumerate(coeffs))


def pair_ordinal(n: int, m: int) -> Ordinal:
    """The pair (n, m) read as w*n + m."""
    return ordinal_sum(((ONE, n), (ZERO, m)))


@dataclass
class DescentGauge:
    """Strict-descent watchdog.  Feed it one ordinal per step."""

    last: Ordinal | None = None
    steps: int = 0

    def __str__(self):
        if self.last is None:
            return "<gauge: no steps>"
        return f"<gauge: {self.steps} steps, last {self.last}>"


def gauge_record(gauge: DescentGauge, value: Ordinal) -> DescentGauge:
    """Record one step; raises GaugeViolation unless the value strictly drops."""
    if gauge.last is not None and compare(value, gauge.last) >= 0:
        raise GaugeViolation(gauge.last, value)
    gauge.last = value
    gauge.steps += 1
    return gauge


def pair_descent_bound(trace) -> int:
    """Validate a trace of (n, m) pairs under the lexicographic order.

    Every adjacent step must strictly decrease, and any maximal run with a
    constant first component starting at (n, m) may hold at most m + 1
    entries.  Raises PairDescentViolation at the first offending step;
    returns the number of entries otherwise.
    """
    entries = list(trace)
    for i, entry in enumerate(entries):
        try:
            n, m = entry
        except (TypeError, ValueError):
            raise PairDescentViolation(i, f"not a pair: {entry!r}") from None
        if not isinstance(n, int) or not isinstance(m, int) or n < 0 or m < 0:
            raise PairDescentViolation(i, f"not a pair of naturals: {entry!r}")
    run_start = 0
    for i in range(1, len(entries)):
        pn, pm = entries[i - 1]
        n, m = entries[i]
        if n > pn or (n == pn and m >= pm):
            raise PairDescentViolation(
                i, f"({n}, {m}) does not lexicographically follow ({pn}, {pm})")
        if n != pn:
            run_start = i
        else:
            allowed = entries[run_start][1] + 1
            if i - run_start + 1 > allowed:
                raise PairDescentViolation(
                    i, f"run with first component {n} exceeds {allowed} entries")
    return len(entries)
