"""Exception types shared across the engine."""

from __future__ import annotations


class EngineError(Exception):
    """Base class for every error the engine raises on purpose."""


class ParseError(EngineError):
    """Raised on malformed term, formula, definition, or proof text."""

    def __init__(self, message: str, text: str | None = None, pos: int | None = None):
        self.text = text
        self.pos = pos
        if text is not None and pos is not None:
            line = text.count("\n", 0, pos) + 1
            col = pos - (text.rfind("\n", 0, pos) + 1) + 1
            message = f"{message} (line {line}, column {col})"
        super().__init__(message)


class NotNumeralError(EngineError):
    """A numeral was required but the term is not one."""


class SubstitutionError(EngineError):
    """A substitution was applied with mismatched arities or shapes."""


class DefinitionError(EngineError):
    """A recursive definition violates the schema shape rules."""


class StuckTermError(EngineError):
    """Evaluation hit a constant subterm no rule covers."""


class GaugeViolation(EngineError):
    """A recorded ordinal failed to decrease strictly."""

    def __init__(self, last, value):
        self.last = last
        self.value = value
        super().__init__(f"ordinal did not decrease: {last} then {value}")


class PairDescentViolation(EngineError):
    """A pair trace broke lexicographic descent or the step bound."""

    def __init__(self, index: int, reason: str):
        self.index = index
        self.reason = reason
        super().__init__(f"step {index}: {reason}")


class ProofError(EngineError):
    """A proof line failed to check, with the offending line label."""

    def __init__(self, label: int | None, reason: str):
        self.label = label
        self.reason = reason
        where = f"line {label}: " if label is not None else ""
        super().__init__(where + reason)


class TransformError(EngineError):
    """The consistency transformation met a proof it cannot handle."""


class ExplicitnessError(EngineError):
    """A formula that had to be variable-free and quantifier-free is not."""


class UnfoldError(EngineError):
    """Induction unfolding met a dependency it cannot instantiate."""


class SolverError(EngineError):
    """The substitution solver was handed malformed input."""
