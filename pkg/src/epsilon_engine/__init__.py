"""Recursion with functionals, Hilbert-style proofs, and choice-term solving."""

from .calculus import (
    AXIOMS, AxiomInstance, CriticalFormula, InductionRule, ModusPonens,
    Profile, Proof, ProofLine, SubstRule, check_proof, collect_critical,
    eliminate_quantifiers, eps_pa, format_proof, induction_variable,
    parse_bindings, parse_proof, pra, pra2, profile_by_name, stage2,
    unfold_induction,
)
from .errors import (
    DefinitionError, EngineError, ExplicitnessError, GaugeViolation,
    NotNumeralError, PairDescentViolation, ParseError, ProofError,
    SolverError, StuckTermError, SubstitutionError, TransformError,
    UnfoldError,
)
from .grammar import format_formula, format_term, parse_formula, parse_term
from .ordinals import (
    OMEGA, ONE, ZERO, DescentGauge, Ordinal, gauge_record, omega_power,
    omega_vector, ordinal_sum, pair_descent_bound, pair_ordinal,
)
from .epsilon_sub import (
    SolverState, SolverTranscript, TotalSubstitution, canonical_key,
    canonize, default_round_budget, eterm_degree, eterm_rank, formula_level,
    hilbert_ansatz, initial_state, is_canonical, reduce_under, solve, step,
    verify_solving,
)
from .recursion import (
    PRDefinition, PRRegistry, builtin_ackermann, evaluate, index,
    load_definitions, order, rank, reduce_innermost, register, unfold_once,
)
from .syntax import (
    DELTA, And, EpsTerm, Eq, Exists, FmlVar, Forall, Formula, FunApp,
    FunctionalArg, Imp, Neq, Not, Num, Or, PiTerm, Substitution, Succ, Term,
    Var, apply_subst, compose_subst, match_instance, numeral, numeral_value,
    replace_subterm, subterms, succ,
)
from .transform import (
    Figure, ProofTree, Verdict, consistency_figure, eliminate_variables,
    format_figure, is_correct_cnf, is_correct_tt, judge_figure,
    reduce_functionals, resolve_threads, unfold_all_inductions,
)

__version__ = "0.1.0"
