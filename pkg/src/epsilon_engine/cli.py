"""Command-line front end.

Five subcommands bind the pipeline together over files: ``check`` and
``consistency`` for proof files, ``eval`` for term files, ``esolve`` for
the substitution method, and ``fuzz`` for seeded corpus generation.

Exit codes are a stable contract: 0 ok/Solving, 1 verification failure,
2 step limit, 3 stuck, 64 usage, 65 parse error.  With several input
files the worst code wins.  Output is JSON lines when stdout is a pipe
and small tables on a terminal.
"""

import argparse
import json
import random
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .calculus import check_proof, format_proof, parse_proof
from .epsilon_sub import solve, verify_solving
from .errors import (
    EngineError, GaugeViolation, PairDescentViolation, ParseError,
    ProofError, StuckTermError, TransformError,
)
from .gen import (
    break_trace, gen_closed_term, gen_elementary_proof, gen_eps_proof,
    gen_explicit_formula, gen_pra_proof, gen_trace,
)
from .grammar import format_formula, format_term, parse_term
from .ordinals import DescentGauge, pair_descent_bound
from .recursion import builtin_ackermann, evaluate, load_definitions
from .transform import (
    consistency_figure, format_figure, is_correct_cnf, is_correct_tt,
)

__all__ = ["RunConfig", "main"]

EX_OK = 0
EX_FAIL = 1
EX_STEP_LIMIT = 2
EX_STUCK = 3
EX_USAGE = 64
EX_PARSE = 65

_OUTCOME_CODE = {"solving": EX_OK, "step-limit": EX_STEP_LIMIT,
                 "stuck": EX_STUCK}


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on bad usage, which collides with the step
    limit code; route usage errors to 64 instead."""

    def error(self, message):
        self.exit(EX_USAGE, f"{self.prog}: error: {message}\n")


@dataclass(frozen=True)
class RunConfig:
    """One command invocation, resolved from the argument vector."""

    command: str
    paths: tuple[Path, ...] = ()
    registry_path: Path | None = None
    mode: str = "decrement"
    max_rounds: int | None = None
    emit_figure: bool = False
    trace: bool = False
    jobs: int = 1
    kind: str = ""
    count: int = 100
    seed: int = 0
    check: bool = False


# ---------------------------------------------------------------- output


def _machine() -> bool:
    return not sys.stdout.isatty()


def _emit(row: dict) -> None:
    print(json.dumps(row, sort_keys=True))


def _table(rows: list[dict], columns: list[str]) -> None:
    widths = [max(len(c), *(len(str(r.get(c, ""))) for r in rows))
              for c in columns]
    print("  ".join(c.ljust(w) for c, w in zip(columns, widths)))
    for r in rows:
        print("  ".join(str(r.get(c, "")).ljust(w)
                        for c, w in zip(columns, widths)))


# ----------------------------------------------------------------- inputs


def _registry(cfg: RunConfig):
    if cfg.registry_path is None:
        return None
    return load_definitions(cfg.registry_path.read_text())


def _load_proof(path: Path, registry):
    """Parse and check one proof file; (proof, row, code) with proof None
    on failure."""
    try:
        text = path.read_text()
    except OSError as e:
        return None, {"file": str(path), "ok": False, "error": str(e)}, EX_FAIL
    try:
        p = parse_proof(text, registry)
    except (ParseError, ProofError) as e:
        return None, {"file": str(path), "ok": False,
                      "error": f"parse: {e}"}, EX_PARSE
    try:
        check_proof(p)
    except ProofError as e:
        return None, {"file": str(path), "ok": False, "line": e.label,
                      "error": e.reason}, EX_FAIL
    return p, {"file": str(path), "ok": True, "lines": len(p.lines)}, EX_OK


def _fan_out(cfg: RunConfig, worker):
    """Apply the worker to every input file, optionally in parallel, and
    keep the results in input order."""
    registry = _registry(cfg)
    if cfg.jobs > 1 and len(cfg.paths) > 1:
        with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
            return list(pool.map(lambda p: worker(p, registry), cfg.paths))
    return [worker(p, registry) for p in cfg.paths]


# --------------------------------------------------------------- commands


def cmd_check(cfg: RunConfig) -> int:
    def worker(path, registry):
        _, row, code = _load_proof(path, registry)
        return row, code, []

    results = _fan_out(cfg, worker)
    return _report(results, ["file", "ok", "lines", "line", "error"])


def cmd_consistency(cfg: RunConfig) -> int:
    def worker(path, registry):
        p, row, code = _load_proof(path, registry)
        if p is None:
            return row, code, []
        try:
            verdict = consistency_figure(p)
        except (TransformError, StuckTermError) as e:
            return {"file": str(path), "ok": False, "error": str(e)}, \
                EX_FAIL, []
        row = {"file": str(path), "ok": verdict.ok,
               "nodes": len(verdict.entries),
               "incorrect": sum(1 for _, f in verdict.entries if not f)}
        extra = [format_figure(verdict)] if cfg.emit_figure else []
        return row, EX_OK if verdict.ok else EX_FAIL, extra

    results = _fan_out(cfg, worker)
    return _report(results, ["file", "ok", "nodes", "incorrect", "error"])


def cmd_eval(cfg: RunConfig) -> int:
    registry = _registry(cfg) or builtin_ackermann()
    path = cfg.paths[0]
    try:
        text = path.read_text()
    except OSError as e:
        _emit({"file": str(path), "error": str(e)})
        return EX_FAIL
    try:
        term = parse_term(text)
    except ParseError as e:
        _emit({"file": str(path), "error": f"parse: {e}"})
        return EX_PARSE
    gauge = DescentGauge()
    steps: list[dict] = []
    try:
        value = evaluate(term, registry, gauge=gauge,
                         trace=steps if cfg.trace else None)
    except StuckTermError as e:
        _emit({"file": str(path), "error": str(e)})
        return EX_STUCK
    except GaugeViolation as e:
        _emit({"file": str(path), "error": str(e)})
        return EX_FAIL
    if _machine():
        for s in steps:
            _emit({"step": s["step"], "rule": s["rule"],
                   "index": str(s["index"])})
        _emit({"term": format_term(term), "value": value.value,
               "steps": gauge.steps})
    else:
        if cfg.trace:
            _table([{"step": s["step"], "rule": s["rule"],
                     "index": str(s["index"])} for s in steps],
                   ["step", "rule", "index"])
        print(f"{format_term(term)} = {value.value}"
              f" after {gauge.steps} steps")
    return EX_OK


def cmd_esolve(cfg: RunConfig) -> int:
    def worker(path, registry):
        p, row, code = _load_proof(path, registry)
        if p is None:
            return row, code, []
        tr = solve(p, max_rounds=cfg.max_rounds, mode=cfg.mode)
        row = {"file": str(path), "outcome": tr.outcome,
               "rounds": tr.rounds, "final": tr.final.describe()}
        if tr.note:
            row["note"] = tr.note
        code = _OUTCOME_CODE[tr.outcome]
        if tr.solving and not verify_solving(p, tr.final).ok:
            row["outcome"] = "unverified"
            code = EX_FAIL
        extra = [tr.json_lines()] if _machine() else []
        return row, code, extra

    results = _fan_out(cfg, worker)
    return _report(results,
                   ["file", "outcome", "rounds", "final", "note", "error"])


def _report(results, columns) -> int:
    rows = []
    for row, code, extra in results:
        for text in extra:
            print(text, end="" if text.endswith("\n") else "\n")
        rows.append(row)
    if _machine():
        for row in rows:
            _emit(row)
    else:
        _table(rows, columns)
    return max(code for _, code, _ in results)


# ------------------------------------------------------------------- fuzz


def _fuzz_terms(rng, count, emit, check):
    registry = builtin_ackermann()
    failures = 0
    for _ in range(count):
        t = gen_closed_term(rng, registry)
        emit({"term": format_term(t)})
        if not check:
            continue
        try:
            evaluate(t, registry, gauge=DescentGauge())
        except (GaugeViolation, StuckTermError) as e:
            failures += 1
            emit({"term": format_term(t), "error": str(e)})
    return failures


def _fuzz_formulas(rng, count, emit, check):
    failures = 0
    for _ in range(count):
        f = gen_explicit_formula(rng)
        emit({"formula": format_formula(f)})
        if check and is_correct_cnf(f) != is_correct_tt(f):
            failures += 1
            emit({"formula": format_formula(f), "error": "checker split"})
    return failures


def _fuzz_traces(rng, count, emit, check):
    failures = 0
    for _ in range(count):
        trace = gen_trace(rng)
        emit({"trace": trace})
        if not check:
            continue
        try:
            pair_descent_bound(trace)
        except PairDescentViolation as e:
            failures += 1
            emit({"trace": trace, "error": str(e)})
            continue
        spoiled = break_trace(rng, trace)
        try:
            pair_descent_bound(spoiled)
        except PairDescentViolation:
            pass
        else:
            failures += 1
            emit({"trace": spoiled, "error": "spoiled trace accepted"})
    return failures


def _fuzz_proofs(rng, count, emit, check):
    failures = 0
    for i in range(count):
        p = gen_pra_proof(rng) if i % 2 else gen_elementary_proof(rng)
        emit({"proof": format_proof(p)})
        if check and not consistency_figure(p).ok:
            failures += 1
            emit({"error": "incorrect figure node", "at": i})
    return failures


def _fuzz_eproofs(rng, count, emit, check):
    failures = 0
    for i in range(count):
        p = gen_eps_proof(rng)
        emit({"proof": format_proof(p)})
        if not check:
            continue
        tr = solve(p)
        if not (tr.solving and verify_solving(p, tr.final).ok):
            failures += 1
            emit({"error": f"outcome {tr.outcome}", "at": i})
    return failures


_FUZZERS = {"terms": _fuzz_terms, "formulas": _fuzz_formulas,
            "traces": _fuzz_traces, "proofs": _fuzz_proofs,
            "eproofs": _fuzz_eproofs}


def cmd_fuzz(cfg: RunConfig) -> int:
    rng = random.Random(cfg.seed)
    emit = _emit if _machine() else (lambda row: None)
    failures = _FUZZERS[cfg.kind](rng, cfg.count, emit, cfg.check)
    summary = {"kind": cfg.kind, "count": cfg.count, "seed": cfg.seed,
               "failures": failures}
    if _machine():
        _emit(summary)
    else:
        _table([summary], ["kind", "count", "seed", "failures"])
    return EX_OK if failures == 0 else EX_FAIL


# ------------------------------------------------------------- entry point


def _build_parser() -> _Parser:
    parser = _Parser(prog="epsilon-engine",
                     description="proof checking, term evaluation, and the"
                                 " substitution method over files")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_files(p):
        p.add_argument("paths", nargs="+", type=Path, metavar="FILE")
        p.add_argument("--registry", type=Path, default=None,
                       help="definition file overriding the builtin registry")
        p.add_argument("--jobs", type=int, default=1, metavar="N",
                       help="process input files with N workers")

    c = sub.add_parser("check", help="parse and check proof files")
    add_files(c)

    c = sub.add_parser("consistency",
                       help="transform checked proofs and judge the figure")
    add_files(c)
    c.add_argument("--emit-figure", action="store_true",
                   help="print the judged figure for each file")

    c = sub.add_parser("eval", help="evaluate a closed term file")
    c.add_argument("paths", nargs=1, type=Path, metavar="FILE")
    c.add_argument("--defs", dest="registry", type=Path, default=None,
                   help="definition file overriding the builtin registry")
    c.add_argument("--trace", action="store_true",
                   help="emit one row per innermost step with its index")

    c = sub.add_parser("esolve", help="run the substitution method")
    add_files(c)
    c.add_argument("--mode", choices=["decrement", "least"],
                   default="decrement")
    c.add_argument("--max-rounds", type=int, default=None, metavar="N",
                   help="round budget (EE_MAX_ROUNDS also honored)")

    c = sub.add_parser("fuzz", help="generate a seeded corpus")
    c.add_argument("kind", choices=sorted(_FUZZERS))
    c.add_argument("--count", type=int, default=100, metavar="N")
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--check", action="store_true",
                   help="nonzero exit if any generated item fails its check")
    return parser


def _config(ns: argparse.Namespace) -> RunConfig:
    return RunConfig(
        command=ns.command,
        paths=tuple(getattr(ns, "paths", ())),
        registry_path=getattr(ns, "registry", None),
        mode=getattr(ns, "mode", "decrement"),
        max_rounds=getattr(ns, "max_rounds", None),
        emit_figure=getattr(ns, "emit_figure", False),
        trace=getattr(ns, "trace", False),
        jobs=max(1, getattr(ns, "jobs", 1)),
        kind=getattr(ns, "kind", ""),
        count=getattr(ns, "count", 100),
        seed=getattr(ns, "seed", 0),
        check=getattr(ns, "check", False),
    )


_DISPATCH = {"check": cmd_check, "consistency": cmd_consistency,
             "eval": cmd_eval, "esolve": cmd_esolve, "fuzz": cmd_fuzz}


def main(argv=None) -> int:
    ns = _build_parser().parse_args(argv)
    cfg = _config(ns)
    try:
        return _DISPATCH[cfg.command](cfg)
    except (ParseError, ProofError) as e:
        print(f"epsilon-engine: {e}", file=sys.stderr)
        return EX_PARSE
    except EngineError as e:
        print(f"epsilon-engine: {e}", file=sys.stderr)
        return EX_FAIL


if __name__ == "__main__":
    sys.exit(main())
