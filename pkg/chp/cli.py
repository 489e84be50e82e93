"""
Command-line front end.

Usage:
    chp parse corpus/convoy.dlchp
    chp check corpus/convoy.dlchp [--json]
    chp prove corpus/convoy.dlchp corpus/convoy.proof [--json-report report.json]
    chp repl corpus/example1.dlchp [--script session.proof]
    chp oracle-test --rules all --samples 200 --seed 0 [--mutants] [--workers 8] [--reset]
    chp oracle-test --dump-runs corpus/prog.chp
    chp fmt corpus/convoy.dlchp [--in-place]
    chp fmt corpus/convoy.dlchp --normalize-traces [--stdout]

Exit codes: 0 success, 1 verification failure, 2 usage or IO error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from dotenv import load_dotenv

from .arith import SmtBridge
from .kernel import check_script, parse_script
from .oracle import Budget, State, runs
from .oracle.differential import MUTANTS, RULES, run_suite, suite_report
from .repl import Session, replay_into, run_repl
from .shared.checkpoint import Checkpoint, run_key
from .shared.config import Config, load_config, parse_rational
from .shared.constants import DEFAULT_SAMPLES, REPORT_SCHEMA
from .shared.errors import ChpError, IllFormedError
from .static import check_wellformed, programs_in, summary
from .syntax import parse_problem, parse_program_file, render_problem
from .syntax.ast import Problem
from .traces import normalize_formula

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2


class UsageError(ChpError):
    """Bad command-line input; maps to exit code 2."""


def _banner(title: str) -> None:
    print("=" * 70)
    print(title)
    print("=" * 70)


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror or e}") from None


def _load_problem(path: str) -> Problem:
    return parse_problem(_read(path))


def _rationals(text: Optional[str]) -> Optional[List[str]]:
    if text is None:
        return None
    values = [part.strip() for part in text.split(",") if part.strip()]
    for value in values:
        parse_rational(value)
    return values


def _config(args: argparse.Namespace) -> Config:
    config = load_config(Path(args.config) if args.config else None)
    return config.with_overrides(
        seed=args.seed,
        smt__path=args.smt_path,
        smt__timeout_ms=args.timeout_ms,
        budget__values=_rationals(args.budget_values),
        budget__durations=_rationals(args.budget_durations),
        budget__loop_depth=args.loop_depth,
        output__format="json" if args.json else None,
        output__color=True if args.color else None,
    )


def _emit(data: Dict[str, Any]) -> None:
    print(json.dumps(data, indent=2, default=str))


def _verdict(text: str, ok: bool, config: Config) -> str:
    if not config.output.color:
        return text
    return f"\033[{32 if ok else 31}m{text}\033[0m"


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_parse(args: argparse.Namespace, config: Config) -> int:
    """Parse a problem (.dlchp) or program file (.chp) and print it back."""
    text = _read(args.file)
    if args.file.endswith(".chp"):
        decls, program = parse_program_file(text)
        rendered = str(program)
    else:
        problem = parse_problem(text)
        decls, rendered = problem.decls, render_problem(problem).strip()
    if config.output.format == "json":
        _emit({"schema": REPORT_SCHEMA, "file": args.file, "ok": True, "rendered": rendered,
               "variables": {k: str(v) for k, v in decls.variables.items()}, "channels": decls.channels})
    else:
        print(rendered)
    return EXIT_OK


def cmd_check(args: argparse.Namespace, config: Config) -> int:
    """Print FV/BV/MBV/CN tables and well-formedness diagnostics."""
    text = _read(args.file)
    if args.file.endswith(".chp"):
        _, program = parse_program_file(text)
        node, programs = program, [program]
    else:
        node = parse_problem(text).formula
        programs = list(programs_in(node))

    report = check_wellformed(node, allow_mu_write=args.allow_mu_write)
    data = {
        "schema": REPORT_SCHEMA,
        "file": args.file,
        "summary": summary(node),
        "programs": [{"program": str(p), **summary(p)} for p in programs],
        **report.to_dict(),
    }
    if config.output.format == "json":
        _emit(data)
    else:
        print(f"FV:  {', '.join(data['summary']['FV']) or '-'}")
        print(f"CN:  {data['summary']['CN']}")
        for entry in data["programs"]:
            print()
            print(entry["program"])
            for key in ("FV", "BV", "MBV"):
                print(f"  {key + ':':5}{', '.join(entry[key]) or '-'}")
            print(f"  CN:  {entry['CN']}")
        print()
        if report.ok:
            print(_verdict("well-formed", True, config))
        for violation in report.violations:
            print(f"{_verdict('ILL-FORMED', False, config)} {violation}")
    return EXIT_OK if report.ok else EXIT_FAILED


def cmd_prove(args: argparse.Namespace, config: Config) -> int:
    """Replay a proof script against a problem."""
    _banner("PROVE: REPLAY PROOF SCRIPT")
    problem = _load_problem(args.problem)
    script = parse_script(_read(args.script))
    smt = SmtBridge.from_config(config.smt)
    print(f"Problem: {args.problem}")
    print(f"Script:  {args.script} ({len(script)} top-level item(s))")
    print(f"SMT:     {smt.path or ('z3 python package' if smt.available else 'none')}")
    print()

    start_time = time.time()
    report = check_script(problem, script, smt)
    elapsed = time.time() - start_time

    if args.json_report:
        Path(args.json_report).write_text(json.dumps(report.to_dict(), indent=2, default=str))
    if config.output.format == "json":
        _emit(report.to_dict())
        return EXIT_OK if report.success else EXIT_FAILED

    print("=" * 70)
    print("SUMMARY")
    print("=" * 70)
    print(f"Result: {_verdict('PROVED' if report.success else 'NOT PROVED', report.success, config)}")
    print(f"Steps: {report.steps}")
    print(f"Rules: {dict(sorted(report.rules_used.items()))}")
    print(f"Leaves: {report.leaves()}")
    print(f"Oracle-closed leaves: {report.oracle_closed}")
    print(f"Time: {elapsed:.1f} s")
    if report.failure is not None:
        print(f"\nFailure: {report.failure}")
    if report.state is not None and report.state.open_goals():
        pending = report.state.open_goals()
        print(f"\nOpen goals ({len(pending)}):")
        for goal_id in pending[:10]:
            print(f"  @{goal_id}: {report.state.goal(goal_id).sequent}")
    if args.json_report:
        print(f"\nReport: {args.json_report}")
    return EXIT_OK if report.success else EXIT_FAILED


def cmd_repl(args: argparse.Namespace, config: Config) -> int:
    """Interactive proof session; `save` (or --script on exit) writes a replayable script."""
    problem = _load_problem(args.problem)
    try:
        session = Session(problem, SmtBridge.from_config(config.smt))
    except IllFormedError as e:
        raise UsageError(str(e)) from None
    if args.load:
        error = replay_into(session, parse_script(_read(args.load)))
        if error:
            print(f"stopped loading {args.load}: {error}")
    status = run_repl(session)
    if args.script:
        session.save(Path(args.script))
        print(f"Script: {args.script}")
    return status


def _dump_runs(path: str, config: Config) -> int:
    decls, program = parse_program_file(_read(path))
    budget = Budget.from_config(config.budget, decls.channels)
    result = runs(program, State(), budget)
    computations = sorted((c.to_dict() for c in result), key=lambda d: json.dumps(d, sort_keys=True))
    _emit({
        "schema": REPORT_SCHEMA,
        "program": str(program),
        "truncated": result.truncated,
        "computations": computations,
    })
    return EXIT_OK


def _selected(text: str, known: Sequence[str], what: str) -> List[str]:
    if text == "all":
        return list(known)
    names = [n.strip() for n in text.split(",") if n.strip()]
    unknown = [n for n in names if n not in known]
    if unknown:
        raise UsageError(f"unknown {what}: {', '.join(unknown)} (known: {', '.join(known)})")
    return names


def cmd_oracle_test(args: argparse.Namespace, config: Config) -> int:
    """Differential soundness suite, or a run-set dump of one program."""
    if args.dump_runs:
        return _dump_runs(args.dump_runs, config)

    rules = _selected(args.rules, RULES, "rule")
    mutants = _selected(args.mutant_names, tuple(MUTANTS), "mutant") if args.mutants else []
    budget = Budget.from_config(config.budget)
    seed = config.seed

    _banner("ORACLE TEST: DIFFERENTIAL SOUNDNESS OF KERNEL RULES")
    key = run_key(seed=seed, samples=args.samples, budget=config.budget.model_dump())
    checkpoint = Checkpoint.load("oracle-test", key)
    if args.reset:
        checkpoint.reset()
    elif checkpoint.completed_items:
        print(f"Resuming from checkpoint: {len(checkpoint.completed_items)} already completed")

    print(f"Rules: {len(rules)}")
    print(f"Mutants: {len(mutants)}")
    print(f"Samples per rule: {args.samples}")
    print(f"Seed: {seed}")
    print(f"Workers: {args.workers}")
    print()

    start_time = time.time()
    results = run_suite(rules, args.samples, seed, budget, args.workers, mutants, checkpoint,
                        progress=config.output.format != "json")
    elapsed = time.time() - start_time
    report = suite_report(results, args.samples, seed)
    errors = [r for r in results if not r["success"]]
    if not errors:
        checkpoint.finalize()

    if args.json_report:
        Path(args.json_report).write_text(json.dumps(report, indent=2, default=str))
    if config.output.format == "json":
        _emit(report)
        return EXIT_OK if report["success"] else EXIT_FAILED

    print()
    print("=" * 70)
    print("SUMMARY")
    print("=" * 70)
    sound = [r for r in results if not r["mutant"]]
    caught = [r for r in results if r["mutant"]]
    clean = sum(r["success"] for r in sound)
    print(f"Rules: {_verdict(f'{clean}/{len(sound)}', clean == len(sound), config)} without discrepancies")
    if caught:
        print(f"Mutants: {sum(r['success'] for r in caught)}/{len(caught)} detected")
    totals = {"samples": 0, "agreed": 0, "unknown": 0, "vacuous": 0}
    for r in results:
        for k in totals:
            totals[k] += r.get("report", {}).get(k, 0)
    print(f"States: {totals}")
    print(f"Time: {elapsed/60:.1f} min")

    if errors:
        print(f"\nErrors ({len(errors)}):")
        for err in errors[:10]:
            label = f"mutant {err['key']}" if err["mutant"] else err["key"]
            print(f"  {label}: {err['error'][:60]}")
            for d in err.get("report", {}).get("discrepancies", [])[:1]:
                print(f"    {d['instance'][:100]}")
                print(f"    at {d['state']}: {d['left']} vs {d['right']}")
    print(f"\nCheckpoint: {checkpoint.checkpoint_path}")
    return EXIT_OK if report["success"] else EXIT_FAILED


def cmd_fmt(args: argparse.Namespace, config: Config) -> int:
    """Pretty-print a problem; normalizing its trace terms rewrites the file unless --stdout is given."""
    problem = _load_problem(args.file)
    if args.normalize_traces:
        problem = Problem(problem.decls, normalize_formula(problem.formula))
    rendered = render_problem(problem)
    if args.in_place or (args.normalize_traces and not args.stdout):
        Path(args.file).write_text(rendered)
        logger.info(f"Rewrote {args.file}")
    else:
        print(rendered, end="")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="Machine-readable output")
    common.add_argument("--color", action="store_true", help="Color verdicts in text output")
    common.add_argument("--seed", type=int, help="Random seed (default from config, else 0)")
    common.add_argument("--budget-values", help="Comma-separated rationals for random choices")
    common.add_argument("--budget-durations", help="Comma-separated nonnegative ODE durations")
    common.add_argument("--loop-depth", type=int, help="Loop unrolling bound of the oracle")
    common.add_argument("--smt-path", help="External SMT-LIB2 solver binary")
    common.add_argument("--timeout-ms", type=int, help="SMT timeout per query")
    common.add_argument("--config", help="Path of chp.toml")

    parser = argparse.ArgumentParser(prog="chp", description="dLCHP verification toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", parents=[common], help="Parse and pretty-print a file")
    p.add_argument("file")
    p.set_defaults(handler=cmd_parse)

    p = sub.add_parser("check", parents=[common], help="Static semantics and well-formedness")
    p.add_argument("file")
    p.add_argument("--allow-mu-write", action="store_true", help="Accept assignments to global time")
    p.set_defaults(handler=cmd_check)

    p = sub.add_parser("prove", parents=[common], help="Replay a proof script")
    p.add_argument("problem")
    p.add_argument("script")
    p.add_argument("--json-report", help="Write the proof report as JSON")
    p.set_defaults(handler=cmd_prove)

    p = sub.add_parser("repl", parents=[common], help="Interactive proof session")
    p.add_argument("problem")
    p.add_argument("--load", help="Replay this script before prompting")
    p.add_argument("--script", help="Save the session here on exit")
    p.set_defaults(handler=cmd_repl)

    p = sub.add_parser("oracle-test", parents=[common], help="Differential soundness suite")
    p.add_argument("--rules", default="all", help="'all' or comma-separated rule names")
    p.add_argument("--mutants", action="store_true", help="Also check that seeded mutants are caught")
    p.add_argument("--mutant-names", default="all", help="'all' or comma-separated mutant names")
    p.add_argument("--samples", type=int, default=DEFAULT_SAMPLES, help="Instances per rule")
    p.add_argument("--workers", type=int, default=os.cpu_count() or 4, help="Parallel workers")
    p.add_argument("--reset", action="store_true", help="Reset checkpoint")
    p.add_argument("--json-report", help="Write the suite report as JSON")
    p.add_argument("--dump-runs", metavar="PROGRAM", help="Print the run set of a .chp program as JSON")
    p.set_defaults(handler=cmd_oracle_test)

    p = sub.add_parser("fmt", parents=[common], help="Pretty-print a problem file")
    p.add_argument("file")
    p.add_argument("--normalize-traces", action="store_true", help="Normalize trace terms and rewrite the file")
    p.add_argument("--stdout", action="store_true", help="With --normalize-traces, print instead of rewriting")
    p.add_argument("--in-place", action="store_true", help="Rewrite the file")
    p.set_defaults(handler=cmd_fmt)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    load_dotenv()
    logging.basicConfig(
        level=getattr(logging, os.getenv("LOG_LEVEL", "INFO").upper(), logging.INFO),
        format="%(asctime)s - %(levelname)s - %(message)s",
    )
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = _config(args)
        return args.handler(args, config)
    except ChpError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
