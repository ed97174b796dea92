"""Command-line surface.

Exit codes: 0 success; 1 not stratifiable under ``check --strict``;
2 the transform stopped with a non-termination diagnosis; 3 parse error;
4 verification mismatch.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import Optional

from .binarize import binarize_program
from .engine import Limits, solve
from .pd import Budget, NontermDiagnosis, Success, budget_for, format_pattern
from .stratify import (Stratification, all_violations, b_stratify,
                       resolvent_length_bound)
from .syntax import (PrologSyntaxError, parse_program, parse_query, print_clause,
                     print_program, print_term)
from .terms import Program, Query
from .verify import (bench, default_corpus_dir, load_corpus, run_transform,
                     verify_pipeline)

__all__ = ["main", "entry"]

EXIT_OK = 0
EXIT_NOT_STRATIFIABLE = 1
EXIT_NONTERMINATION = 2
EXIT_PARSE_ERROR = 3
EXIT_VERIFY_MISMATCH = 4


def _read_program(path: str) -> Program:
    return parse_program(Path(path).read_text()).program


def _limits(args: argparse.Namespace) -> Limits:
    return Limits(max_steps=args.max_steps, max_solutions=args.max_solutions,
                  max_goal_depth=args.max_goal_depth)


def _budget(program: Program, query: Query, args: argparse.Namespace) -> Budget:
    budget = budget_for(program, query)
    if args.max_pattern_len is not None:
        budget = replace(budget, max_pattern_len=args.max_pattern_len)
    if args.max_iterations is not None:
        budget = replace(budget, max_iterations=args.max_iterations)
    return budget


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _violation_json(program: Program, v) -> dict:
    return {
        "clause_index": v.clause_index,
        "clause": print_clause(program.clauses[v.clause_index]),
        "culprit_positions": list(v.culprit_positions),
        "reason": v.reason.value,
    }


def _cmd_check(args: argparse.Namespace) -> int:
    program = _read_program(args.input)
    verdict = b_stratify(program)
    stratifiable = isinstance(verdict, Stratification)
    if stratifiable:
        n = verdict.stratum_count
        m = max((len(c.body) for c in program.clauses), default=0) or 1
        payload = {
            "b_stratifiable": True,
            "strata": {str(p): k for p, k in sorted(
                verdict.stratum_of.items(), key=lambda kv: (kv[1], str(kv[0])))},
            "violation": None,
            "bound_formula": {"n": n, "m": m,
                              "bound_query_len_1": resolvent_length_bound(program, verdict, 1)},
        }
    else:
        payload = {
            "b_stratifiable": False,
            "strata": None,
            "violation": _violation_json(program, verdict),
            "bound_formula": None,
        }
    if args.all_violations:
        payload["all_violations"] = [_violation_json(program, v)
                                     for v in all_violations(program)]
    if args.json:
        print(json.dumps(payload, indent=2))
    elif stratifiable:
        print("b_stratifiable: yes")
        for name, k in payload["strata"].items():
            print(f"  stratum {k}: {name}")
    else:
        v = payload["violation"]
        print("b_stratifiable: no")
        print(f"  clause {v['clause_index']}: {v['clause']}")
        print(f"  {v['reason']} at body positions {v['culprit_positions']}")
    if args.strict and not stratifiable:
        return EXIT_NOT_STRATIFIABLE
    return EXIT_OK


def _cmd_binarize(args: argparse.Namespace) -> int:
    program = _read_program(args.input)
    bp = binarize_program(program)
    _emit(print_program(bp.program), args.output)
    return EXIT_OK


def _cmd_transform(args: argparse.Namespace) -> int:
    program = _read_program(args.input)
    query = parse_query(args.query)
    budget = _budget(program, query, args)
    result = run_transform(program, query, budget, do_optimize=args.optimize)
    outcome = result.outcome
    report: dict = {"budget": {"max_pattern_len": budget.max_pattern_len,
                               "max_iterations": budget.max_iterations}}
    if isinstance(outcome, NontermDiagnosis):
        report.update({
            "status": "nontermination",
            "reason": outcome.reason.value,
            "budget_hit": outcome.budget,
            "growing_chain": [[str(ps) for ps in pat] for pat in outcome.growing_chain],
            "patterns_seen": len(outcome.history),
        })
        if args.report:
            Path(args.report).write_text(json.dumps(report, indent=2))
        print("transform stopped: likely non-terminating specialization", file=sys.stderr)
        print(f"  reason: {outcome.reason.value} (budget {outcome.budget})", file=sys.stderr)
        for pat in outcome.growing_chain[:4]:
            print(f"  {format_pattern(pat)}", file=sys.stderr)
        return EXIT_NONTERMINATION
    assert isinstance(outcome, Success)
    assert result.final_program is not None
    _emit(print_program(result.final_program), args.output)
    if args.report:
        report.update({
            "status": "success",
            "query": print_term(outcome.renamed_query),
            "s_patterns": [[str(ps) for ps in ga.pattern] for ga in outcome.s_set],
            "rename_table": {format_pattern(pat): str(ps)
                             for pat, ps in outcome.rename_table.items()},
            "iterations": outcome.iterations,
            "invariant_ok": outcome.invariant_ok,
            "closed_ok": outcome.closed_ok,
            "independent_ok": outcome.independent_ok,
            "warnings": list(outcome.warnings),
            "optimization": result.opt_report.as_json() if result.opt_report else None,
        })
        Path(args.report).write_text(json.dumps(report, indent=2))
    return EXIT_OK


def _cmd_run(args: argparse.Namespace) -> int:
    program = _read_program(args.input)
    query = parse_query(args.query)
    answers, metrics, status = solve(program, query, _limits(args),
                                     occurs_check=not args.no_occurs_check)
    if args.json:
        payload = {
            "answers": [{v.name: print_term(t) for v, t in a.bindings.items()}
                        for a in answers],
            "metrics": metrics.as_json(status),
        }
        print(json.dumps(payload, indent=2))
        return EXIT_OK
    for a in answers:
        if not a.bindings:
            print("true.")
        else:
            print(", ".join(f"{v.name} = {print_term(t)}"
                            for v, t in a.bindings.items()) + ".")
    if not answers:
        print("false.")
    print(f"% {json.dumps(metrics.as_json(status))}", file=sys.stderr)
    return EXIT_OK


def _cmd_verify(args: argparse.Namespace) -> int:
    limits = _limits(args)
    occurs = not args.no_occurs_check
    reports = []
    if args.corpus or not args.input:
        entries = load_corpus(args.corpus or default_corpus_dir())
        for e in entries:
            rep = verify_pipeline(e.program, e.query, limits, occurs)
            reports.append((f"{e.program_id}:{e.query_id}", rep))
    else:
        program = _read_program(args.input)
        query = parse_query(args.query)
        reports.append((args.input, verify_pipeline(program, query, limits, occurs)))
    if args.json:
        print(json.dumps({name: rep.as_json() for name, rep in reports}, indent=2))
    else:
        for name, rep in reports:
            verdict = "ok" if rep.ok else "MISMATCH"
            extra = ""
            if rep.diagnosis is not None:
                extra = f" (transform stopped: {rep.diagnosis.reason.value})"
            print(f"{name}: {verdict}{extra}")
    if any(not rep.ok for _, rep in reports):
        return EXIT_VERIFY_MISMATCH
    return EXIT_OK


def _cmd_bench(args: argparse.Namespace) -> int:
    entries = load_corpus(args.corpus or default_corpus_dir())
    rows = bench([(e.program, e.query) for e in entries], _limits(args),
                 occurs_check=not args.no_occurs_check,
                 ids=[(e.program_id, e.query_id) for e in entries],
                 jobs=args.jobs)
    if args.json:
        print(json.dumps([r.as_json() for r in rows], indent=2))
        return EXIT_OK
    header = f"{'query':<24} {'orig steps':>10} {'bin ratio':>9} {'spec ratio':>10}  note"
    print(header)
    print("-" * len(header))
    for r in rows:
        orig = (r.metrics.get("original") or {}).get("resolution_steps", "-")
        bin_r = (r.ratios.get("binarized_over_original") or {}).get("resolution_steps")
        tr_r = (r.ratios.get("transformed_over_original") or {}).get("resolution_steps")
        fmt = lambda x: f"{x:.2f}" if isinstance(x, float) else "-"
        print(f"{r.query_id:<24} {orig:>10} {fmt(bin_r):>9} {fmt(tr_r):>10}  {r.note}")
    return EXIT_OK


def _add_limit_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--max-steps", type=int, default=1_000_000)
    p.add_argument("--max-solutions", type=int, default=16)
    p.add_argument("--max-goal-depth", type=int, default=100_000)
    p.add_argument("--no-occurs-check", action="store_true",
                   help="disable the occurs check (faster, unsound on cyclic cases)")


def _build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="binpd",
        description="Binarization and depth-1 partial deduction for definite "
                    "logic programs.")
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="decide stratifiability and report strata")
    p.add_argument("input")
    p.add_argument("--json", action="store_true")
    p.add_argument("--strict", action="store_true",
                   help="exit 1 when the program is not stratifiable")
    p.add_argument("--all-violations", action="store_true")
    p.set_defaults(func=_cmd_check)

    p = sub.add_parser("binarize", help="write the goal-stack form of a program")
    p.add_argument("input")
    p.add_argument("-o", "--output")
    p.set_defaults(func=_cmd_binarize)

    p = sub.add_parser("transform",
                       help="binarize then specialize away the continuations")
    p.add_argument("input")
    p.add_argument("--query", required=True)
    p.add_argument("-o", "--output")
    p.add_argument("--report", help="write a JSON report to this path")
    p.add_argument("--optimize", action="store_true",
                   help="fold the empty-stack fact and prune unreachable clauses")
    p.add_argument("--max-pattern-len", type=int, default=None)
    p.add_argument("--max-iterations", type=int, default=None)
    p.set_defaults(func=_cmd_transform)

    p = sub.add_parser("run", help="run a query under the LD interpreter")
    p.add_argument("input")
    p.add_argument("--query", required=True)
    p.add_argument("--json", action="store_true")
    _add_limit_flags(p)
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("verify",
                       help="check answer equality across the three stages")
    p.add_argument("input", nargs="?")
    p.add_argument("--query", default="")
    p.add_argument("--corpus", help="directory of name.pl / name.queries pairs")
    p.add_argument("--json", action="store_true")
    _add_limit_flags(p)
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("bench", help="step-count comparison over a corpus")
    p.add_argument("--corpus", help="defaults to $BINPD_CORPUS or the packaged corpus")
    p.add_argument("--json", action="store_true")
    p.add_argument("--jobs", type=int, default=1)
    _add_limit_flags(p)
    p.set_defaults(func=_cmd_bench)

    return top


def main(argv: Optional[list[str]] = None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.WARNING,
                        format="%(levelname)s: %(message)s")
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except PrologSyntaxError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE_ERROR
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE_ERROR


def entry() -> None:
    raise SystemExit(main())
