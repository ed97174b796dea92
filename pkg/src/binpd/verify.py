"""End-to-end equivalence checks and the step-count benchmark harness.

Three stages are compared per program/query pair: the source program,
its goal-stack (binarized) form, and the specialized continuation-free
form when the worklist succeeds.  All three stage queries carry the
source query's variables, so computed answers are compared as multisets
of instantiated source queries, up to variable renaming.  Wall-clock
time is never part of any check here; the cost model is the
interpreter's own counters.
"""

from __future__ import annotations

import os
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

from .binarize import BinarizedProgram, binarize_program, binarize_query
from .engine import Answer, Limits, Metrics, RunStatus, solve
from .pd import Budget, NontermDiagnosis, PdOutcome, Success, budget_for, partial_deduce
from .postopt import DEFAULT_EPS, OptReport, optimize
from .syntax import parse_program, parse_query
from .terms import Compound, Program, Query, apply_subst, canonical_term, pred_of

__all__ = [
    "StageRun", "EquivalenceReport", "BenchRow", "CorpusEntry", "TransformResult",
    "answers_equal_mod_renaming", "verify_pipeline", "bench", "bench_pair",
    "run_transform", "load_corpus", "default_corpus_dir",
]

STAGES = ("original", "binarized", "transformed")


@dataclass
class StageRun:
    label: str
    program: Program
    query: Query
    answers: list[Answer]
    metrics: Metrics
    status: RunStatus

    def metrics_json(self) -> dict:
        return self.metrics.as_json(self.status)


def answers_equal_mod_renaming(answers1: Sequence[Answer], answers2: Sequence[Answer],
                               q1: Query, q2: Query) -> bool:
    """Multiset equality of the query instances {q1*theta} and {q2*sigma}
    up to variable renaming; order-insensitive, duplicates significant."""
    def keys(answers: Sequence[Answer], q: Query) -> Counter:
        shape = Compound("$query", tuple(q.atoms)) if q.atoms else Compound("$query")
        return Counter(canonical_term(apply_subst(a.bindings, shape)) for a in answers)

    return keys(answers1, q1) == keys(answers2, q2)


@dataclass
class EquivalenceReport:
    original: StageRun
    binarized: StageRun
    transformed: Optional[StageRun]
    diagnosis: Optional[NontermDiagnosis]
    answers_equal: dict[str, Optional[bool]]  # None = not comparable

    @property
    def mismatch(self) -> bool:
        return any(v is False for v in self.answers_equal.values())

    @property
    def ok(self) -> bool:
        return not self.mismatch

    def as_json(self) -> dict:
        stages = {
            "original": self.original.metrics_json(),
            "binarized": self.binarized.metrics_json(),
            "transformed": self.transformed.metrics_json() if self.transformed else None,
        }
        return {
            "stages": stages,
            "answer_counts": {
                "original": len(self.original.answers),
                "binarized": len(self.binarized.answers),
                "transformed": len(self.transformed.answers) if self.transformed else None,
            },
            "answers_equal": dict(self.answers_equal),
            "diagnosis": _diagnosis_json(self.diagnosis),
            "ok": self.ok,
        }


def _diagnosis_json(d: Optional[NontermDiagnosis]) -> Optional[dict]:
    if d is None:
        return None
    return {
        "reason": d.reason.value,
        "budget": d.budget,
        "growing_chain": [[str(ps) for ps in pat] for pat in d.growing_chain],
    }


def _stage(label: str, program: Program, query: Query, limits: Limits,
           occurs_check: bool) -> StageRun:
    answers, metrics, status = solve(program, query, limits, occurs_check)
    return StageRun(label, program, query, answers, metrics, status)


def _compare(s1: StageRun, s2: StageRun, source_query: Query) -> Optional[bool]:
    # asserted only when both runs explored their full trees; stage queries
    # share the source query's variables, so instances line up
    if s1.status is not RunStatus.EXHAUSTED or s2.status is not RunStatus.EXHAUSTED:
        return None
    return answers_equal_mod_renaming(s1.answers, s2.answers, source_query, source_query)


def verify_pipeline(program: Program, query: Query, limits: Limits = Limits(),
                    occurs_check: bool = True,
                    budget: Optional[Budget] = None) -> EquivalenceReport:
    """Run all three stages and demand pairwise answer equality."""
    original = _stage("original", program, query, limits, occurs_check)
    bp = binarize_program(program)
    bquery = Query((binarize_query(query, bp.cont_pred),))
    binarized = _stage("binarized", bp.program, bquery, limits, occurs_check)

    outcome = partial_deduce(bp, query, budget or budget_for(program, query),
                             occurs_check)
    transformed: Optional[StageRun] = None
    diagnosis: Optional[NontermDiagnosis] = None
    if isinstance(outcome, Success):
        transformed = _stage("transformed", outcome.program,
                             Query((outcome.renamed_query,)), limits, occurs_check)
    else:
        diagnosis = outcome

    equal: dict[str, Optional[bool]] = {
        "original_vs_binarized": _compare(original, binarized, query),
        "original_vs_transformed": (_compare(original, transformed, query)
                                    if transformed else None),
        "binarized_vs_transformed": (_compare(binarized, transformed, query)
                                     if transformed else None),
    }
    return EquivalenceReport(original, binarized, transformed, diagnosis, equal)


@dataclass
class TransformResult:
    binarized: BinarizedProgram
    outcome: PdOutcome
    final_program: Optional[Program]  # renamed output, cleaned when requested
    opt_report: Optional[OptReport]


def run_transform(program: Program, query: Query, budget: Optional[Budget] = None,
                  do_optimize: bool = False, occurs_check: bool = True,
                  ) -> TransformResult:
    """The one canonical composition: binarize, specialize, optional cleanup."""
    bp = binarize_program(program)
    outcome = partial_deduce(bp, query, budget or budget_for(program, query),
                             occurs_check)
    if isinstance(outcome, NontermDiagnosis):
        return TransformResult(bp, outcome, None, None)
    final = outcome.program
    report: Optional[OptReport] = None
    if do_optimize:
        eps = outcome.rename_table.get((), DEFAULT_EPS)
        final, report = optimize(final, pred_of(outcome.renamed_query), eps)
    return TransformResult(bp, outcome, final, report)


# ---------------------------------------------------------------------------
# benchmark harness

_RATIO_FIELDS = ("resolution_steps", "head_attempts", "max_goal_len")


@dataclass
class BenchRow:
    program_id: str
    query_id: str
    statuses: dict[str, Optional[str]]
    metrics: dict[str, Optional[dict]]
    ratios: dict[str, Optional[dict[str, Optional[float]]]]
    answers_equal: dict[str, Optional[bool]]
    note: str = ""

    def as_json(self) -> dict:
        return {
            "program_id": self.program_id,
            "query_id": self.query_id,
            "statuses": self.statuses,
            "metrics": self.metrics,
            "ratios": self.ratios,
            "answers_equal": self.answers_equal,
            "note": self.note,
        }


def _comparable(a: StageRun, b: StageRun) -> bool:
    if a.status is RunStatus.EXHAUSTED and b.status is RunStatus.EXHAUSTED:
        return True
    return (a.status is RunStatus.SOLUTION_LIMIT
            and b.status is RunStatus.SOLUTION_LIMIT
            and a.metrics.solutions == b.metrics.solutions)


def _ratio_block(base: StageRun, other: Optional[StageRun],
                 ) -> Optional[dict[str, Optional[float]]]:
    if other is None or not _comparable(base, other):
        return None
    out: dict[str, Optional[float]] = {}
    for f in _RATIO_FIELDS:
        denom = getattr(base.metrics, f)
        num = getattr(other.metrics, f)
        out[f] = (num / denom) if denom else None
    return out


def bench_pair(program: Program, query: Query, limits: Limits = Limits(),
               occurs_check: bool = True, program_id: str = "?",
               query_id: str = "?") -> BenchRow:
    rep = verify_pipeline(program, query, limits, occurs_check)
    stages = {"original": rep.original, "binarized": rep.binarized,
              "transformed": rep.transformed}
    note = ""
    if rep.diagnosis is not None:
        note = f"transform stopped: {rep.diagnosis.reason.value}"
    elif rep.mismatch:
        note = "answer mismatch"
    return BenchRow(
        program_id=program_id,
        query_id=query_id,
        statuses={k: (s.status.value if s else None) for k, s in stages.items()},
        metrics={k: (s.metrics_json() if s else None) for k, s in stages.items()},
        ratios={
            "binarized_over_original": _ratio_block(rep.original, rep.binarized),
            "transformed_over_original": _ratio_block(rep.original, rep.transformed),
        },
        answers_equal=dict(rep.answers_equal),
        note=note,
    )


def _bench_star(args) -> BenchRow:
    program, query, limits, occurs_check, pid, qid = args
    try:
        return bench_pair(program, query, limits, occurs_check, pid, qid)
    except Exception as exc:  # per-row failures recorded, run continues
        return BenchRow(pid, qid, {}, {}, {}, {}, note=f"error: {exc}")


def bench(pairs: Sequence[tuple[Program, Query]], limits: Limits = Limits(),
          occurs_check: bool = True, ids: Optional[Sequence[tuple[str, str]]] = None,
          jobs: int = 1) -> list[BenchRow]:
    """One row per (program, query) pair; row order follows input order."""
    if ids is None:
        ids = [(f"p{i}", f"q{i}") for i in range(len(pairs))]
    work = [(p, q, limits, occurs_check, pid, qid)
            for (p, q), (pid, qid) in zip(pairs, ids)]
    if jobs <= 1:
        return [_bench_star(w) for w in work]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_bench_star, work))


# ---------------------------------------------------------------------------
# corpus

@dataclass(frozen=True)
class CorpusEntry:
    program_id: str
    query_id: str
    program: Program
    query: Query


def default_corpus_dir() -> Path:
    env = os.environ.get("BINPD_CORPUS")
    if env:
        return Path(env)
    return Path(__file__).resolve().parent / "corpus"


def load_corpus(path: Optional[os.PathLike | str] = None) -> list[CorpusEntry]:
    """Each program ``name.pl`` pairs with sibling ``name.queries``, one
    query per line (% comments and blank lines skipped)."""
    root = Path(path) if path is not None else default_corpus_dir()
    entries: list[CorpusEntry] = []
    for pl in sorted(root.glob("*.pl")):
        unit = parse_program(pl.read_text())
        queries: list[Query] = list(unit.queries)
        qfile = pl.with_suffix(".queries")
        if qfile.exists():
            for line in qfile.read_text().splitlines():
                line = line.strip()
                if not line or line.startswith("%"):
                    continue
                queries.append(parse_query(line))
        for i, q in enumerate(queries):
            entries.append(CorpusEntry(pl.stem, f"{pl.stem}#{i}", unit.program, q))
    return entries
