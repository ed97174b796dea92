"""Conservative cleanup of specialized programs.

Only passes with an elementary answer-preservation argument live here:
unfolding the unique empty-stack fact into its callers, dropping
duplicate clauses, and pruning predicates unreachable from the entry
point.  Anything that changes arities or clause selection is out.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from .stratify import dependency_graph
from .terms import Clause, Compound, PredSym, Program, canonical_clause, pred_of

__all__ = ["DEFAULT_EPS", "OptReport", "fold_eps", "dedup_clauses",
           "remove_unreachable", "optimize"]

log = logging.getLogger(__name__)

DEFAULT_EPS = PredSym("q_eps", 0)


@dataclass
class OptReport:
    folded_eps_calls: int = 0
    removed_unreachable_preds: tuple[PredSym, ...] = field(default=())
    deduped_clauses: int = 0

    def as_json(self) -> dict:
        return {
            "folded_eps_calls": self.folded_eps_calls,
            "removed_unreachable_preds": [str(p) for p in self.removed_unreachable_preds],
            "deduped_clauses": self.deduped_clauses,
        }


def _fold_eps(program: Program, eps: PredSym) -> tuple[Program, int]:
    def is_eps_call(b) -> bool:
        return isinstance(b, Compound) and pred_of(b) == eps

    defs = [c for c in program.clauses if pred_of(c.head) == eps]
    refs = sum(1 for c in program.clauses for b in c.body if is_eps_call(b))
    if not defs:
        if refs:
            log.warning("%s referenced but has no clauses; fold skipped", eps)
        return program, 0
    if len(defs) > 1 or defs[0].body:
        log.warning("%s is not defined by a single unit clause; fold skipped", eps)
        return program, 0
    out: list[Clause] = []
    for c in program.clauses:
        if pred_of(c.head) == eps:
            continue  # the fact is dropped once nothing calls it
        out.append(Clause(c.head, tuple(b for b in c.body if not is_eps_call(b))))
    return Program(tuple(out)), refs


def fold_eps(program: Program, eps: PredSym = DEFAULT_EPS) -> Program:
    """Unfold the empty-stack fact: every body call to eps is removed and
    the fact itself dropped.  Safe only when eps is defined by exactly one
    unit clause; otherwise the program is returned unchanged (warning)."""
    return _fold_eps(program, eps)[0]


def dedup_clauses(program: Program) -> tuple[Program, int]:
    """Drop clauses that are variants of an earlier one."""
    seen: set[Clause] = set()
    out: list[Clause] = []
    for c in program.clauses:
        key = canonical_clause(c)
        if key in seen:
            continue
        seen.add(key)
        out.append(c)
    return Program(tuple(out)), len(program.clauses) - len(out)


def remove_unreachable(program: Program, entry: PredSym) -> Program:
    """Keep only clauses whose head predicate is reachable from entry."""
    graph = dependency_graph(program)
    reachable = {entry}
    frontier = [entry]
    while frontier:
        p = frontier.pop()
        for s in graph.successors(p):
            if s not in reachable:
                reachable.add(s)
                frontier.append(s)
    if entry not in program.defined_predicates():
        log.warning("entry predicate %s has no clauses; all clauses removed", entry)
    kept = tuple(c for c in program.clauses if pred_of(c.head) in reachable)
    return Program(kept)


def optimize(program: Program, entry: PredSym,
             eps: PredSym = DEFAULT_EPS) -> tuple[Program, OptReport]:
    """fold_eps, then clause dedup, then reachability pruning."""
    p1, folded = _fold_eps(program, eps)
    p2, dropped = dedup_clauses(p1)
    p3 = remove_unreachable(p2, entry)
    kept = {pred_of(c.head) for c in p3.clauses}
    removed: dict[PredSym, None] = {}
    for c in p2.clauses:
        hp = pred_of(c.head)
        if hp not in kept:
            removed.setdefault(hp)
    return p3, OptReport(folded, tuple(removed), dropped)
