"""LD-resolution interpreter: leftmost selection, textual clause order,
depth-first search over explicit goal and trail stacks.

The interpreter is the semantic reference point for every transformation
in this package: transformed programs must produce the same computed
answers, and the counters collected here (resolution steps, clause-head
attempts, resolvent length) are the cost model of the benchmark harness.
Recursion is kept off the host stack so that deep derivations are only
bounded by the configured limits, and so that backtracking cost and
resolvent growth stay observable.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional

from .terms import (
    Clause, Compound, FreshScope, PredSym, Program, Query, Subst, Term, Var,
    distinct_vars, pred_of, rename_apart, resolve, unify_in,
)

__all__ = ["RunStatus", "Limits", "Answer", "Metrics",
           "solve", "successful_derivation_length"]


class RunStatus(Enum):
    EXHAUSTED = "Exhausted"          # the full LD-tree was explored
    STEP_LIMIT = "StepLimit"
    SOLUTION_LIMIT = "SolutionLimit"
    DEPTH_LIMIT = "DepthLimit"


@dataclass(frozen=True)
class Limits:
    max_steps: int = 1_000_000
    max_solutions: int = 16
    max_goal_depth: int = 100_000

    def __post_init__(self) -> None:
        for field in ("max_steps", "max_solutions", "max_goal_depth"):
            if getattr(self, field) < 1:
                raise ValueError(f"{field} must be >= 1")


@dataclass(frozen=True)
class Answer:
    """Computed answer restricted to the query's variables."""

    bindings: Subst


@dataclass
class Metrics:
    resolution_steps: int = 0   # successful LD-resolution steps explored
    head_attempts: int = 0      # clause heads tried per selected atom, incl. failures
    max_goal_len: int = 0       # longest resolvent reached
    solutions: int = 0

    def as_json(self, status: RunStatus) -> dict:
        return {
            "resolution_steps": self.resolution_steps,
            "head_attempts": self.head_attempts,
            "max_goal_len": self.max_goal_len,
            "solutions": self.solutions,
            "status": status.value,
        }


class _Frame:
    __slots__ = ("goal", "clauses", "i", "mark")

    def __init__(self, goal: tuple[Term, ...], clauses: tuple[Clause, ...], mark: int):
        self.goal = goal
        self.clauses = clauses
        self.i = 0
        self.mark = mark


def _search(program: Program, query: Query, limits: Limits, occurs_check: bool,
            on_answer: Callable[[dict[Var, Term], int], bool],
            ) -> tuple[Metrics, RunStatus]:
    """Depth-first LD search; on_answer(bindings, depth) may stop the run."""
    index: dict[PredSym, list[Clause]] = {}
    for c in program.clauses:
        index.setdefault(pred_of(c.head), []).append(c)

    scope = FreshScope()
    bindings: dict[Var, Term] = {}
    trail: list[Var] = []
    m = Metrics()
    status = RunStatus.EXHAUSTED

    goal0 = tuple(query.atoms)
    m.max_goal_len = len(goal0)
    if not goal0:
        m.solutions = 1
        on_answer(bindings, 0)
        return m, status

    def frame_for(goal: tuple[Term, ...], mark: int) -> _Frame:
        first = goal[0]
        clauses = index.get(pred_of(first), ()) if isinstance(first, Compound) else ()
        return _Frame(goal, tuple(clauses), mark)

    stack = [frame_for(goal0, 0)]
    while stack:
        fr = stack[-1]
        while len(trail) > fr.mark:  # undo the previous alternative of this frame
            del bindings[trail.pop()]
        if fr.i >= len(fr.clauses):
            stack.pop()
            continue
        clause = fr.clauses[fr.i]
        fr.i += 1
        m.head_attempts += 1
        renamed = rename_apart(clause, scope)
        if not unify_in(bindings, fr.goal[0], renamed.head, occurs_check, trail):
            continue
        m.resolution_steps += 1
        new_goal = renamed.body + fr.goal[1:]
        if len(new_goal) > m.max_goal_len:
            m.max_goal_len = len(new_goal)
        if not new_goal:
            m.solutions += 1
            keep_going = on_answer(bindings, len(stack))
            if not keep_going or m.solutions >= limits.max_solutions:
                status = RunStatus.SOLUTION_LIMIT
                break
        else:
            if len(stack) >= limits.max_goal_depth:
                status = RunStatus.DEPTH_LIMIT
                break
            stack.append(frame_for(new_goal, len(trail)))
        if m.resolution_steps >= limits.max_steps:
            status = RunStatus.STEP_LIMIT
            break
    return m, status


def solve(program: Program, query: Query, limits: Limits = Limits(),
          occurs_check: bool = True) -> tuple[list[Answer], Metrics, RunStatus]:
    """All computed answers discoverable within limits, in depth-first
    textual-order discovery order, with cost metrics."""
    qvars = distinct_vars(*query.atoms)
    answers: list[Answer] = []

    def on_answer(bindings: dict[Var, Term], _depth: int) -> bool:
        memo: dict[Var, Term] = {}
        answers.append(Answer(Subst({v: resolve(bindings, v, memo) for v in qvars})))
        return True

    metrics, status = _search(program, query, limits, occurs_check, on_answer)
    return answers, metrics, status


def successful_derivation_length(program: Program, query: Query,
                                 limits: Limits = Limits(),
                                 occurs_check: bool = True) -> Optional[int]:
    """Length in LD-resolution steps of the first successful derivation in
    search order; None when no success is found within limits."""
    found: list[int] = []

    def on_answer(_bindings: dict[Var, Term], depth: int) -> bool:
        found.append(depth)
        return False

    _search(program, query, limits, occurs_check, on_answer)
    return found[0] if found else None
