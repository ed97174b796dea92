"""Call-graph stratification analysis.

A program stratifies when its predicates can be layered so that clause
bodies only call downward, and each clause makes at most one call into
its head's own layer, in the rightmost body position.  The canonical
witness built here uses the strongly connected components of the
dependency graph, ordered by height in the condensation: the finest
layering compatible with the downward-call condition, so a failure of
the rightmost-call condition on it rules out every other layering.

The analysis also yields a bound on resolvent length during LD search,
``n*(m-1) + l`` for n strata, maximum body length m and query length l,
which doubles as the certified pattern-length budget of the
specialization worklist.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Mapping, Union

from .terms import Compound, PredSym, Program, pred_of

__all__ = [
    "DependencyGraph", "Stratification", "Violation", "ViolationReason",
    "dependency_graph", "strongly_connected_components",
    "b_stratify", "all_violations", "validate_stratification",
    "resolvent_length_bound",
]

log = logging.getLogger(__name__)


@dataclass
class DependencyGraph:
    """Head-to-body predicate edges, each witnessed by clause occurrences."""

    nodes: tuple[PredSym, ...]
    edges: dict[tuple[PredSym, PredSym], tuple[tuple[int, int], ...]]
    adjacency: dict[PredSym, tuple[PredSym, ...]]

    def successors(self, p: PredSym) -> tuple[PredSym, ...]:
        return self.adjacency.get(p, ())


def dependency_graph(program: Program) -> DependencyGraph:
    nodes: dict[PredSym, None] = {}
    edges: dict[tuple[PredSym, PredSym], list[tuple[int, int]]] = {}
    adj: dict[PredSym, dict[PredSym, None]] = {}
    for ci, c in enumerate(program.clauses):
        hp = pred_of(c.head)
        nodes.setdefault(hp)
        adj.setdefault(hp, {})
        for bi, b in enumerate(c.body):
            if not isinstance(b, Compound):
                continue
            bp = pred_of(b)
            nodes.setdefault(bp)
            adj.setdefault(bp, {})
            edges.setdefault((hp, bp), []).append((ci, bi))
            adj[hp].setdefault(bp)
    return DependencyGraph(
        tuple(nodes),
        {k: tuple(v) for k, v in edges.items()},
        {p: tuple(s) for p, s in adj.items()},
    )


def strongly_connected_components(graph: DependencyGraph) -> list[tuple[PredSym, ...]]:
    """Tarjan's algorithm, iterative; components come out callee-first."""
    index: dict[PredSym, int] = {}
    low: dict[PredSym, int] = {}
    onstack: set[PredSym] = set()
    stack: list[PredSym] = []
    out: list[tuple[PredSym, ...]] = []
    counter = 0

    for root in graph.nodes:
        if root in index:
            continue
        work: list[list] = [[root, 0]]
        while work:
            v, pi = work[-1]
            if pi == 0:
                index[v] = low[v] = counter
                counter += 1
                stack.append(v)
                onstack.add(v)
            descended = False
            succs = graph.adjacency.get(v, ())
            while pi < len(succs):
                w = succs[pi]
                pi += 1
                work[-1][1] = pi
                if w not in index:
                    work.append([w, 0])
                    descended = True
                    break
                if w in onstack:
                    low[v] = min(low[v], index[w])
            if descended:
                continue
            work.pop()
            if work:
                u = work[-1][0]
                low[u] = min(low[u], low[v])
            if low[v] == index[v]:
                comp: list[PredSym] = []
                while True:
                    w = stack.pop()
                    onstack.discard(w)
                    comp.append(w)
                    if w == v:
                        break
                out.append(tuple(comp))
    return out


@dataclass(frozen=True, eq=True)
class Stratification:
    """Witness layering: stratum_of maps predicates to 0-based layers,
    0 being the callee-most."""

    stratum_of: Mapping[PredSym, int]
    stratum_count: int


class ViolationReason(Enum):
    MULTIPLE_SAME_STRATUM = "MultipleSameStratum"
    NON_RIGHTMOST = "NonRightmost"


@dataclass(frozen=True)
class Violation:
    clause_index: int
    culprit_positions: tuple[int, ...]
    reason: ViolationReason


def _component_heights(graph: DependencyGraph,
                       comps: list[tuple[PredSym, ...]]) -> dict[PredSym, int]:
    comp_of = {p: i for i, comp in enumerate(comps) for p in comp}
    height: dict[int, int] = {}
    # Tarjan emission order guarantees callees are already assigned.
    for i, comp in enumerate(comps):
        callees = {comp_of[w] for v in comp for w in graph.adjacency.get(v, ())
                   if comp_of[w] != i}
        height[i] = 1 + max((height[j] for j in callees), default=-1)
    return {p: height[comp_of[p]] for p in graph.nodes}


def _violations(program: Program, comp_of: Mapping[PredSym, int]) -> list[Violation]:
    out: list[Violation] = []
    for ci, c in enumerate(program.clauses):
        hc = comp_of[pred_of(c.head)]
        positions = tuple(
            bi for bi, b in enumerate(c.body)
            if isinstance(b, Compound) and comp_of[pred_of(b)] == hc
        )
        if len(positions) >= 2:
            out.append(Violation(ci, positions, ViolationReason.MULTIPLE_SAME_STRATUM))
        elif positions and positions[0] != len(c.body) - 1:
            out.append(Violation(ci, positions, ViolationReason.NON_RIGHTMOST))
    return out


def b_stratify(program: Program) -> Union[Stratification, Violation]:
    """The canonical stratification, or the first violation in textual order.

    Undefined predicates (called but never defined) land in the bottom
    stratum with a warning.
    """
    graph = dependency_graph(program)
    comps = strongly_connected_components(graph)
    comp_of = {p: i for i, comp in enumerate(comps) for p in comp}
    found = _violations(program, comp_of)
    if found:
        return found[0]
    undefined = [p for p in graph.nodes if p not in program.defined_predicates()]
    if undefined:
        log.warning("undefined predicates assigned the bottom stratum: %s",
                    ", ".join(map(str, undefined)))
    stratum_of = _component_heights(graph, comps)
    count = max(stratum_of.values()) + 1 if stratum_of else 0
    return Stratification(stratum_of, count)


def all_violations(program: Program) -> list[Violation]:
    graph = dependency_graph(program)
    comps = strongly_connected_components(graph)
    comp_of = {p: i for i, comp in enumerate(comps) for p in comp}
    return _violations(program, comp_of)


def validate_stratification(program: Program, s: Stratification) -> bool:
    """Re-check both layering conditions directly against the clause list.

    Deliberately independent of the graph machinery in b_stratify so the
    two can cross-check each other.
    """
    st = s.stratum_of
    for c in program.clauses:
        hs = st.get(pred_of(c.head))
        if hs is None:
            return False
        same: list[int] = []
        for bi, b in enumerate(c.body):
            if not isinstance(b, Compound):
                return False
            bs = st.get(pred_of(b))
            if bs is None or bs > hs:  # body call may not go upward
                return False
            if bs == hs:
                same.append(bi)
        if len(same) > 1:
            return False
        if same and same[0] != len(c.body) - 1:  # own-layer call must be rightmost
            return False
    return True


def resolvent_length_bound(program: Program, s: Stratification,
                           query_len: int) -> int:
    """n*(m-1) + l: a cap on resolvent length during any LD derivation of a
    stratifiable program, and on worklist pattern length."""
    m = max((len(c.body) for c in program.clauses), default=0)
    if m < 1:
        m = 1
    return s.stratum_count * (m - 1) + query_len
