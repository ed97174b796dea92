"""Worklist specialization of goal-stack programs.

Each goal stack is abstracted to its sequence of predicate symbols (the
call pattern) by replacing every argument with a fresh variable.  The
worklist unfolds each abstracted atom one resolution step against the
binarized program, collects the resultants, and enqueues the patterns of
their bodies; when the worklist empties, every surviving atom is renamed
to a flat predicate over the concatenated arguments, which eliminates
the continuation variables entirely.

Termination is certified only for stratifiable inputs (where pattern
length is capped by the resolvent-length bound); otherwise a budget
turns unbounded pattern growth into a diagnosis instead of a hang.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping, Optional, Sequence, Union

from .binarize import BinarizedProgram, binarize_query
from .stratify import Stratification, b_stratify, resolvent_length_bound
from .terms import (
    NIL, Clause, Compound, FreshScope, PredSym, Program, Query, Term, Var,
    apply_subst, canonical_clause, cons, is_closed_list, list_view, make_list,
    pred_of, rename_apart, rename_term_apart, unify, vars_of,
)

__all__ = [
    "CallPattern", "GeneralizedAtom", "Budget", "Success",
    "NontermDiagnosis", "NontermReason", "PdOutcome", "OpenContinuationError",
    "generalize", "unfold_depth1", "partial_deduce", "rename_atom",
    "build_rename_table", "continuations_closed",
    "check_closedness_independence", "detect_growth", "longest_growth_chain",
    "budget_for", "format_pattern",
]

CallPattern = tuple[PredSym, ...]


class OpenContinuationError(RuntimeError):
    """A goal-stack argument had a variable tail where a closed list is required."""


@dataclass(frozen=True)
class GeneralizedAtom:
    """Goal-stack atom with every argument position a distinct fresh variable."""

    atom: Compound
    pattern: CallPattern


@dataclass(frozen=True)
class Budget:
    """Worklist guard; max_iterations=None means unlimited."""

    max_pattern_len: int = 64
    max_iterations: Optional[int] = 10_000


class NontermReason(Enum):
    PATTERN_LENGTH_EXCEEDED = "PatternLengthExceeded"
    ITERATION_BUDGET = "IterationBudget"


@dataclass
class NontermDiagnosis:
    """Budget violation plus the longest chain of patterns in which each
    entry properly prefix-extends an earlier one (the signature of
    unbounded continuation growth)."""

    growing_chain: tuple[CallPattern, ...]
    budget: int
    reason: NontermReason
    history: tuple[CallPattern, ...] = ()


@dataclass
class Success:
    program: Program                       # renamed, continuation-free
    s_set: tuple[GeneralizedAtom, ...]     # specialization set, selection order
    renamed_query: Compound
    rename_table: dict[CallPattern, PredSym]
    pre_rename: Program                    # resultants before renaming
    iterations: int
    invariant_ok: bool                     # goal stacks stayed closed throughout
    closed_ok: bool
    independent_ok: bool
    warnings: tuple[str, ...] = ()


PdOutcome = Union[Success, NontermDiagnosis]


def format_pattern(pat: CallPattern) -> str:
    return "[" + ", ".join(str(ps) for ps in pat) + "]"


def goal_stack(atom: Compound) -> list[Compound]:
    """Goals of a closed goal-stack atom, in order."""
    if len(atom.args) != 1:
        raise OpenContinuationError(f"not a goal-stack atom: {atom!r}")
    elems, tail = list_view(atom.args[0])
    if tail != NIL:
        raise OpenContinuationError(f"open continuation tail in {atom!r}")
    goals: list[Compound] = []
    for e in elems:
        if not isinstance(e, Compound):
            raise OpenContinuationError(f"non-atom goal {e!r} in {atom!r}")
        goals.append(e)
    return goals


def generalize(atom: Compound) -> GeneralizedAtom:
    """Replace every argument of every stacked goal by a fresh, pairwise
    distinct variable; functors and stack spine are preserved, so the
    input is an instance of the result.  The empty stack is its own
    generalization."""
    goals = goal_stack(atom)
    fresh: list[Term] = []
    k = 0
    for g in goals:
        args = tuple(Var(f"X{k + j + 1}") for j in range(len(g.args)))
        k += len(g.args)
        fresh.append(Compound(g.functor, args))
    return GeneralizedAtom(
        Compound(atom.functor, (make_list(fresh),)),
        tuple(pred_of(g) for g in goals),
    )


def _unfold_indexed(bp: BinarizedProgram, ga: GeneralizedAtom, scope: FreshScope,
                    occurs_check: bool) -> list[tuple[int, Clause]]:
    out: list[tuple[int, Clause]] = []
    for idx, clause in enumerate(bp.program.clauses):
        renamed = rename_apart(clause, scope)
        s = unify(ga.atom, renamed.head, occurs_check)
        if s is None:
            continue
        head = apply_subst(s, ga.atom)
        assert isinstance(head, Compound)
        out.append((idx, Clause(head, tuple(apply_subst(s, b) for b in renamed.body))))
    return out


def unfold_depth1(bp: BinarizedProgram, ga: GeneralizedAtom,
                  scope: Optional[FreshScope] = None,
                  occurs_check: bool = True) -> list[Clause]:
    """One unfolding step: the resultants of ga against every matching
    clause of the binarized program, in clause order.  An empty result
    marks an always-failing pattern."""
    return [c for _, c in _unfold_indexed(bp, ga, scope or FreshScope(), occurs_check)]


def continuations_closed(clauses: Iterable[Clause] | Program,
                         cont_pred: PredSym) -> bool:
    """Every goal-stack argument in every head and body is a closed list."""
    if isinstance(clauses, Program):
        clauses = clauses.clauses
    for c in clauses:
        for atom in (c.head, *c.body):
            if isinstance(atom, Compound) and pred_of(atom) == cont_pred:
                if not is_closed_list(atom.args[0]):
                    return False
    return True


def instance_of(t: Term, general: Term) -> bool:
    """t == general under some substitution of general's variables only."""
    bind: dict[Var, Term] = {}
    stack = [(general, t)]
    while stack:
        g, u = stack.pop()
        if isinstance(g, Var):
            prev = bind.get(g)
            if prev is None:
                bind[g] = u
            elif prev != u:
                return False
            continue
        if isinstance(u, Var):
            return False
        if g.functor != u.functor or len(g.args) != len(u.args):
            return False
        stack.extend(zip(g.args, u.args))
    return True


def _closedness(clauses: Iterable[Clause], s: Sequence[GeneralizedAtom]) -> bool:
    for c in clauses:
        for b in c.body:
            hits = sum(1 for g in s if instance_of(b, g.atom))
            if hits != 1:
                return False
    return True


def _independence(s: Sequence[GeneralizedAtom], occurs_check: bool) -> bool:
    for i in range(len(s)):
        for j in range(i + 1, len(s)):
            scope = FreshScope()
            a = rename_term_apart(s[i].atom, scope)
            b = rename_term_apart(s[j].atom, scope)
            if unify(a, b, occurs_check) is not None:
                return False
    return True


def check_closedness_independence(prog: Iterable[Clause] | Program,
                                  s: Sequence[GeneralizedAtom],
                                  occurs_check: bool = True) -> bool:
    """True iff every body atom instantiates exactly one element of s and
    no two distinct elements of s unify."""
    clauses = prog.clauses if isinstance(prog, Program) else tuple(prog)
    return _closedness(clauses, s) and _independence(s, occurs_check)


def build_rename_table(patterns: Sequence[CallPattern],
                       reserved: Iterable[tuple[str, int]] = (),
                       cont_name: str = "q") -> dict[CallPattern, PredSym]:
    """Flat predicate per pattern: q_p1_..._pn over the concatenated
    arities, q_eps for the empty pattern.  The scheme can collide (names
    with underscores, or a source predicate of the same name); collisions
    get /2, /3, ... suffixes, recorded in the table."""
    used = set(reserved)
    table: dict[CallPattern, PredSym] = {}
    for pat in patterns:
        if pat in table:
            continue
        if pat:
            base = cont_name + "_" + "_".join(ps.name for ps in pat)
        else:
            base = cont_name + "_eps"
        arity = sum(ps.arity for ps in pat)
        name, k = base, 2
        while (name, arity) in used:
            name = f"{base}/{k}"
            k += 1
        used.add((name, arity))
        table[pat] = PredSym(name, arity)
    return table


def rename_atom(atom: Compound, table: Mapping[CallPattern, PredSym]) -> Compound:
    """q([p1(t...), ..., pn(t...)]) -> q_p1_..._pn(t..., ..., t...)."""
    goals = goal_stack(atom)
    pat: CallPattern = tuple(pred_of(g) for g in goals)
    ps = table.get(pat)
    if ps is None:
        raise KeyError(f"no renamed predicate for pattern {format_pattern(pat)}")
    return Compound(ps.name, tuple(a for g in goals for a in g.args))


def longest_growth_chain(history: Sequence[CallPattern]) -> list[CallPattern]:
    """Longest subsequence in which every pattern properly prefix-extends
    an earlier one.  History patterns are unique, so chaining on 'an
    earlier pattern' reduces to prefix lookups; ties prefer the longest
    prefix, which keeps the chain tight."""
    # predicate symbols interned as ints: the DP hashes a lot of prefixes
    sym_id: dict[PredSym, int] = {}
    coded: list[tuple[int, ...]] = []
    originals: dict[tuple[int, ...], CallPattern] = {}
    for p in history:
        code = tuple(sym_id.setdefault(ps, len(sym_id)) for ps in p)
        if code not in originals:
            originals[code] = p
            coded.append(code)
    dp: dict[tuple[int, ...], tuple[int, Optional[tuple[int, ...]]]] = {}
    for c in coded:
        best_len = 1
        best_prev: Optional[tuple[int, ...]] = None
        for cut in range(len(c) - 1, -1, -1):
            entry = dp.get(c[:cut])
            if entry is not None and entry[0] + 1 > best_len:
                best_len = entry[0] + 1
                best_prev = c[:cut]
        dp[c] = (best_len, best_prev)
    if not coded:
        return []
    end = max(coded, key=lambda c: dp[c][0])
    chain: list[CallPattern] = []
    cur: Optional[tuple[int, ...]] = end
    while cur is not None:
        chain.append(originals[cur])
        cur = dp[cur][1]
    return chain[::-1]


def detect_growth(history: Sequence[CallPattern],
                  bound: int) -> Optional[NontermDiagnosis]:
    """Diagnosis when some pattern outgrows the bound; absent otherwise."""
    hist = tuple(history)
    if not hist or max(len(p) for p in hist) <= bound:
        return None
    return NontermDiagnosis(tuple(longest_growth_chain(hist)), bound,
                            NontermReason.PATTERN_LENGTH_EXCEEDED, hist)


def budget_for(program: Program, query: Query,
               default: Budget = Budget()) -> Budget:
    """Unlimited iterations with the certified pattern-length bound when
    the program stratifies; the configured defaults otherwise."""
    verdict = b_stratify(program)
    if isinstance(verdict, Stratification):
        bound = resolvent_length_bound(program, verdict, len(query.atoms))
        return Budget(max_pattern_len=bound, max_iterations=None)
    return default


def _fresh_goal(ps: PredSym, scope: FreshScope) -> Compound:
    return Compound(ps.name,
                    tuple(Var("X", scope.fresh_index()) for _ in range(ps.arity)))


@dataclass(frozen=True)
class _ClausePlan:
    """Pre-analyzed binarized clause for the unfolding step.

    kind 'goal': head q([H|Cont]), body q([B1..Bm|Cont]) with a linear
    continuation variable; unfolding a generalized atom against it always
    succeeds, instantiating nothing but the stack spine, so resultants can
    be assembled directly.  kind 'terminator': q([]).  Anything else is
    'irregular' and goes through full unification.
    """

    idx: int
    kind: str
    head_goal: Optional[Compound] = None
    body_goals: tuple[Compound, ...] = ()
    body_preds: CallPattern = ()


def _plan_clauses(bp: BinarizedProgram) -> tuple[dict[Optional[PredSym], list[_ClausePlan]],
                                                 list[int]]:
    by_first: dict[Optional[PredSym], list[_ClausePlan]] = {}
    irregular: list[int] = []
    cont = bp.cont_pred
    for idx, clause in enumerate(bp.program.clauses):
        plan = _plan_one(idx, clause, cont)
        if plan is None:
            irregular.append(idx)
        elif plan.kind == "terminator":
            by_first.setdefault(None, []).append(plan)
        else:
            assert plan.head_goal is not None
            by_first.setdefault(pred_of(plan.head_goal), []).append(plan)
    return by_first, irregular


def _plan_one(idx: int, clause: Clause, cont: PredSym) -> Optional[_ClausePlan]:
    if pred_of(clause.head) != cont:
        return None
    arg = clause.head.args[0]
    if arg == NIL and not clause.body:
        return _ClausePlan(idx, "terminator")
    if not (isinstance(arg, Compound) and arg.functor == "." and len(arg.args) == 2):
        return None
    head_goal, cont_var = arg.args
    if not isinstance(head_goal, Compound) or not isinstance(cont_var, Var):
        return None
    if len(clause.body) != 1:
        return None
    body = clause.body[0]
    if not isinstance(body, Compound) or pred_of(body) != cont:
        return None
    body_goals, tail = list_view(body.args[0])
    if tail != cont_var or not all(isinstance(b, Compound) for b in body_goals):
        return None
    cont_occurrences = sum(1 for v in vars_of(clause.head) if v == cont_var)
    cont_occurrences += sum(1 for v in vars_of(body) if v == cont_var)
    if cont_occurrences != 2:  # linear continuation: once in head, once in body
        return None
    return _ClausePlan(idx, "goal", head_goal, tuple(body_goals),
                       tuple(pred_of(b) for b in body_goals))


def partial_deduce(bp: BinarizedProgram, query: Query,
                   budget: Budget = Budget(),
                   occurs_check: bool = True) -> PdOutcome:
    """Run the worklist to a renamed, continuation-free program, or stop
    with a growth diagnosis when the budget is violated.

    The worklist is FIFO and membership is keyed by call pattern, so the
    specialization set, resultants and rename table are reproducible
    bit-for-bit.  Duplicate resultants (variants) are dropped, first
    occurrence wins.  Patterns with no resultants stay in the set and
    yield a clause-less renamed predicate, preserving finite failure.
    """
    seed_atom = binarize_query(query, bp.cont_pred)
    seed = generalize(seed_atom)
    history: list[CallPattern] = [seed.pattern]
    if len(seed.pattern) > budget.max_pattern_len:
        diag = detect_growth(history, budget.max_pattern_len)
        assert diag is not None
        return diag

    # clause dedup key: resultants are variants iff their source clauses
    # are variants and their patterns coincide
    canon_ids: dict[Clause, int] = {}
    canon_id = [canon_ids.setdefault(canonical_clause(c), len(canon_ids))
                for c in bp.program.clauses]
    by_first, irregular = _plan_clauses(bp)
    cont_name = bp.cont_pred.name

    queue: deque[GeneralizedAtom] = deque([seed])
    seen: set[CallPattern] = {seed.pattern}
    s_list: list[GeneralizedAtom] = []
    prog: list[Clause] = []
    prog_keys: set[tuple[CallPattern, int]] = set()
    warnings: list[str] = []
    scope = FreshScope()
    iterations = 0
    invariant_ok = True

    def irregular_resultants(ga: GeneralizedAtom, idx: int) -> list[Clause]:
        renamed = rename_apart(bp.program.clauses[idx], scope)
        s = unify(ga.atom, renamed.head, occurs_check)
        if s is None:
            return []
        head = apply_subst(s, ga.atom)
        assert isinstance(head, Compound)
        return [Clause(head, tuple(apply_subst(s, b) for b in renamed.body))]

    # a produced entry is (clause index, resultant, children); each child is
    # (pattern, stack builder args) and the generalized stack is only built
    # when the pattern is new
    while queue:
        if budget.max_iterations is not None and iterations >= budget.max_iterations:
            return NontermDiagnosis(tuple(longest_growth_chain(history)),
                                    budget.max_iterations,
                                    NontermReason.ITERATION_BUDGET, tuple(history))
        iterations += 1
        ga = queue.popleft()
        s_index = len(s_list)
        s_list.append(ga)
        pattern = ga.pattern
        # resultants of the fast path inherit the spine of the dequeued
        # stack, so one closure check per iteration covers them all
        if not is_closed_list(ga.atom.args[0]):
            invariant_ok = False
        tail_pattern = pattern[1:] if pattern else ()
        rest = ga.atom.args[0].args[1] if pattern else NIL

        produced: list[tuple[int, Clause, list[tuple[CallPattern, object]]]] = []
        for plan in by_first.get(pattern[0] if pattern else None, []):
            if plan.kind == "terminator":
                produced.append((plan.idx, Clause(Compound(cont_name, (NIL,))), []))
                continue
            mapping: dict[Var, Var] = {}
            head_goal = rename_term_apart(plan.head_goal, scope, mapping)
            body_goals = tuple(rename_term_apart(b, scope, mapping)
                               for b in plan.body_goals)
            head = Compound(cont_name, (cons(head_goal, rest),))
            body = Compound(cont_name, (make_list(body_goals, rest),))
            resultant = Clause(head, (body,))
            child = (plan.body_preds + tail_pattern, (plan.body_preds, rest))
            produced.append((plan.idx, resultant, [child]))
        for idx in irregular:
            for resultant in irregular_resultants(ga, idx):
                if not continuations_closed((resultant,), bp.cont_pred):
                    invariant_ok = False
                children = [(tuple(pred_of(g) for g in goal_stack(b)), b)
                            for b in resultant.body if isinstance(b, Compound)]
                produced.append((idx, resultant, children))
        if irregular:
            produced.sort(key=lambda triple: triple[0])

        if not produced:
            warnings.append(f"pattern {format_pattern(pattern)} has no "
                            "resultants; calls of this shape fail finitely")
        for idx, resultant, children in produced:
            key = (s_index, canon_id[idx])
            if key in prog_keys:
                continue
            prog_keys.add(key)
            prog.append(resultant)
            for child_pattern, ingredients in children:
                before = len(seen)
                seen.add(child_pattern)
                if len(seen) == before:
                    continue
                history.append(child_pattern)
                if len(child_pattern) > budget.max_pattern_len:
                    diag = detect_growth(history, budget.max_pattern_len)
                    assert diag is not None
                    return diag
                if isinstance(ingredients, tuple):
                    body_preds, child_rest = ingredients
                    stack = make_list([_fresh_goal(ps, scope) for ps in body_preds],
                                      child_rest)
                    child_atom = Compound(cont_name, (stack,))
                else:
                    child_atom = generalize(ingredients).atom
                queue.append(GeneralizedAtom(child_atom, child_pattern))

    reserved = {(ps.name, ps.arity) for ps in bp.origin.predicates()}
    table = build_rename_table([ga.pattern for ga in s_list], reserved,
                               bp.cont_pred.name)
    renamed_clauses = tuple(
        Clause(rename_atom(c.head, table),
               tuple(rename_atom(b, table) for b in c.body
                     if isinstance(b, Compound)))
        for c in prog
    )
    return Success(
        program=Program(renamed_clauses),
        s_set=tuple(s_list),
        renamed_query=rename_atom(seed_atom, table),
        rename_table=table,
        pre_rename=Program(tuple(prog)),
        iterations=iterations,
        invariant_ok=invariant_ok,
        closed_ok=_closedness(prog, s_list),
        independent_ok=_independence(s_list, occurs_check),
        warnings=tuple(warnings),
    )
