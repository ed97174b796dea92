"""Goal-stack reification.

Every clause of the source program becomes a binary clause over one
fresh unary predicate whose argument is the list of goals remaining to
be executed, threaded through a single continuation variable:

    h :- b1, ..., bn.    ==>    q([h|Cont]) :- q([b1,...,bn|Cont]).
    h.                   ==>    q([h|Cont]) :- q(Cont).

A terminator clause ``q([]).`` closes successful derivations.  Goal
stacks are ordinary list terms, so the output parses and prints like
any other program.
"""

from __future__ import annotations

from dataclasses import dataclass

from .terms import (
    NIL, Clause, Compound, PredSym, Program, Query, Term, Var,
    cons, distinct_vars, make_list,
)

__all__ = [
    "BinarizedProgram", "fresh_cont_pred", "binarize_clause",
    "terminator_clause", "binarize_program", "binarize_query",
    "is_binary_program",
]


@dataclass(frozen=True)
class BinarizedProgram:
    program: Program
    cont_pred: PredSym
    origin: Program


def _used_functors(program: Program) -> set[tuple[str, int]]:
    used: set[tuple[str, int]] = set()
    stack: list[Term] = []
    for c in program.clauses:
        stack.append(c.head)
        stack.extend(c.body)
    while stack:
        t = stack.pop()
        if isinstance(t, Compound):
            used.add((t.functor, len(t.args)))
            stack.extend(t.args)
    return used


def fresh_cont_pred(program: Program) -> PredSym:
    """q/1 when unused anywhere in the program, else q1/1, q2/1, ..."""
    used = _used_functors(program)
    if ("q", 1) not in used:
        return PredSym("q", 1)
    i = 1
    while (f"q{i}", 1) in used:
        i += 1
    return PredSym(f"q{i}", 1)


def _cont_var(clause: Clause) -> Var:
    names = {v.name for v in distinct_vars(clause.head, *clause.body)}
    name = "Cont"
    i = 0
    while name in names:
        i += 1
        name = f"Cont{i}"
    return Var(name)


def binarize_clause(clause: Clause, cont_pred: PredSym) -> Clause:
    cont = _cont_var(clause)
    head = Compound(cont_pred.name, (cons(clause.head, cont),))
    body = Compound(cont_pred.name, (make_list(clause.body, cont),))
    return Clause(head, (body,))


def terminator_clause(cont_pred: PredSym) -> Clause:
    return Clause(Compound(cont_pred.name, (NIL,)))


def binarize_program(program: Program) -> BinarizedProgram:
    """Clause-wise reification in source order, terminator last."""
    q = fresh_cont_pred(program)
    clauses = tuple(binarize_clause(c, q) for c in program.clauses)
    return BinarizedProgram(Program(clauses + (terminator_clause(q),)), q, program)


def binarize_query(query: Query, cont_pred: PredSym) -> Compound:
    """Single goal-stack atom wrapping the query's atoms (closed list)."""
    return Compound(cont_pred.name, (make_list(tuple(query.atoms)),))


def is_binary_program(program: Program) -> bool:
    return all(c.is_binary for c in program.clauses)
