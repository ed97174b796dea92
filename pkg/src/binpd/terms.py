"""Symbolic core for definite logic programs.

Terms are immutable: a term is either a variable or a compound (functor
plus argument tuple).  Constants are 0-ary compounds, integers are
opaque constants, and lists are built from the binary functor ``'.'``
with the constant ``[]`` as terminator.  Substitutions are idempotent
finite maps from variables to terms.
"""

from __future__ import annotations

from collections.abc import Mapping as MappingABC
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Optional, Sequence, Union

__all__ = [
    "Var", "Compound", "Term", "PredSym", "Clause", "Program", "Query",
    "Subst", "FreshScope",
    "NIL", "cons", "make_list", "list_view", "is_closed_list",
    "pred_of", "vars_of", "distinct_vars",
    "apply_subst", "compose", "resolve",
    "walk", "occurs_in", "unify_in", "unify",
    "variant_eq", "clause_variant_eq", "canonical_term", "canonical_clause",
    "rename_term_apart", "rename_apart",
]


@dataclass(frozen=True)
class Var:
    """A logic variable; (name, index) is unique within a freshness scope."""

    name: str
    index: int = 0

    def __post_init__(self) -> None:
        # hashed constantly in binding maps; cache the value
        object.__setattr__(self, "_hash", hash((self.name, self.index)))

    def __hash__(self) -> int:
        return self._hash  # type: ignore[attr-defined]

    def __repr__(self) -> str:
        return self.name if self.index == 0 else f"{self.name}#{self.index}"


@dataclass(frozen=True)
class Compound:
    """Functor applied to arguments.  A constant is a 0-ary compound."""

    functor: str
    args: tuple["Term", ...] = ()

    def __post_init__(self) -> None:
        if not self.functor:
            raise ValueError("functor must be a non-empty string")

    def __repr__(self) -> str:
        if not self.args:
            return self.functor
        return f"{self.functor}({', '.join(map(repr, self.args))})"


Term = Union[Var, Compound]

NIL = Compound("[]")


def cons(head: Term, tail: Term) -> Compound:
    return Compound(".", (head, tail))


def make_list(items: Sequence[Term], tail: Term = NIL) -> Term:
    out = tail
    for item in reversed(items):
        out = cons(item, out)
    return out


def list_view(t: Term) -> tuple[list[Term], Term]:
    """Split a cons chain into (elements, tail); tail is NIL for closed lists."""
    elems: list[Term] = []
    while isinstance(t, Compound) and t.functor == "." and len(t.args) == 2:
        elems.append(t.args[0])
        t = t.args[1]
    return elems, t


def is_closed_list(t: Term) -> bool:
    while isinstance(t, Compound) and t.functor == "." and len(t.args) == 2:
        t = t.args[1]
    return t == NIL


@dataclass(frozen=True)
class PredSym:
    """Predicate symbol; equality is by (name, arity)."""

    name: str
    arity: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "_hash", hash((self.name, self.arity)))

    def __hash__(self) -> int:
        return self._hash  # type: ignore[attr-defined]

    def __repr__(self) -> str:
        return f"{self.name}/{self.arity}"


def pred_of(atom: Term) -> PredSym:
    if not isinstance(atom, Compound):
        raise TypeError(f"not a callable atom: {atom!r}")
    return PredSym(atom.functor, len(atom.args))


@dataclass(frozen=True)
class Clause:
    """``head :- body``; an empty body makes a unit clause."""

    head: Compound
    body: tuple[Term, ...] = ()

    def __post_init__(self) -> None:
        if not isinstance(self.head, Compound):
            raise TypeError("clause head must be a compound term")

    @property
    def is_unit(self) -> bool:
        return not self.body

    @property
    def is_binary(self) -> bool:
        return len(self.body) <= 1


@dataclass(frozen=True)
class Program:
    """Ordered clause list; textual order is significant for LD search."""

    clauses: tuple[Clause, ...] = ()

    def __iter__(self) -> Iterator[Clause]:
        return iter(self.clauses)

    def __len__(self) -> int:
        return len(self.clauses)

    def predicates(self) -> list[PredSym]:
        """All predicate symbols of heads and body atoms, first-occurrence order."""
        seen: dict[PredSym, None] = {}
        for c in self.clauses:
            seen.setdefault(pred_of(c.head))
            for b in c.body:
                if isinstance(b, Compound):
                    seen.setdefault(pred_of(b))
        return list(seen)

    def defined_predicates(self) -> set[PredSym]:
        return {pred_of(c.head) for c in self.clauses}


@dataclass(frozen=True)
class Query:
    """Ordered atom sequence; the empty query is the trivially true goal."""

    atoms: tuple[Term, ...] = ()

    def __iter__(self) -> Iterator[Term]:
        return iter(self.atoms)

    def __len__(self) -> int:
        return len(self.atoms)


def vars_of(t: Term) -> Iterator[Var]:
    """Variables of t, left-to-right, with repeats."""
    stack = [t]
    while stack:
        u = stack.pop()
        if isinstance(u, Var):
            yield u
        else:
            stack.extend(reversed(u.args))


def distinct_vars(*terms: Term) -> list[Var]:
    seen: dict[Var, None] = {}
    for t in terms:
        for v in vars_of(t):
            seen.setdefault(v)
    return list(seen)


def resolve(bindings: Mapping[Var, Term], t: Term,
            _memo: Optional[dict[Var, Term]] = None) -> Term:
    """Fully substitute bindings into t (deep walk).

    Cycle-safe: a self-referential binding, which only unification with
    the occurs check disabled can produce, is left shallow instead of
    looping.
    """
    memo: dict[Var, Term] = _memo if _memo is not None else {}
    path: set[Var] = set()

    def go(u: Term) -> Term:
        if isinstance(u, Var):
            r = bindings.get(u)
            if r is None:
                return u
            if u in memo:
                return memo[u]
            if u in path:
                return u
            path.add(u)
            out = go(r)
            path.discard(u)
            memo[u] = out
            return out
        if not u.args:
            return u
        return Compound(u.functor, tuple(go(a) for a in u.args))

    return go(t)


class Subst(MappingABC):
    """Idempotent substitution.

    Bindings are resolved against each other at construction, so applying
    a substitution twice equals applying it once, and no variable maps to
    itself.  (A cyclic input binding is kept shallow; see resolve.)
    """

    __slots__ = ("_bind",)

    def __init__(self, bindings: Mapping[Var, Term] | Iterable[tuple[Var, Term]] = ()):
        raw = dict(bindings)
        memo: dict[Var, Term] = {}
        bind: dict[Var, Term] = {}
        for v in raw:
            t = resolve(raw, v, memo)
            if t != v:
                bind[v] = t
        self._bind = bind

    def __getitem__(self, v: Var) -> Term:
        return self._bind[v]

    def __iter__(self) -> Iterator[Var]:
        return iter(self._bind)

    def __len__(self) -> int:
        return len(self._bind)

    def __repr__(self) -> str:
        inner = ", ".join(f"{v!r} -> {t!r}" for v, t in self._bind.items())
        return "{" + inner + "}"


def apply_subst(s: Mapping[Var, Term], t: Term) -> Term:
    """Simultaneous single-pass replacement of bound variables in t."""
    if isinstance(t, Var):
        return s.get(t, t)
    if not s or not t.args:
        return t
    return Compound(t.functor, tuple(apply_subst(s, a) for a in t.args))


def compose(s1: Mapping[Var, Term], s2: Mapping[Var, Term]) -> Subst:
    """Substitution composition: apply(compose(s1, s2), t) == apply(s2, apply(s1, t))."""
    out: dict[Var, Term] = {v: apply_subst(s2, t) for v, t in s1.items()}
    for v, t in s2.items():
        out.setdefault(v, t)
    return Subst(out)


def walk(bindings: Mapping[Var, Term], t: Term) -> Term:
    """Follow variable bindings until an unbound variable or a compound."""
    while isinstance(t, Var):
        nxt = bindings.get(t)
        if nxt is None:
            return t
        t = nxt
    return t


def occurs_in(bindings: Mapping[Var, Term], v: Var, t: Term) -> bool:
    stack = [t]
    while stack:
        u = walk(bindings, stack.pop())
        if isinstance(u, Var):
            if u == v:
                return True
        else:
            stack.extend(u.args)
    return False


def unify_in(bindings: dict[Var, Term], a: Term, b: Term,
             occurs_check: bool = True, trail: Optional[list[Var]] = None) -> bool:
    """Destructively extend bindings with an mgu of a and b.

    On failure, bindings may hold partial entries; callers that need to
    backtrack pass a trail and undo to their own mark.
    """
    stack = [(a, b)]
    while stack:
        x, y = stack.pop()
        x = walk(bindings, x)
        y = walk(bindings, y)
        if x is y:
            continue
        if isinstance(x, Var):
            if isinstance(y, Var) and x == y:
                continue
            if occurs_check and occurs_in(bindings, x, y):
                return False
            bindings[x] = y
            if trail is not None:
                trail.append(x)
        elif isinstance(y, Var):
            if occurs_check and occurs_in(bindings, y, x):
                return False
            bindings[y] = x
            if trail is not None:
                trail.append(y)
        else:
            if x.functor != y.functor or len(x.args) != len(y.args):
                return False
            stack.extend(zip(x.args, y.args))
    return True


def unify(t1: Term, t2: Term, occurs_check: bool = True) -> Optional[Subst]:
    """Most general unifier of t1 and t2, or None when not unifiable."""
    bindings: dict[Var, Term] = {}
    if not unify_in(bindings, t1, t2, occurs_check):
        return None
    return Subst(bindings)


def canonical_term(t: Term, _mapping: Optional[dict[Var, Var]] = None) -> Term:
    """Rename variables to a canonical numbering by first occurrence."""
    m = _mapping if _mapping is not None else {}

    def go(u: Term) -> Term:
        if isinstance(u, Var):
            r = m.get(u)
            if r is None:
                r = Var("_V", len(m) + 1)
                m[u] = r
            return r
        if not u.args:
            return u
        return Compound(u.functor, tuple(go(a) for a in u.args))

    return go(t)


def canonical_clause(c: Clause) -> Clause:
    m: dict[Var, Var] = {}
    head = canonical_term(c.head, m)
    assert isinstance(head, Compound)
    return Clause(head, tuple(canonical_term(b, m) for b in c.body))


def variant_eq(t1: Term, t2: Term) -> bool:
    """True iff a variable-to-variable bijection maps t1 onto t2."""
    return canonical_term(t1) == canonical_term(t2)


def clause_variant_eq(c1: Clause, c2: Clause) -> bool:
    return canonical_clause(c1) == canonical_clause(c2)


class FreshScope:
    """Monotone index source; owns variable freshness for one engine run."""

    __slots__ = ("_next",)

    def __init__(self, start: int = 1):
        self._next = start

    def fresh_index(self) -> int:
        i = self._next
        self._next += 1
        return i

    def fresh(self, name: str = "_F") -> Var:
        return Var(name, self.fresh_index())


def rename_term_apart(t: Term, scope: FreshScope,
                      _mapping: Optional[dict[Var, Var]] = None) -> Term:
    m = _mapping if _mapping is not None else {}

    def go(u: Term) -> Term:
        if isinstance(u, Var):
            r = m.get(u)
            if r is None:
                r = Var(u.name, scope.fresh_index())
                m[u] = r
            return r
        if not u.args:
            return u
        return Compound(u.functor, tuple(go(a) for a in u.args))

    return go(t)


def rename_apart(c: Clause, scope: FreshScope) -> Clause:
    """Variant of c whose variables are fresh in scope."""
    m: dict[Var, Var] = {}
    head = rename_term_apart(c.head, scope, m)
    assert isinstance(head, Compound)
    return Clause(head, tuple(rename_term_apart(b, scope, m) for b in c.body))
