"""Reader and printer for the definite-clause subset.

The grammar is operator-free: a source unit is a sequence of clauses
``h.`` / ``h :- b1, ..., bn.`` and directives ``?- g1, ..., gn.``.
Terms are variables (uppercase or ``_``), non-negative integers, atoms
(lowercase or quoted), compounds, and list sugar ``[a, b | T]``.
``%`` starts a line comment.  Cut, disjunction, negation and arithmetic
operators are rejected as reserved constructs so that the accepted
programs stay inside the pure definite fragment.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Mapping, NoReturn, Optional

from .terms import (
    NIL, Clause, Compound, Program, Query, Term, Var,
    distinct_vars, list_view, make_list,
)

__all__ = [
    "SourceUnit", "PrologSyntaxError", "ReservedConstructError",
    "parse_program", "parse_query",
    "print_term", "print_clause", "print_program", "print_query",
]


class PrologSyntaxError(ValueError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"line {line}, column {col}: {message}")
        self.message = message
        self.line = line
        self.col = col


class ReservedConstructError(PrologSyntaxError):
    def __init__(self, construct: str, line: int, col: int):
        super().__init__(
            f"reserved construct {construct!r}: cut, disjunction, negation and "
            "arithmetic are outside the accepted subset", line, col)
        self.construct = construct


@dataclass(frozen=True)
class SourceUnit:
    """A parsed file: the program plus any ``?-`` query directives."""

    program: Program
    queries: tuple[Query, ...] = ()


# ---------------------------------------------------------------------------
# tokenizer

@dataclass(frozen=True)
class _Token:
    kind: str  # ATOM QATOM VAR INT PUNCT SYM EOF
    text: str
    line: int
    col: int


_TOKEN_RE = re.compile(
    r"""(?P<ws>\s+)
      | (?P<comment>%[^\n]*)
      | (?P<var>[A-Z_][A-Za-z0-9_]*)
      | (?P<atom>[a-z][A-Za-z0-9_]*)
      | (?P<int>\d+)
      | (?P<qatom>'(?:\\.|''|[^'\\])*')
      | (?P<punct>[()\[\],|])
      | (?P<sym>[\\!;:?.&@\#$^~<>=+*/-]+)
    """,
    re.VERBOSE,
)

_STRUCTURAL_SYMS = {".", ":-", "?-"}


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    pos = 0
    line = 1
    col = 1
    n = len(text)
    while pos < n:
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            ch = text[pos]
            if ch == "'":
                raise PrologSyntaxError("unterminated quoted atom", line, col)
            raise PrologSyntaxError(f"unexpected character {ch!r}", line, col)
        kind = m.lastgroup
        lexeme = m.group()
        if kind not in ("ws", "comment"):
            tokens.append(_Token(kind.upper(), lexeme, line, col))
        newlines = lexeme.count("\n")
        if newlines:
            line += newlines
            col = len(lexeme) - lexeme.rfind("\n")
        else:
            col += len(lexeme)
        pos = m.end()
    tokens.append(_Token("EOF", "", line, col))
    return tokens


def _unquote(raw: str, line: int, col: int) -> str:
    body = raw[1:-1]
    out: list[str] = []
    i = 0
    escapes = {"\\": "\\", "'": "'", "n": "\n", "t": "\t"}
    while i < len(body):
        ch = body[i]
        if ch == "'":  # doubled quote
            out.append("'")
            i += 2
        elif ch == "\\":
            if i + 1 >= len(body):
                raise PrologSyntaxError("dangling escape in quoted atom", line, col)
            out.append(escapes.get(body[i + 1], body[i + 1]))
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


# ---------------------------------------------------------------------------
# parser

class _Parser:
    def __init__(self, tokens: list[_Token]):
        self.toks = tokens
        self.i = 0
        self._anon = 0

    def peek(self) -> _Token:
        return self.toks[self.i]

    def advance(self) -> _Token:
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def error(self, message: str, tok: Optional[_Token] = None) -> NoReturn:
        tok = tok or self.peek()
        raise PrologSyntaxError(message, tok.line, tok.col)

    def reserved(self, tok: _Token) -> NoReturn:
        raise ReservedConstructError(tok.text, tok.line, tok.col)

    def expect(self, kind: str, text: str) -> _Token:
        tok = self.peek()
        if tok.kind != kind or tok.text != text:
            self.error(f"expected {text!r}, got {tok.text!r}" if tok.kind != "EOF"
                       else f"expected {text!r}, got end of input")
        return self.advance()

    # after a term inside a sequence, anything operator-like is a reserved
    # construct rather than a plain syntax error
    def guard_after_term(self) -> None:
        tok = self.peek()
        if tok.kind == "SYM" and tok.text not in _STRUCTURAL_SYMS:
            self.reserved(tok)
        if tok.kind == "ATOM" and tok.text == "is":
            self.reserved(tok)

    def source(self) -> SourceUnit:
        clauses: list[Clause] = []
        queries: list[Query] = []
        while self.peek().kind != "EOF":
            tok = self.peek()
            if tok.kind == "SYM" and tok.text == "?-":
                self.advance()
                atoms = self.term_sequence()
                self.expect("SYM", ".")
                queries.append(Query(tuple(self._checked_goal(a, tok) for a in atoms)))
            else:
                clauses.append(self.clause())
        return SourceUnit(Program(tuple(clauses)), tuple(queries))

    def clause(self) -> Clause:
        start = self.peek()
        head = self.term()
        self.guard_after_term()
        tok = self.peek()
        if tok.kind == "SYM" and tok.text == ".":
            self.advance()
            return Clause(self._checked_head(head, start))
        if tok.kind == "SYM" and tok.text == ":-":
            self.advance()
            body = self.term_sequence()
            self.expect("SYM", ".")
            return Clause(self._checked_head(head, start),
                          tuple(self._checked_goal(b, start) for b in body))
        self.error(f"expected ':-' or '.' after clause head, got {tok.text!r}", tok)

    def term_sequence(self) -> list[Term]:
        out = [self.term()]
        self.guard_after_term()
        while self.peek().kind == "PUNCT" and self.peek().text == ",":
            self.advance()
            out.append(self.term())
            self.guard_after_term()
        return out

    def term(self) -> Term:
        tok = self.peek()
        if tok.kind == "VAR":
            self.advance()
            if tok.text == "_":
                self._anon += 1
                return Var(f"_G{self._anon}")
            return Var(tok.text)
        if tok.kind == "INT":
            self.advance()
            return Compound(tok.text)
        if tok.kind in ("ATOM", "QATOM"):
            self.advance()
            name = tok.text if tok.kind == "ATOM" else _unquote(tok.text, tok.line, tok.col)
            if self.peek().kind == "PUNCT" and self.peek().text == "(":
                self.advance()
                args = self.term_sequence()
                self.expect("PUNCT", ")")
                return Compound(name, tuple(args))
            return Compound(name)
        if tok.kind == "PUNCT" and tok.text == "[":
            self.advance()
            return self.list_rest(tok)
        if tok.kind == "SYM":
            if tok.text in _STRUCTURAL_SYMS:
                self.error(f"unexpected {tok.text!r}", tok)
            self.reserved(tok)
        self.error("expected a term" if tok.kind != "EOF"
                   else "unexpected end of input", tok)

    def list_rest(self, open_tok: _Token) -> Term:
        if self.peek().kind == "PUNCT" and self.peek().text == "]":
            self.advance()
            return NIL
        items = [self.term()]
        self.guard_after_term()
        while self.peek().kind == "PUNCT" and self.peek().text == ",":
            self.advance()
            items.append(self.term())
            self.guard_after_term()
        tail: Term = NIL
        if self.peek().kind == "PUNCT" and self.peek().text == "|":
            self.advance()
            tail = self.term()
            self.guard_after_term()
        self.expect("PUNCT", "]")
        return make_list(items, tail)

    def _checked_head(self, t: Term, tok: _Token) -> Compound:
        if isinstance(t, Var):
            self.error("clause head cannot be a variable", tok)
        if t.functor.isdigit():
            self.error("an integer cannot be used as a predicate", tok)
        return t

    def _checked_goal(self, t: Term, tok: _Token) -> Term:
        if isinstance(t, Var):
            self.error("a variable cannot appear as a goal", tok)
        if t.functor.isdigit():
            self.error("an integer cannot appear as a goal", tok)
        return t

    def expect_eof(self) -> None:
        tok = self.peek()
        if tok.kind != "EOF":
            if tok.kind == "SYM" and tok.text not in _STRUCTURAL_SYMS:
                self.reserved(tok)
            self.error(f"unexpected {tok.text!r}", tok)


def parse_program(text: str) -> SourceUnit:
    """Parse a source unit; clause and body order is preserved."""
    return _Parser(_tokenize(text)).source()


def parse_query(text: str) -> Query:
    """Parse an atom sequence such as ``a, b(X)`` (trailing '.' optional)."""
    p = _Parser(_tokenize(text))
    if p.peek().kind == "EOF":
        return Query(())
    if p.peek().kind == "SYM" and p.peek().text == "?-":
        p.advance()
    atoms = p.term_sequence()
    if p.peek().kind == "SYM" and p.peek().text == ".":
        p.advance()
    p.expect_eof()
    start = p.toks[0]
    return Query(tuple(p._checked_goal(a, start) for a in atoms))


# ---------------------------------------------------------------------------
# printer

_UNQUOTED_RE = re.compile(r"[a-z][A-Za-z0-9_]*\Z")
_INT_RE = re.compile(r"\d+\Z")


def _atom_text(name: str) -> str:
    if _UNQUOTED_RE.match(name) or _INT_RE.match(name):
        return name
    return "'" + name.replace("\\", "\\\\").replace("'", "''") + "'"


def _name_map(vs: list[Var]) -> dict[Var, str]:
    # Stored names are kept when unambiguous; otherwise the whole unit is
    # renamed X1, X2, ... in order of first occurrence.
    names = [v.name for v in vs]
    if len(set(names)) == len(names):
        return {v: v.name for v in vs}
    return {v: f"X{i}" for i, v in enumerate(vs, start=1)}


def _term_str(t: Term, names: Mapping[Var, str]) -> str:
    if isinstance(t, Var):
        got = names.get(t)
        if got is not None:
            return got
        return t.name if t.index == 0 else f"{t.name}{t.index}"
    if t.functor == "." and len(t.args) == 2:
        elems, tail = list_view(t)
        inner = ",".join(_term_str(e, names) for e in elems)
        if tail == NIL:
            return f"[{inner}]"
        return f"[{inner}|{_term_str(tail, names)}]"
    if not t.args:
        return "[]" if t.functor == "[]" else _atom_text(t.functor)
    args = ",".join(_term_str(a, names) for a in t.args)
    return f"{_atom_text(t.functor)}({args})"


def print_term(t: Term, names: Optional[Mapping[Var, str]] = None) -> str:
    if names is None:
        names = _name_map(distinct_vars(t))
    return _term_str(t, names)


def print_clause(c: Clause) -> str:
    names = _name_map(distinct_vars(c.head, *c.body))
    head = _term_str(c.head, names)
    if not c.body:
        return head + "."
    return head + " :- " + ", ".join(_term_str(b, names) for b in c.body) + "."


def print_program(p: Program) -> str:
    """Canonical text; re-parsing yields a structurally identical program."""
    if not p.clauses:
        return ""
    return "\n".join(print_clause(c) for c in p.clauses) + "\n"


def print_query(q: Query) -> str:
    names = _name_map(distinct_vars(*q.atoms))
    return ", ".join(_term_str(a, names) for a in q.atoms) + "."
