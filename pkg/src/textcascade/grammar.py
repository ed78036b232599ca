"""Small regular-expression engine over arbitrary item predicates.

Grammar productions in the rule file compile through this module: an
expression like ``(determiner | quantifier)* adjective* noun`` becomes an
NFA whose arcs test named predicates against sequence items.  Longest
match wins; recursion between named productions is rejected so grammars
stay finite-state.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Sequence

Predicate = Callable[[object], bool]


class GrammarError(ValueError):
    pass


# -- expression AST ---------------------------------------------------------

@dataclass(frozen=True)
class Atom:
    name: str
    literal: bool = False


@dataclass(frozen=True)
class Seq:
    parts: tuple


@dataclass(frozen=True)
class Alt:
    options: tuple


@dataclass(frozen=True)
class Rep:
    inner: object
    min: int
    max: int | None  # None = unbounded


_TOKEN = re.compile(r'"[^"]*"|[A-Za-z][\w\-]*|[()|?*+]')


def parse_expr(text: str) -> object:
    tokens = _TOKEN.findall(text)
    if "".join(tokens).replace('"', "") != re.sub(r"[\s]", "", text).replace('"', ""):
        pass  # stray characters surface as parse failures below
    pos = 0

    def peek():
        return tokens[pos] if pos < len(tokens) else None

    def take():
        nonlocal pos
        tok = tokens[pos]
        pos += 1
        return tok

    def alternation():
        options = [sequence()]
        while peek() == "|":
            take()
            options.append(sequence())
        return options[0] if len(options) == 1 else Alt(tuple(options))

    def sequence():
        parts = []
        while peek() not in (None, ")", "|"):
            parts.append(repetition())
        if not parts:
            raise GrammarError(f"empty alternative in {text!r}")
        return parts[0] if len(parts) == 1 else Seq(tuple(parts))

    def repetition():
        item = primary()
        while peek() in ("?", "*", "+"):
            mark = take()
            if mark == "?":
                item = Rep(item, 0, 1)
            elif mark == "*":
                item = Rep(item, 0, None)
            else:
                item = Rep(item, 1, None)
        return item

    def primary():
        tok = peek()
        if tok is None:
            raise GrammarError(f"unexpected end of expression in {text!r}")
        if tok == "(":
            take()
            inner = alternation()
            if peek() != ")":
                raise GrammarError(f"missing ')' in {text!r}")
            take()
            return inner
        if tok in (")", "|", "?", "*", "+"):
            raise GrammarError(f"unexpected {tok!r} in {text!r}")
        take()
        if tok.startswith('"'):
            return Atom(tok[1:-1], literal=True)
        return Atom(tok)

    expr = alternation()
    if pos != len(tokens):
        raise GrammarError(f"trailing tokens in {text!r}")
    return expr


def inline(expr: object, definitions: dict[str, object], stack: tuple = ()) -> object:
    """Substitute named sub-productions; cycles are an error."""
    if isinstance(expr, Atom):
        if not expr.literal and expr.name in definitions:
            if expr.name in stack:
                raise GrammarError(f"recursive production {expr.name!r}")
            return inline(definitions[expr.name], definitions, stack + (expr.name,))
        return expr
    if isinstance(expr, Seq):
        return Seq(tuple(inline(p, definitions, stack) for p in expr.parts))
    if isinstance(expr, Alt):
        return Alt(tuple(inline(o, definitions, stack) for o in expr.options))
    if isinstance(expr, Rep):
        return Rep(inline(expr.inner, definitions, stack), expr.min, expr.max)
    raise GrammarError(f"bad expression node {expr!r}")


# -- Thompson construction + simulation -------------------------------------

class Machine:
    """NFA with predicate arcs.  match() returns the longest accepted length."""

    def __init__(self, expr: object, resolve: Callable[[str, bool], Predicate]):
        self.arcs: list[list[tuple[int, int]]] = [[]]  # state -> [(pred_id, next)]
        self.eps: list[list[int]] = [[]]
        self.preds: list[Predicate] = []
        self._pred_ids: dict[tuple[str, bool], int] = {}
        self._resolve = resolve
        start = self._new_state()
        self.start = start
        self.accept = self._build(expr, start)

    def _new_state(self) -> int:
        self.arcs.append([])
        self.eps.append([])
        return len(self.arcs) - 1

    def _pred(self, atom: Atom) -> int:
        key = (atom.name, atom.literal)
        if key not in self._pred_ids:
            self.preds.append(self._resolve(atom.name, atom.literal))
            self._pred_ids[key] = len(self.preds) - 1
        return self._pred_ids[key]

    def _build(self, expr: object, frm: int) -> int:
        if isinstance(expr, Atom):
            to = self._new_state()
            self.arcs[frm].append((self._pred(expr), to))
            return to
        if isinstance(expr, Seq):
            cur = frm
            for part in expr.parts:
                cur = self._build(part, cur)
            return cur
        if isinstance(expr, Alt):
            out = self._new_state()
            for option in expr.options:
                end = self._build(option, frm)
                self.eps[end].append(out)
            return out
        if isinstance(expr, Rep):
            cur = frm
            for _ in range(expr.min):
                cur = self._build(expr.inner, cur)
            if expr.max is None:
                loop_in = self._new_state()
                self.eps[cur].append(loop_in)
                body_end = self._build(expr.inner, loop_in)
                self.eps[body_end].append(loop_in)
                return loop_in
            out = self._new_state()
            self.eps[cur].append(out)
            for _ in range(expr.max - expr.min):
                cur = self._build(expr.inner, cur)
                self.eps[cur].append(out)
            return out
        raise GrammarError(f"bad expression node {expr!r}")

    def _closure(self, states: set[int]) -> set[int]:
        todo = list(states)
        seen = set(states)
        while todo:
            s = todo.pop()
            for nxt in self.eps[s]:
                if nxt not in seen:
                    seen.add(nxt)
                    todo.append(nxt)
        return seen

    def match(self, items: Sequence, start: int = 0) -> int:
        """Length of the longest match of items[start:]; 0 when none."""
        current = self._closure({self.start})
        best = 0
        i = start
        while current and i < len(items):
            item = items[i]
            nxt: set[int] = set()
            fired: dict[int, bool] = {}
            for s in current:
                for pred_id, to in self.arcs[s]:
                    ok = fired.get(pred_id)
                    if ok is None:
                        ok = fired[pred_id] = bool(self.preds[pred_id](item))
                    if ok:
                        nxt.add(to)
            current = self._closure(nxt)
            i += 1
            if self.accept in current:
                best = i - start
        return best
