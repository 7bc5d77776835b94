"""Nested regular expressions: syntax, evaluation, certain answers."""

from __future__ import annotations

import re
from dataclasses import dataclass

from .model import ConstLit, Diagnostic, Iri, SourceLocation, TypedGraph, Value


class Nre:
    __slots__ = ()

    @property
    def is_forward(self) -> bool:
        return all(c.is_forward for c in self.children()) and not isinstance(self, Inv)

    def children(self) -> tuple["Nre", ...]:
        return ()

    def depth(self) -> int:
        return 1 + max((c.depth() for c in self.children()), default=0)


@dataclass(frozen=True)
class Eps(Nre):
    def __str__(self):
        return "()"


@dataclass(frozen=True)
class Pred(Nre):
    iri: str

    def __str__(self):
        return self.iri if self.iri.startswith(":") else f"<{self.iri}>"


@dataclass(frozen=True)
class Any(Nre):
    def __str__(self):
        return "_"


@dataclass(frozen=True)
class NodeTest(Nre):
    value: Value

    def __str__(self):
        if isinstance(self.value, Iri):
            return f"node(<{self.value.text}>)"
        return 'node("' + self.value.text.replace("\\", "\\\\").replace('"', '\\"') + '")'


@dataclass(frozen=True)
class Nest(Nre):
    inner: Nre

    def children(self):
        return (self.inner,)

    def __str__(self):
        return f"[{self.inner}]"


@dataclass(frozen=True)
class Star(Nre):
    inner: Nre

    def children(self):
        return (self.inner,)

    def __str__(self):
        return f"({self.inner})*"


@dataclass(frozen=True)
class Inv(Nre):
    inner: Nre

    def children(self):
        return (self.inner,)

    def __str__(self):
        return f"^({self.inner})"


@dataclass(frozen=True)
class Concat(Nre):
    left: Nre
    right: Nre

    def children(self):
        return (self.left, self.right)

    def __str__(self):
        return f"({self.left}/{self.right})"


@dataclass(frozen=True)
class Union(Nre):
    left: Nre
    right: Nre

    def children(self):
        return (self.left, self.right)

    def __str__(self):
        return f"({self.left}|{self.right})"


def concat(*parts: Nre) -> Nre:
    out = parts[0]
    for p in parts[1:]:
        out = Concat(out, p)
    return out


# ---------------------------------------------------------------- parser


class NreSyntaxError(Exception):
    def __init__(self, message: str, column: int):
        self.diagnostic = Diagnostic(message, SourceLocation("<query>", 1, column))
        super().__init__(str(self.diagnostic))


_LEX = re.compile(r"""
    (?P<ws>\s+)
  | (?P<pred>:[A-Za-z_][\w.\-]*)
  | (?P<iri><[^<>\s]*>)
  | (?P<str>"(?:[^"\\]|\\.)*")
  | (?P<node>node\b)
  | (?P<op>[()\[\]*^/|_])
""", re.VERBOSE)


def _lex(text: str):
    pos = 0
    out = []
    while pos < len(text):
        m = _LEX.match(text, pos)
        if not m:
            raise NreSyntaxError(f"unexpected {text[pos]!r}", pos + 1)
        if m.lastgroup != "ws":
            out.append((m.lastgroup, m.group(), pos + 1))
        pos = m.end()
    out.append(("end", "", len(text) + 1))
    return out


def parse_nre(text: str) -> Nre:
    """Grammar: union of '/'-sequences of postfix-starred, prefix-inverted atoms."""
    toks = _lex(text)
    i = 0

    def peek():
        return toks[i]

    def take(expected=None):
        nonlocal i
        t = toks[i]
        if expected is not None and t[1] != expected:
            raise NreSyntaxError(f"expected {expected!r}, found {t[1] or 'end'!r}", t[2])
        i += 1
        return t

    def union():
        e = seq()
        while peek()[1] == "|":
            take()
            e = Union(e, seq())
        return e

    def seq():
        e = unary()
        while peek()[1] == "/":
            take()
            e = Concat(e, unary())
        return e

    def unary():
        if peek()[1] == "^":
            take()
            return Inv(unary())
        e = atom()
        while peek()[1] == "*":
            take()
            e = Star(e)
        return e

    def atom():
        kind, tx, col = take()
        if kind == "pred":
            return Pred(tx)
        if kind == "iri":
            return Pred(tx[1:-1])
        if tx == "_":
            return Any()
        if tx == "(":
            if peek()[1] == ")":
                take()
                return Eps()
            e = union()
            take(")")
            return e
        if tx == "[":
            e = union()
            take("]")
            return Nest(e)
        if kind == "node":
            take("(")
            k2, v, c2 = take()
            if k2 == "iri":
                val: Value = Iri(v[1:-1])
            elif k2 == "str":
                val = ConstLit(re.sub(r"\\(.)", r"\1", v[1:-1]))
            else:
                raise NreSyntaxError("node() takes <iri> or \"literal\"", c2)
            take(")")
            return NodeTest(val)
        raise NreSyntaxError(f"unexpected {tx or 'end'!r}", col)

    e = union()
    if peek()[0] != "end":
        raise NreSyntaxError(f"unexpected {peek()[1]!r}", peek()[2])
    return e


# ---------------------------------------------------------------- evaluation


class _Ctx:
    def __init__(self, g: TypedGraph):
        self.nodes = g.nodes()
        self.by_pred: dict[str, set] = {}
        self.any: set = set()
        for s, p, o in g.triples:
            self.by_pred.setdefault(p, set()).add((s, o))
            self.any.add((s, o))


def eval_nre(e: Nre, g: TypedGraph) -> set[tuple[Value, Value]]:
    return _eval(e, _Ctx(g))


def _succ(rel) -> dict:
    out: dict = {}
    for a, b in rel:
        out.setdefault(a, set()).add(b)
    return out


def _eval(e: Nre, c: _Ctx) -> set:
    if isinstance(e, Eps):
        return {(n, n) for n in c.nodes}
    if isinstance(e, Pred):
        return set(c.by_pred.get(e.iri, ()))
    if isinstance(e, Any):
        return set(c.any)
    if isinstance(e, NodeTest):
        return {(e.value, e.value)} if e.value in c.nodes else set()
    if isinstance(e, Nest):
        return {(a, a) for a, _ in _eval(e.inner, c)}
    if isinstance(e, Inv):
        return {(b, a) for a, b in _eval(e.inner, c)}
    if isinstance(e, Union):
        return _eval(e.left, c) | _eval(e.right, c)
    if isinstance(e, Concat):
        left = _eval(e.left, c)
        if not left:
            return set()
        nxt = _succ(_eval(e.right, c))
        return {(a, d) for a, b in left for d in nxt.get(b, ())}
    if isinstance(e, Star):
        # BFS from every node over the inner relation
        nxt = _succ(_eval(e.inner, c))
        out = set()
        for start in c.nodes:
            seen = {start}
            todo = [start]
            while todo:
                x = todo.pop()
                for y in nxt.get(x, ()):
                    if y not in seen:
                        seen.add(y)
                        todo.append(y)
            out.update((start, y) for y in seen)
        return out
    raise TypeError(f"not an NRE: {e!r}")


def satisfied(e: Nre, g: TypedGraph) -> bool:
    return bool(eval_nre(e, g))


# ---------------------------------------------------------------- certain answers


class NotForward(Exception):
    def __init__(self, e: Nre):
        super().__init__(f"query uses the inverse operator: {e}")
        self.expr = e


def _universal(s, i, check_setting):
    from .solution import universal_solution
    return universal_solution(s, i, check_setting)


def certain_pairs(s, i, e: Nre, check_setting: bool = True, universal: TypedGraph | None = None):
    if not e.is_forward:
        raise NotForward(e)
    u0 = universal if universal is not None else _universal(s, i, check_setting)
    return {(a, b) for a, b in eval_nre(e, u0) if not a.is_null and not b.is_null}


def certain_bool(s, i, e: Nre, check_setting: bool = True, universal: TypedGraph | None = None) -> bool:
    if not e.is_forward:
        raise NotForward(e)
    u0 = universal if universal is not None else _universal(s, i, check_setting)
    return satisfied(e, u0)
