"""Parsers and printers for settings, instances, graphs, queries and CNF files."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable

from .model import (LITERAL, Atom, ConstLit, ConstructorLibrary, Diagnostic,
                    FunctionalDependency, IriApp, IriConstructor, Iri,
                    LitConst, Mult, NotFull, NullIri, NullLit, RawRule,
                    RelationalSchema, Setting, ShapeSchema, SourceInstance,
                    SourceLocation, TripleAtom, TypeAtom, TypedGraph, Value,
                    Var, normalize_tgds, render_pred, validate_setting)


class ParseError(Exception):
    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = list(diagnostics)
        super().__init__("\n".join(map(str, self.diagnostics)))


# ---------------------------------------------------------------- lexer

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r]+)
  | (?P<comment>\#[^\n]*)
  | (?P<nl>\n)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<iri><[^<>\s]*>)
  | (?P<pred>:[A-Za-z_](?:[\w.]|-(?!>))*)
  | (?P<arrow>->)
  | (?P<implies>=>)
  | (?P<mult>\[[1?*+]\])
  | (?P<name>[A-Za-z0-9_](?:[\w.@!]|-(?!>))*)
  | (?P<punct>[(){}\[\],;:=@|/^*_.])
""", re.VERBOSE)


@dataclass
class Tok:
    kind: str
    text: str
    line: int
    col: int


_ESCAPES = {"n": "\n", "t": "\t", "r": "\r"}


def _unquote(s: str) -> str:
    return re.sub(r"\\(u[0-9a-fA-F]{4}|.)",
                  lambda m: chr(int(m.group(1)[1:], 16)) if len(m.group(1)) == 5
                  else _ESCAPES.get(m.group(1), m.group(1)), s[1:-1])


def _escape_char(c: str) -> str:
    if c in '"\\':
        return "\\" + c
    if c == "\n":
        return "\\n"
    # anything str.splitlines or str.strip would act on
    if ord(c) < 0x20 or 0x7f <= ord(c) <= 0xa0 or c.isspace() and c != " ":
        return f"\\u{ord(c):04x}"
    return c


def _quote(s: str) -> str:
    return '"' + "".join(map(_escape_char, s)) + '"'


def tokenize(text: str, file: str = "<input>") -> list[Tok]:
    toks: list[Tok] = []
    line, start = 1, 0
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError([Diagnostic(f"unexpected character {text[pos]!r}",
                                         SourceLocation(file, line, pos - start + 1))])
        kind = m.lastgroup
        if kind == "nl":
            toks.append(Tok("nl", "\n", line, pos - start + 1))
            line += 1
            start = m.end()
        elif kind not in ("ws", "comment"):
            toks.append(Tok(kind, m.group(), line, pos - start + 1))
        pos = m.end()
    return toks


class _Cursor:
    def __init__(self, toks: list[Tok], file: str):
        self.toks = toks
        self.i = 0
        self.file = file

    def peek(self) -> Tok | None:
        return self.toks[self.i] if self.i < len(self.toks) else None

    def loc(self, tok: Tok | None = None) -> SourceLocation:
        tok = tok or self.peek() or (self.toks[-1] if self.toks else None)
        if tok is None:
            return SourceLocation(self.file, 1, 1)
        return SourceLocation(self.file, tok.line, tok.col)

    def fail(self, msg: str, tok: Tok | None = None):
        raise ParseError([Diagnostic(msg, self.loc(tok))])

    def next(self) -> Tok:
        t = self.peek()
        if t is None:
            self.fail("unexpected end of statement")
        self.i += 1
        return t

    def expect(self, text: str) -> Tok:
        t = self.next()
        if t.text != text:
            self.fail(f"expected {text!r}, found {t.text!r}", t)
        return t

    def name(self) -> str:
        t = self.next()
        if t.kind != "name":
            self.fail(f"expected a name, found {t.text!r}", t)
        return t.text

    def at(self, text: str) -> bool:
        t = self.peek()
        return t is not None and t.text == text

    def done(self) -> bool:
        return self.i >= len(self.toks)


def _statements(toks: list[Tok]) -> list[list[Tok]]:
    """Split at newlines and ';' outside brackets."""
    out: list[list[Tok]] = []
    cur: list[Tok] = []
    depth = 0
    for t in toks:
        if t.text in "({" and t.kind == "punct":
            depth += 1
        elif t.text in ")}" and t.kind == "punct":
            depth -= 1
        if depth <= 0 and (t.kind == "nl" or t.text == ";"):
            if cur:
                out.append(cur)
            cur = []
            depth = 0
            continue
        if t.kind != "nl":
            cur.append(t)
    if cur:
        out.append(cur)
    return out


# ---------------------------------------------------------------- settings


def _pred(c: _Cursor) -> str:
    t = c.next()
    if t.kind == "pred":
        return t.text
    if t.kind == "iri":
        return t.text[1:-1]
    c.fail(f"expected a predicate, found {t.text!r}", t)


def _name_list(c: _Cursor, close: str) -> list[str]:
    out = []
    if c.at(close):
        c.next()
        return out
    while True:
        out.append(c.name())
        t = c.next()
        if t.text == close:
            return out
        if t.text != ",":
            c.fail(f"expected ',' or {close!r}", t)


def _term(c: _Cursor) -> object:
    t = c.next()
    if t.kind == "string":
        return LitConst(_unquote(t.text))
    if t.kind != "name":
        c.fail(f"expected a term, found {t.text!r}", t)
    if c.at("("):
        c.next()
        return IriApp(t.text, tuple(_name_list(c, ")")))
    return Var(t.text)


def _head(c: _Cursor):
    tok = c.peek()
    name = c.name()
    c.expect("(")
    if name == "Triple":
        s = _term(c)
        c.expect(",")
        p = _pred(c)
        c.expect(",")
        o = _term(c)
        c.expect(")")
        if not isinstance(s, IriApp):
            c.fail("triple subjects must be constructor applications", tok)
        return TripleAtom(s, p, o)
    s = _term(c)
    c.expect(")")
    if not isinstance(s, IriApp):
        c.fail(f"type atom {name} needs a constructor application", tok)
    return TypeAtom(name, s)


def _body_atom(c: _Cursor) -> Atom:
    rel = c.name()
    c.expect("(")
    args = []
    if c.at(")"):
        c.next()
        return Atom(rel, ())
    while True:
        t = c.next()
        if t.kind != "name":
            c.fail(f"body atoms take variables only, found {t.text!r}", t)
        args.append(t.text)
        t = c.next()
        if t.text == ")":
            return Atom(rel, tuple(args))
        if t.text != ",":
            c.fail("expected ',' or ')'", t)


_MULT = {"[1]": Mult.ONE, "[?]": Mult.OPT, "[*]": Mult.STAR, "[+]": Mult.PLUS}


def parse_setting(text: str, file: str = "<setting>") -> Setting:
    """Parse a setting file; raises ParseError carrying every diagnostic."""
    diags: list[Diagnostic] = []
    try:
        toks = tokenize(text, file)
    except ParseError as e:
        raise ParseError(e.diagnostics) from None
    relations: dict[str, tuple[str, ...]] = {}
    fds: list[FunctionalDependency] = []
    ctors: dict[str, IriConstructor] = {}
    types: list[str] = []
    delta: dict = {}
    raws: list[RawRule] = []
    locations: dict = {}
    rule_no = 0
    for stmt in _statements(toks):
        c = _Cursor(stmt, file)
        kw = stmt[0]
        try:
            word = c.next().text
            if word == "relation":
                name = c.name()
                c.expect("(")
                relations[name] = tuple(_name_list(c, ")"))
                locations[("relation", name)] = c.loc(kw)
            elif word == "fd":
                rel = c.name()
                t = c.next()
                lhs: list[str] = []
                if t.kind == "pred":  # "User :uid" lexes as a predicate
                    lhs.append(t.text[1:])
                elif t.text == ":":
                    lhs.append(c.name())
                else:
                    c.fail("expected ':' after fd relation", t)
                while c.at(","):
                    c.next()
                    lhs.append(c.name())
                c.expect("->")
                rhs = [c.name()]
                while c.at(","):
                    c.next()
                    rhs.append(c.name())
                fd = FunctionalDependency(rel, tuple(lhs), tuple(rhs))
                fds.append(fd)
                locations[fd] = c.loc(kw)
            elif word == "iri":
                name = c.name()
                c.expect("(")
                params = _name_list(c, ")")
                c.expect("=")
                t = c.next()
                if t.kind != "string":
                    c.fail("expected a quoted template", t)
                ctors[name] = IriConstructor.from_template(name, params, _unquote(t.text))
                locations[("iri", name)] = c.loc(kw)
            elif word == "shape":
                name = c.name()
                types.append(name)
                locations[("shape", name)] = c.loc(kw)
                c.expect("{")
                while not c.at("}"):
                    if c.at(";"):
                        c.next()
                        continue
                    p = _pred(c)
                    c.expect("->")
                    t = c.next()
                    if t.text == LITERAL:
                        target = LITERAL
                    elif t.text == "@":
                        target = c.name()
                    else:
                        c.fail(f"expected Literal or @Type, found {t.text!r}", t)
                    mult = Mult.ONE
                    if c.peek() is not None and c.peek().kind == "mult":
                        mult = _MULT[c.next().text]
                    if (name, p) in delta:
                        c.fail(f"shape {name}: duplicate constraint on {p}")
                    delta[(name, p)] = (target, mult)
                c.expect("}")
            elif word == "rule":
                rule_no += 1
                label = f"rule{rule_no}"
                if len(stmt) > 2 and stmt[1].kind == "name" and stmt[2].text == ":":
                    label = c.name()
                    c.expect(":")
                body = [_body_atom(c)]
                while c.at(","):
                    c.next()
                    body.append(_body_atom(c))
                c.expect("=>")
                heads = [_head(c)]
                while c.at(","):
                    c.next()
                    heads.append(_head(c))
                raws.append(RawRule(tuple(body), tuple(heads), label))
                locations[label] = c.loc(kw)
            else:
                c.fail(f"unknown statement {word!r}", kw)
            if not c.done():
                c.fail(f"unexpected {c.peek().text!r}")
        except ParseError as e:
            diags.extend(e.diagnostics)
    if len({r.label for r in raws}) != len(raws):
        diags.append(Diagnostic("duplicate rule label"))
    tgds = []
    try:
        tgds = normalize_tgds(raws)
    except NotFull as e:
        diags.append(Diagnostic(str(e), locations.get(e.rule)))
    for t in tgds:
        locations[t] = locations.get(t.label.split("#")[0])
    setting = Setting(RelationalSchema(relations, tuple(fds)),
                      ShapeSchema(tuple(types), delta), tuple(tgds),
                      ConstructorLibrary(ctors))
    if not diags:
        diags.extend(validate_setting(setting, locations))
    if diags:
        raise ParseError(diags)
    return setting


def render_setting(s: Setting) -> str:
    lines = []
    for name, attrs in s.source.relations.items():
        lines.append(f"relation {name}({', '.join(attrs)})")
    for fd in s.source.fds:
        lines.append(f"fd {fd.relation} : {', '.join(fd.lhs)} -> {', '.join(fd.rhs)}")
    for c in s.library.constructors.values():
        body = "".join(p if isinstance(p, str) else "{" + p.name + "}" for p in c.template)
        lines.append(f"iri {c.name}({', '.join(c.params)}) = {_quote(body)}")
    for t in s.shapes.types:
        parts = []
        for p, tgt, m in s.shapes.constraints(t):
            target = LITERAL if tgt == LITERAL else "@" + tgt
            parts.append(f"{render_pred(p)} -> {target} [{m.value}]")
        lines.append(f"shape {t} {{ {'; '.join(parts)} }}")
    # single-head rules keep their own label; split rules are regrouped
    groups: dict[str, list] = {}
    for t in s.tgds:
        groups.setdefault(t.label.split("#")[0], []).append(t)
    for label, ts in groups.items():
        body = ", ".join(map(str, ts[0].body))
        heads = ", ".join(str(t.head) for t in ts)
        lines.append(f"rule {label}: {body} => {heads}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- instances


def parse_instance(text: str, schema: RelationalSchema, file: str = "<instance>") -> SourceInstance:
    diags = []
    facts = set()
    try:
        toks = tokenize(text, file)
    except ParseError as e:
        raise ParseError(e.diagnostics) from None
    for stmt in _statements(toks):
        c = _Cursor(stmt, file)
        try:
            rel = c.name()
            head = stmt[0]
            c.expect("(")
            vals: list[Value] = []
            if c.at(")"):
                c.next()
            else:
                while True:
                    t = c.next()
                    if t.kind == "string":
                        vals.append(ConstLit(_unquote(t.text)))
                    elif t.kind == "name":
                        vals.append(ConstLit(t.text))
                    else:
                        c.fail(f"malformed value {t.text!r}", t)
                    t = c.next()
                    if t.text == ")":
                        break
                    if t.text != ",":
                        c.fail("expected ',' or ')'", t)
            if c.at("."):
                c.next()
            if not c.done():
                c.fail(f"unexpected {c.peek().text!r}")
            if rel not in schema.relations:
                c.fail(f"unknown relation {rel}", head)
            if len(vals) != schema.arity(rel):
                c.fail(f"{rel} has arity {schema.arity(rel)}, got {len(vals)} values", head)
            facts.add((rel, tuple(vals)))
        except ParseError as e:
            diags.extend(e.diagnostics)
    if diags:
        raise ParseError(diags)
    return SourceInstance(frozenset(facts))


_BARE = re.compile(r"[A-Za-z0-9_.@!\-]+")


def render_value(v: Value) -> str:
    if isinstance(v, Iri):
        return f"<{v.text}>"
    if isinstance(v, ConstLit):
        return _quote(v.text)
    if isinstance(v, NullIri):
        return f"_:n{v.id}"
    return f"_?n{v.id}"


def render_instance(i: SourceInstance) -> str:
    lines = []
    for rel, args in i:
        vals = []
        for v in args:
            if isinstance(v, NullLit):
                vals.append(f"_?n{v.id}")
            else:
                vals.append(v.text if _BARE.fullmatch(v.text) else _quote(v.text))
        lines.append(f"{rel}({', '.join(vals)})")
    return "".join(line + "\n" for line in lines)


# ---------------------------------------------------------------- graphs


_NODE = re.compile(r'\s*(<[^<>\s]*>|"(?:[^"\\\n]|\\.)*"|_:n\d+|_\?n\d+)\s*')
_GPRED = re.compile(r"\s*(:[A-Za-z_][\w.\-]*|<[^<>\s]*>)\s*")
_GTYPE = re.compile(r"\s*([A-Za-z_][\w.\-]*)\s*")


def _parse_node(tok: str) -> Value:
    if tok.startswith("<"):
        return Iri(tok[1:-1])
    if tok.startswith('"'):
        return ConstLit(_unquote(tok))
    if tok.startswith("_:n"):
        return NullIri(int(tok[3:]))
    return NullLit(int(tok[3:]))


def render_graph(g: TypedGraph) -> str:
    lines = [f"triple({render_value(s)}, {render_pred(p)}, {render_value(o)})."
             for s, p, o in g.triples]
    lines += [f"type({render_value(n)}, {t})." for n, t in g.type_facts()]
    return "".join(line + "\n" for line in sorted(lines))


def parse_graph(text: str, file: str = "<graph>") -> TypedGraph:
    triples = set()
    typing: dict[Value, set[str]] = {}
    diags = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        loc = SourceLocation(file, lineno, 1)
        try:
            if line.startswith("triple(") and line.endswith(")."):
                inner = line[len("triple("):-2]
                m1 = _NODE.match(inner)
                if not m1 or inner[m1.end():m1.end() + 1] != ",":
                    raise ValueError("bad subject")
                rest = inner[m1.end() + 1:]
                m2 = _GPRED.match(rest)
                if not m2 or rest[m2.end():m2.end() + 1] != ",":
                    raise ValueError("bad predicate")
                rest2 = rest[m2.end() + 1:]
                m3 = _NODE.fullmatch(rest2)
                if not m3:
                    raise ValueError("bad object")
                s = _parse_node(m1.group(1))
                if s.is_literal:
                    diags.append(Diagnostic("literal subject", loc))
                    continue
                p = m2.group(1)
                p = p[1:-1] if p.startswith("<") else p
                triples.add((s, p, _parse_node(m3.group(1))))
            elif line.startswith("type(") and line.endswith(")."):
                inner = line[len("type("):-2]
                m1 = _NODE.match(inner)
                if not m1 or inner[m1.end():m1.end() + 1] != ",":
                    raise ValueError("bad node")
                m2 = _GTYPE.fullmatch(inner[m1.end() + 1:])
                if not m2:
                    raise ValueError("bad type name")
                n = _parse_node(m1.group(1))
                if n.is_literal:
                    diags.append(Diagnostic("literal node cannot carry a type", loc))
                    continue
                typing.setdefault(n, set()).add(m2.group(1))
            else:
                raise ValueError("expected triple(...). or type(...).")
        except ValueError as e:
            diags.append(Diagnostic(str(e), loc))
    if diags:
        raise ParseError(diags)
    return TypedGraph(frozenset(triples), typing)


# ---------------------------------------------------------------- queries


def parse_nre(text: str):
    from .query import parse_nre as _p
    return _p(text)


# ---------------------------------------------------------------- DIMACS


def parse_dimacs(text: str):
    from .oracle import Cnf
    num_vars = None
    clauses: list[tuple[int, ...]] = []
    cur: list[int] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("c") or line.startswith("%"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise ParseError([Diagnostic("malformed problem line", SourceLocation("<dimacs>", lineno, 1))]) from None
            num_vars = int(parts[2])
            continue
        for tok in line.split():
            try:
                lit = int(tok)
            except ValueError:
                raise ParseError([Diagnostic(f"bad literal {tok!r}", SourceLocation("<dimacs>", lineno, 1))]) from None
            if lit == 0:
                if cur:
                    clauses.append(tuple(cur))
                cur = []
            else:
                cur.append(lit)
    if cur:
        clauses.append(tuple(cur))
    if num_vars is None:
        num_vars = max((abs(l) for c in clauses for l in c), default=0)
    return Cnf(num_vars, tuple(clauses))


def render_dimacs(cnf) -> str:
    lines = [f"p cnf {cnf.num_vars} {len(cnf.clauses)}"]
    lines += [" ".join(map(str, c)) + " 0" for c in cnf.clauses]
    return "\n".join(lines) + "\n"


def render_pairs(pairs: Iterable[tuple[Value, Value]]) -> str:
    return "".join(f"({render_value(a)}, {render_value(b)})\n"
                   for a, b in sorted(pairs, key=lambda ab: (ab[0].sort_key(), ab[1].sort_key())))
