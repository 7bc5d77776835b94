"""Domain types shared by every stage of the exchange engine.

Everything here is an immutable value.  Graph nodes are identified by their
label (a ``Value``); nulls carry a natural-number id allocated by whichever
stage created them.
"""

from __future__ import annotations

import enum
import functools
import string
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Union
from urllib.parse import quote

LITERAL = "Literal"

# ---------------------------------------------------------------- values


class Value:
    """Base of the four node-label variants."""

    __slots__ = ()
    rank = 0

    @property
    def is_null(self) -> bool:
        return False

    @property
    def is_literal(self) -> bool:
        return False

    def sort_key(self):
        return (self.rank, self._payload())

    def _payload(self):
        raise NotImplementedError

    def __lt__(self, other):
        if not isinstance(other, Value):
            return NotImplemented
        return self.sort_key() < other.sort_key()

    def __le__(self, other):
        return self == other or self < other

    def __gt__(self, other):
        if not isinstance(other, Value):
            return NotImplemented
        return other < self

    def __ge__(self, other):
        return self == other or self > other


@dataclass(frozen=True, eq=True, slots=True)
class Iri(Value):
    text: str
    rank = 0

    def _payload(self):
        return self.text

    def __repr__(self):
        return f"<{self.text}>"


@dataclass(frozen=True, eq=True, slots=True)
class ConstLit(Value):
    text: str
    rank = 1

    @property
    def is_literal(self) -> bool:
        return True

    def _payload(self):
        return self.text

    def __repr__(self):
        return repr(self.text)


@dataclass(frozen=True, eq=True, slots=True)
class NullIri(Value):
    id: int
    rank = 2

    @property
    def is_null(self) -> bool:
        return True

    def _payload(self):
        return self.id

    def __repr__(self):
        return f"_:n{self.id}"


@dataclass(frozen=True, eq=True, slots=True)
class NullLit(Value):
    id: int
    rank = 3

    @property
    def is_null(self) -> bool:
        return True

    @property
    def is_literal(self) -> bool:
        return True

    def _payload(self):
        return self.id

    def __repr__(self):
        return f"_?n{self.id}"


class NullFactory:
    """Deterministic counter for one output artifact."""

    def __init__(self, start: int = 0):
        self.next_id = start

    def lit(self) -> NullLit:
        v = NullLit(self.next_id)
        self.next_id += 1
        return v

    def iri(self) -> NullIri:
        v = NullIri(self.next_id)
        self.next_id += 1
        return v


# ---------------------------------------------------------------- source side


@dataclass(frozen=True)
class FunctionalDependency:
    relation: str
    lhs: tuple[str, ...]
    rhs: tuple[str, ...]

    def __str__(self):
        return f"{self.relation}: {', '.join(self.lhs)} -> {', '.join(self.rhs)}"


@dataclass(frozen=True)
class RelationalSchema:
    relations: Mapping[str, tuple[str, ...]] = field(default_factory=dict)
    fds: tuple[FunctionalDependency, ...] = ()

    def arity(self, rel: str) -> int:
        return len(self.relations[rel])

    def positions(self, fd: FunctionalDependency) -> tuple[tuple[int, ...], tuple[int, ...]]:
        attrs = self.relations[fd.relation]
        return (tuple(attrs.index(a) for a in fd.lhs),
                tuple(attrs.index(a) for a in fd.rhs))


Fact = tuple[str, tuple[Value, ...]]


@dataclass(frozen=True)
class SourceInstance:
    facts: frozenset = frozenset()

    def __post_init__(self):
        if not isinstance(self.facts, frozenset):
            object.__setattr__(self, "facts", frozenset(self.facts))

    def __len__(self):
        return len(self.facts)

    def __iter__(self) -> Iterator[Fact]:
        return iter(sorted(self.facts, key=fact_key))

    def relation(self, name: str) -> list[tuple[Value, ...]]:
        return sorted((args for r, args in self.facts if r == name),
                      key=lambda a: [v.sort_key() for v in a])

    def values(self) -> set[Value]:
        return {v for _, args in self.facts for v in args}

    @property
    def is_concrete(self) -> bool:
        return all(isinstance(v, ConstLit) for v in self.values())


def fact_key(fact: Fact):
    rel, args = fact
    return (rel, [v.sort_key() for v in args])


# ---------------------------------------------------------------- constructors


@dataclass(frozen=True)
class Slot:
    name: str


@dataclass(frozen=True)
class IriConstructor:
    name: str
    params: tuple[str, ...]
    template: tuple[Union[str, Slot], ...]

    @classmethod
    def from_template(cls, name: str, params: Iterable[str], text: str) -> "IriConstructor":
        """Split ``"bug:{bid}"`` into constant segments and slots."""
        parts: list[Union[str, Slot]] = []
        for lit, slot, _, _ in string.Formatter().parse(text):
            if lit:
                parts.append(lit)
            if slot is not None:
                parts.append(Slot(slot))
        return cls(name, tuple(params), tuple(parts))

    @property
    def arity(self) -> int:
        return len(self.params)

    @property
    def prefix(self) -> str:
        out = []
        for part in self.template:
            if isinstance(part, Slot):
                break
            out.append(part)
        return "".join(out)

    @property
    def separator_leads(self) -> str:
        """First character of every constant run that sits between two slots.

        These are escaped inside arguments so the boundary between consecutive
        slots is always the first raw occurrence of the separator.
        """
        leads = set()
        seen_slot = False
        for i, part in enumerate(self.template):
            if isinstance(part, Slot):
                seen_slot = True
            elif seen_slot and any(isinstance(p, Slot) for p in self.template[i + 1:]):
                leads.add(part[0])
        return "".join(sorted(leads))

    def problems(self) -> list[str]:
        out = []
        slots = [p.name for p in self.template if isinstance(p, Slot)]
        if len(set(self.params)) != len(self.params):
            out.append(f"constructor {self.name}: duplicate parameter")
        for s in slots:
            if s not in self.params:
                out.append(f"constructor {self.name}: slot {{{s}}} is not a parameter")
        for p in self.params:
            if slots.count(p) != 1:
                out.append(f"constructor {self.name}: parameter {p} must occur exactly once in the template")
        for a, b in zip(self.template, self.template[1:]):
            if isinstance(a, Slot) and isinstance(b, Slot):
                out.append(f"constructor {self.name}: slots {{{a.name}}} and {{{b.name}}} need a separator")
        if any("%" in p for p in self.template if isinstance(p, str)):
            out.append(f"constructor {self.name}: '%' is not allowed in template text")
        return out

    def __str__(self):
        body = "".join(p if isinstance(p, str) else "{" + p.name + "}" for p in self.template)
        return f'{self.name}({", ".join(self.params)}) = "{body}"'




def _encode(arg: str, extra: str) -> str:
    out = quote(arg, safe="")
    if not extra:
        return out
    return "".join(f"%{ord(c):02X}" if c in extra else c for c in out)


def make_iri(c: IriConstructor, args: Iterable[str]) -> str:
    args = tuple(args)
    if len(args) != c.arity:
        raise ValueError(f"{c.name} expects {c.arity} arguments, got {len(args)}")
    return _make_iri(c, args)


@functools.lru_cache(maxsize=1 << 16)
def _make_iri(c: IriConstructor, args: tuple) -> str:
    bound = dict(zip(c.params, args))
    extra = c.separator_leads
    return "".join(p if isinstance(p, str) else _encode(bound[p.name], extra)
                   for p in c.template)


@dataclass(frozen=True)
class ConstructorLibrary:
    constructors: Mapping[str, IriConstructor] = field(default_factory=dict)

    def __getitem__(self, name: str) -> IriConstructor:
        return self.constructors[name]

    def __contains__(self, name: str) -> bool:
        return name in self.constructors


class OverlapError(Exception):
    def __init__(self, first: str, second: str):
        super().__init__(f"constructors {first} and {second} may produce the same IRI")
        self.first = first
        self.second = second


def check_library(lib: ConstructorLibrary) -> None:
    """Raise OverlapError unless every pair of constant prefixes is prefix-free."""
    items = list(lib.constructors.values())
    for i, c in enumerate(items):
        for d in items[i + 1:]:
            a, b = c.prefix, d.prefix
            if a.startswith(b) or b.startswith(a):
                raise OverlapError(c.name, d.name)


# ---------------------------------------------------------------- shapes


class Mult(enum.Enum):
    ONE = "1"
    OPT = "?"
    STAR = "*"
    PLUS = "+"

    @property
    def functional(self) -> bool:
        return self in (Mult.ONE, Mult.OPT)

    @property
    def required(self) -> bool:
        return self in (Mult.ONE, Mult.PLUS)


@dataclass(frozen=True)
class ShapeSchema:
    types: tuple[str, ...] = ()
    delta: Mapping[tuple[str, str], tuple[str, Mult]] = field(default_factory=dict)

    def constraints(self, t: str) -> list[tuple[str, str, Mult]]:
        return sorted((p, tgt, m) for (s, p), (tgt, m) in self.delta.items() if s == t)

    def shape_dependencies(self) -> list["ShapeDependency"]:
        out: list[ShapeDependency] = []
        for (t, p), (tgt, m) in sorted(self.delta.items(), key=lambda kv: kv[0]):
            out.append(TP(t, p, tgt))
            if m.functional:
                out.append(PF(t, p))
            if m.required:
                out.append(PE(t, p))
        return out


@dataclass(frozen=True)
class TP:
    type: str
    pred: str
    target: str


@dataclass(frozen=True)
class PF:
    type: str
    pred: str


@dataclass(frozen=True)
class PE:
    type: str
    pred: str


ShapeDependency = Union[TP, PF, PE]


# ---------------------------------------------------------------- rules


@dataclass(frozen=True, order=True)
class Var:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True, order=True)
class LitConst:
    text: str

    def __str__(self):
        return '"' + self.text.replace("\\", "\\\\").replace('"', '\\"') + '"'


@dataclass(frozen=True, order=True)
class IriApp:
    ctor: str
    args: tuple[str, ...]

    def __str__(self):
        return f"{self.ctor}({', '.join(self.args)})"


Term = Union[Var, LitConst, IriApp]


def term_vars(t: Term) -> tuple[str, ...]:
    if isinstance(t, Var):
        return (t.name,)
    if isinstance(t, IriApp):
        return t.args
    return ()


@dataclass(frozen=True)
class Atom:
    relation: str
    args: tuple[str, ...]

    def __str__(self):
        return f"{self.relation}({', '.join(self.args)})"


@dataclass(frozen=True)
class TripleAtom:
    subject: IriApp
    pred: str
    obj: Term

    def vars(self) -> tuple[str, ...]:
        return self.subject.args + term_vars(self.obj)

    def __str__(self):
        return f"Triple({self.subject}, {render_pred(self.pred)}, {self.obj})"


@dataclass(frozen=True)
class TypeAtom:
    type: str
    subject: IriApp

    def vars(self) -> tuple[str, ...]:
        return self.subject.args

    def __str__(self):
        return f"{self.type}({self.subject})"


Head = Union[TripleAtom, TypeAtom]


@dataclass(frozen=True)
class StTgd:
    body: tuple[Atom, ...]
    head: Head
    label: str

    def body_vars(self) -> list[str]:
        seen: dict[str, None] = {}
        for a in self.body:
            for v in a.args:
                seen.setdefault(v, None)
        return list(seen)

    def vars(self) -> list[str]:
        seen = dict.fromkeys(self.body_vars())
        for v in self.head.vars():
            seen.setdefault(v, None)
        return list(seen)

    def rename(self, suffix: str) -> "StTgd":
        def r(v: str) -> str:
            return v + suffix

        def rt(t: Term) -> Term:
            if isinstance(t, Var):
                return Var(r(t.name))
            if isinstance(t, IriApp):
                return IriApp(t.ctor, tuple(map(r, t.args)))
            return t

        body = tuple(Atom(a.relation, tuple(map(r, a.args))) for a in self.body)
        h = self.head
        if isinstance(h, TypeAtom):
            head: Head = TypeAtom(h.type, rt(h.subject))
        else:
            head = TripleAtom(rt(h.subject), h.pred, rt(h.obj))
        return StTgd(body, head, self.label)

    def __str__(self):
        return f"{', '.join(map(str, self.body))} => {self.head}"


@dataclass(frozen=True)
class RawRule:
    body: tuple[Atom, ...]
    heads: tuple[Head, ...]
    label: str


class NotFull(Exception):
    def __init__(self, rule: str, variable: str):
        super().__init__(f"rule {rule}: head variable {variable} does not occur in the body")
        self.rule = rule
        self.variable = variable


def normalize_tgds(rules: Iterable[RawRule]) -> list[StTgd]:
    out = []
    for raw in rules:
        bound = {v for a in raw.body for v in a.args}
        for h in raw.heads:
            for v in h.vars():
                if v not in bound:
                    raise NotFull(raw.label, v)
        if len(raw.heads) == 1:
            out.append(StTgd(raw.body, raw.heads[0], raw.label))
        else:
            out.extend(StTgd(raw.body, h, f"{raw.label}#{i}")
                       for i, h in enumerate(raw.heads, 1))
    return out


# ---------------------------------------------------------------- setting


@dataclass(frozen=True)
class Setting:
    source: RelationalSchema = field(default_factory=RelationalSchema)
    shapes: ShapeSchema = field(default_factory=ShapeSchema)
    tgds: tuple[StTgd, ...] = ()
    library: ConstructorLibrary = field(default_factory=ConstructorLibrary)

    def tgd(self, label: str) -> StTgd:
        for t in self.tgds:
            if t.label == label:
                return t
        raise KeyError(label)

    def literal_constants(self) -> set[str]:
        out = set()
        for t in self.tgds:
            if isinstance(t.head, TripleAtom) and isinstance(t.head.obj, LitConst):
                out.add(t.head.obj.text)
        return out


@dataclass(frozen=True)
class SourceLocation:
    file: str
    line: int
    column: int

    def __str__(self):
        return f"{self.file}:{self.line}:{self.column}"


@dataclass(frozen=True)
class Diagnostic:
    message: str
    location: SourceLocation | None = None

    def __str__(self):
        return f"{self.location}: {self.message}" if self.location else self.message


def validate_setting(s: Setting, locations: Mapping[object, SourceLocation] | None = None) -> list[Diagnostic]:
    """Collect every declaration/closure problem; an empty list means ok.

    ``locations`` maps declared objects (rules, FDs, constructors, shape
    entries) to where the parser saw them.
    """
    loc = (locations or {}).get
    diags: list[Diagnostic] = []
    rels = s.source.relations
    for name, attrs in rels.items():
        if len(set(attrs)) != len(attrs):
            diags.append(Diagnostic(f"relation {name}: duplicate attribute", loc(("relation", name))))
    for fd in s.source.fds:
        where = loc(fd)
        if fd.relation not in rels:
            diags.append(Diagnostic(f"fd on unknown relation {fd.relation}", where))
            continue
        if not fd.lhs or not fd.rhs:
            diags.append(Diagnostic(f"fd {fd}: both sides must be nonempty", where))
        for a in fd.lhs + fd.rhs:
            if a not in rels[fd.relation]:
                diags.append(Diagnostic(f"fd {fd}: unknown attribute {a}", where))
    for c in s.library.constructors.values():
        diags.extend(Diagnostic(m, loc(("iri", c.name))) for m in c.problems())
    try:
        check_library(s.library)
    except OverlapError as e:
        diags.append(Diagnostic(str(e), loc(("iri", e.second))))
    types = set(s.shapes.types)
    if LITERAL in types:
        diags.append(Diagnostic(f"{LITERAL} is reserved and cannot name a type"))
    for (t, p), (tgt, _) in s.shapes.delta.items():
        where = loc(("shape", t))
        if t not in types:
            diags.append(Diagnostic(f"unknown type {t}", where))
        if tgt != LITERAL and tgt not in types:
            diags.append(Diagnostic(f"unknown type {tgt}", where))

    def check_app(app: IriApp, where, label: str):
        if app.ctor not in s.library:
            diags.append(Diagnostic(f"rule {label}: unknown constructor {app.ctor}", where))
        elif s.library[app.ctor].arity != len(app.args):
            diags.append(Diagnostic(f"rule {label}: {app.ctor} expects {s.library[app.ctor].arity} arguments", where))

    for t in s.tgds:
        where = loc(t)
        for a in t.body:
            if a.relation not in rels:
                diags.append(Diagnostic(f"rule {t.label}: unknown relation {a.relation}", where))
            elif len(rels[a.relation]) != len(a.args):
                diags.append(Diagnostic(f"rule {t.label}: {a.relation} has arity {len(rels[a.relation])}", where))
        h = t.head
        check_app(h.subject, where, t.label)
        if isinstance(h, TypeAtom):
            if h.type not in types:
                diags.append(Diagnostic(f"unknown type {h.type}", where))
        elif isinstance(h.obj, IriApp):
            check_app(h.obj, where, t.label)
        bound = set(t.body_vars())
        for v in h.vars():
            if v not in bound:
                diags.append(Diagnostic(f"rule {t.label}: head variable {v} does not occur in the body", where))
    return diags


# ---------------------------------------------------------------- typed graphs


Triple = tuple[Value, str, Value]


def render_pred(p: str) -> str:
    return p if p.startswith(":") else f"<{p}>"


@dataclass(frozen=True)
class TypedGraph:
    triples: frozenset = frozenset()
    typing: Mapping[Value, frozenset] = field(default_factory=dict)

    def __post_init__(self):
        triples = frozenset(self.triples)
        typing = {n: frozenset(ts) for n, ts in dict(self.typing).items() if ts}
        for s, _, _ in triples:
            if s.is_literal:
                raise ValueError(f"literal subject {s!r}")
        for n in typing:
            if n.is_literal:
                raise ValueError(f"literal node {n!r} cannot carry a shape type")
        object.__setattr__(self, "triples", triples)
        object.__setattr__(self, "typing", typing)

    def __eq__(self, other):
        if not isinstance(other, TypedGraph):
            return NotImplemented
        return self.triples == other.triples and self.typing == other.typing

    def __hash__(self):
        return hash((self.triples, frozenset(self.typing.items())))

    def types(self, n: Value) -> frozenset:
        return self.typing.get(n, frozenset())

    def nodes(self) -> set[Value]:
        out = set(self.typing)
        for s, _, o in self.triples:
            out.add(s)
            out.add(o)
        return out

    def out_edges(self) -> dict[Value, list[tuple[str, Value]]]:
        out: dict[Value, list[tuple[str, Value]]] = {}
        for s, p, o in self.triples:
            out.setdefault(s, []).append((p, o))
        return out

    def union(self, other: "TypedGraph") -> "TypedGraph":
        typing = {n: set(ts) for n, ts in self.typing.items()}
        for n, ts in other.typing.items():
            typing.setdefault(n, set()).update(ts)
        return TypedGraph(self.triples | other.triples, typing)

    def type_facts(self) -> list[tuple[Value, str]]:
        return sorted(((n, t) for n, ts in self.typing.items() for t in ts),
                      key=lambda nt: (nt[0].sort_key(), nt[1]))

    def __len__(self):
        return len(self.triples)
