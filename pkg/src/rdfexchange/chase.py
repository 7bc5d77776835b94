"""FD chase, core pre-solution, and shape validation."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Mapping

from .model import (LITERAL, ConstLit, FunctionalDependency, Iri, LitConst, Mult, NullLit, RelationalSchema, Setting,
                    ShapeSchema, SourceInstance, StTgd, TypeAtom,
                    TypedGraph, Value, Var, make_iri)


@dataclass(frozen=True)
class FdChaseResult:
    """Outcome of chasing with FDs.

    ``failure`` is None on success; otherwise the offending FD and the two
    distinct constants it tried to equate, and ``instance`` is the input.
    """

    instance: SourceInstance
    unifier: Mapping[NullLit, Value] = field(default_factory=dict)
    failure: tuple[FunctionalDependency, tuple[ConstLit, ConstLit]] | None = None

    @property
    def ok(self) -> bool:
        return self.failure is None

    def resolve(self, v: Value) -> Value:
        return self.unifier.get(v, v)


class _Clash(Exception):
    pass


def fd_chase(i: SourceInstance, fds, schema: RelationalSchema | None = None) -> FdChaseResult:
    """Apply FDs as egds to fixpoint with a union-find over values.

    ``fds`` is either a RelationalSchema or a list of FDs plus ``schema`` for
    attribute positions.
    """
    if isinstance(fds, RelationalSchema):
        schema, fds = fds, fds.fds
    plan = [(fd, *schema.positions(fd)) for fd in fds]
    parent: dict[Value, Value] = {}

    def find(v: Value) -> Value:
        root = v
        while root in parent:
            root = parent[root]
        while v != root:
            nxt = parent[v]
            parent[v] = root
            v = nxt
        return root

    def better(a: Value, b: Value) -> bool:
        # constants win; among nulls the lower id
        if isinstance(a, ConstLit) != isinstance(b, ConstLit):
            return isinstance(a, ConstLit)
        return a < b

    def union(a: Value, b: Value, fd) -> bool:
        ra, rb = find(a), find(b)
        if ra == rb:
            return False
        if isinstance(ra, ConstLit) and isinstance(rb, ConstLit):
            raise _Clash(fd, tuple(sorted((ra, rb))))
        if better(ra, rb):
            parent[rb] = ra
        else:
            parent[ra] = rb
        return True

    by_rel: dict[str, list[tuple[Value, ...]]] = {}
    for rel, args in i.facts:
        by_rel.setdefault(rel, []).append(args)

    try:
        changed = True
        while changed:
            changed = False
            for fd, lhs, rhs in plan:
                groups: dict[tuple, tuple[Value, ...]] = {}
                for args in by_rel.get(fd.relation, ()):
                    key = tuple(find(args[k]) for k in lhs)
                    first = groups.setdefault(key, args)
                    if first is not args:
                        for k in rhs:
                            changed |= union(first[k], args[k], fd)
    except _Clash as e:
        return FdChaseResult(i, {}, (e.args[0], e.args[1]))

    unifier = {}
    for v in list(parent):
        r = find(v)
        if isinstance(v, NullLit) and r != v:
            unifier[v] = r
    facts = frozenset((rel, tuple(find(v) for v in args)) for rel, args in i.facts)
    return FdChaseResult(SourceInstance(facts), unifier)


# ---------------------------------------------------------------- body matching


class FactIndex:
    """Per-relation lookup of tuples by bound positions (built lazily)."""

    def __init__(self, facts):
        self.by_rel: dict[str, list[tuple]] = {}
        for rel, args in facts:
            self.by_rel.setdefault(rel, []).append(args)
        self._idx: dict[tuple[str, tuple[int, ...]], dict[tuple, list[tuple]]] = {}

    def lookup(self, rel: str, positions: tuple[int, ...], key: tuple) -> list[tuple]:
        if not positions:
            return self.by_rel.get(rel, [])
        idx = self._idx.get((rel, positions))
        if idx is None:
            idx = {}
            for args in self.by_rel.get(rel, ()):
                idx.setdefault(tuple(args[k] for k in positions), []).append(args)
            self._idx[(rel, positions)] = idx
        return idx.get(key, [])


def match_body(body, index: FactIndex, binding: dict | None = None) -> Iterator[dict]:
    """Yield every variable assignment mapping all body atoms into the index."""
    binding = dict(binding or {})

    def go(k: int):
        if k == len(body):
            yield dict(binding)
            return
        atom = body[k]
        bound_pos = tuple(j for j, v in enumerate(atom.args) if v in binding)
        key = tuple(binding[atom.args[j]] for j in bound_pos)
        for args in index.lookup(atom.relation, bound_pos, key):
            added = []
            ok = True
            for v, val in zip(atom.args, args):
                cur = binding.get(v)
                if cur is None:
                    binding[v] = val
                    added.append(v)
                elif cur != val:
                    ok = False
                    break
            if ok:
                yield from go(k + 1)
            for v in added:
                del binding[v]

    yield from go(0)


def ground_term(t, binding: dict, setting: Setting) -> Value:
    if isinstance(t, Var):
        return binding[t.name]
    if isinstance(t, LitConst):
        return ConstLit(t.text)
    args = [binding[v].text for v in t.args]
    return Iri(make_iri(setting.library[t.ctor], args))


def fire(tgd: StTgd, index: FactIndex, setting: Setting):
    """Head facts produced by one rule: ('triple', s, p, o) or ('type', n, T)."""
    h = tgd.head
    for b in match_body(tgd.body, index):
        s = ground_term(h.subject, b, setting)
        if isinstance(h, TypeAtom):
            yield ("type", s, h.type)
        else:
            yield ("triple", s, h.pred, ground_term(h.obj, b, setting))


# ---------------------------------------------------------------- core pre-solution


class SourceInconsistent(Exception):
    def __init__(self, detail: str):
        super().__init__(f"source instance violates its dependencies: {detail}")


class KindClash(Exception):
    def __init__(self, node: Value, type_: str, pred: str):
        super().__init__(f"shape rule on {pred} forces {type_} onto {node!r}")
        self.node = node
        self.type = type_
        self.pred = pred


def core_pre_solution(s: Setting, i: SourceInstance) -> TypedGraph:
    if not i.is_concrete:
        raise SourceInconsistent("instance contains nulls")
    res = fd_chase(i, s.source)
    if not res.ok:
        fd, (a, b) = res.failure
        raise SourceInconsistent(f"{fd} equates {a!r} and {b!r}")
    index = FactIndex(i.facts)
    triples: set = set()
    typing: dict[Value, set[str]] = {}
    for tgd in s.tgds:
        for fact in fire(tgd, index, s):
            if fact[0] == "type":
                typing.setdefault(fact[1], set()).add(fact[2])
            else:
                triples.add(fact[1:])
    saturate_types(triples, typing, s.shapes)
    return TypedGraph(frozenset(triples), typing)


def saturate_types(triples, typing: dict, shapes: ShapeSchema) -> None:
    """TP closure in place; raises KindClash on an ill-kinded propagation."""
    out: dict[Value, list[tuple[str, Value]]] = {}
    for s, p, o in triples:
        out.setdefault(s, []).append((p, o))
    todo = [(n, t) for n, ts in typing.items() for t in ts]
    while todo:
        n, t = todo.pop()
        for p, o in out.get(n, ()):
            rule = shapes.delta.get((t, p))
            if rule is None:
                continue
            target = rule[0]
            if target == LITERAL:
                if not o.is_literal:
                    raise KindClash(o, LITERAL, p)
                continue
            if o.is_literal:
                raise KindClash(o, target, p)
            have = typing.setdefault(o, set())
            if target not in have:
                have.add(target)
                todo.append((o, target))


# ---------------------------------------------------------------- shape checks


@dataclass(frozen=True)
class ShapeViolation:
    kind: str  # "PF", "PE", "TP" or "TP-kind-clash"
    node: Value
    type: str
    predicate: str
    witnesses: tuple[Value, ...] = ()

    def __str__(self):
        w = ", ".join(map(repr, self.witnesses))
        return f"{self.kind} {self.node!r} {self.type} {self.predicate}" + (f" [{w}]" if w else "")


def _objects(g: TypedGraph) -> dict[tuple[Value, str], set[Value]]:
    out: dict[tuple[Value, str], set[Value]] = {}
    for s, p, o in g.triples:
        out.setdefault((s, p), set()).add(o)
    return out


def _by_type(shapes: ShapeSchema) -> dict[str, list[tuple[str, str, Mult]]]:
    out: dict[str, list] = {}
    for (t, p), (tgt, m) in shapes.delta.items():
        out.setdefault(t, []).append((p, tgt, m))
    for v in out.values():
        v.sort()
    return out


def check_pf(g: TypedGraph, shapes: ShapeSchema) -> list[ShapeViolation]:
    objs = _objects(g)
    rules = _by_type(shapes)
    out = []
    for n, ts in sorted(g.typing.items(), key=lambda kv: kv[0].sort_key()):
        for t in sorted(ts):
            for p, _, m in rules.get(t, ()):
                os_ = objs.get((n, p), ())
                if m.functional and len(os_) > 1:
                    out.append(ShapeViolation("PF", n, t, p, tuple(sorted(os_))))
    return out


def validate_shapes(g: TypedGraph, shapes: ShapeSchema) -> list[ShapeViolation]:
    objs = _objects(g)
    rules = _by_type(shapes)
    out = []
    for n, ts in sorted(g.typing.items(), key=lambda kv: kv[0].sort_key()):
        for t in sorted(ts):
            for p, tgt, m in rules.get(t, ()):
                os_ = sorted(objs.get((n, p), ()))
                if tgt == LITERAL:
                    bad = tuple(o for o in os_ if not o.is_literal)
                    if bad:
                        out.append(ShapeViolation("TP-kind-clash", n, t, p, bad))
                else:
                    clash = tuple(o for o in os_ if o.is_literal)
                    if clash:
                        out.append(ShapeViolation("TP-kind-clash", n, t, p, clash))
                    untyped = tuple(o for o in os_ if not o.is_literal and tgt not in g.types(o))
                    if untyped:
                        out.append(ShapeViolation("TP", n, t, p, untyped))
                if m.functional and len(os_) > 1:
                    out.append(ShapeViolation("PF", n, t, p, tuple(os_)))
                if m.required and not os_:
                    out.append(ShapeViolation("PE", n, t, p))
    return out


def satisfies_tgds(g: TypedGraph, s: Setting, i: SourceInstance) -> list[tuple[str, tuple]]:
    """Rule firings over ``i`` whose head fact is missing from ``g``."""
    index = FactIndex(i.facts)
    missing = []
    for tgd in s.tgds:
        for fact in fire(tgd, index, s):
            if fact[0] == "type":
                if fact[2] not in g.types(fact[1]):
                    missing.append((tgd.label, fact))
            elif fact[1:] not in g.triples:
                missing.append((tgd.label, fact))
    return missing
