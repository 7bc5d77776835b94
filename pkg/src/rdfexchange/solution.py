"""Universal simulation solutions: frontier completion and bisimulation quotient."""

from __future__ import annotations

from dataclasses import dataclass

from . import kernels
from .chase import (KindClash, SourceInconsistent, check_pf, core_pre_solution,
                    fd_chase)
from .model import (LITERAL, NullFactory, NullIri, NullLit, Setting,
                    ShapeSchema, SourceInstance, TypedGraph, Value)


def delta(X, p: str, shapes: ShapeSchema) -> frozenset:
    """Every target any member of X imposes on p-successors."""
    out = set()
    for t in X:
        rule = shapes.delta.get((t, p))
        if rule is not None:
            out.add(rule[0])
    return frozenset(out)


def req(X, shapes: ShapeSchema) -> frozenset:
    return frozenset(p for (t, p), (_, m) in shapes.delta.items() if t in X and m.required)


def is_mixed(X) -> bool:
    return LITERAL in X and len(X) > 1


def frontier(j: TypedGraph, shapes: ShapeSchema) -> set[tuple[Value, str]]:
    has = {(s, p) for s, p, _ in j.triples}
    return {(n, p) for n, ts in j.typing.items() for p in req(ts, shapes) if (n, p) not in has}


def _sorted_frontier(j: TypedGraph, shapes: ShapeSchema) -> list[tuple[Value, str]]:
    return sorted(frontier(j, shapes), key=lambda np: (np[0].sort_key(), np[1]))


def set_key(X) -> tuple:
    return (len(X), tuple(sorted(X)))


def type_set_closure(roots, shapes: ShapeSchema, cap: int | None = None):
    """Close a family of type-sets under X -> delta(X, p) for p in req(X).

    Returns (sets in discovery order, parent map).  Mixed sets are kept but
    not expanded further.
    """
    parent: dict[frozenset, tuple] = {}
    order: list[frozenset] = []
    queue = []
    for X, origin in roots:
        if X not in parent:
            parent[X] = origin
            order.append(X)
            queue.append(X)
    limit = cap if cap is not None else 2 ** (len(shapes.types) + 1) + 1
    while queue:
        X = queue.pop(0)
        if is_mixed(X):
            continue
        for p in sorted(req(X, shapes)):
            Y = delta(X, p, shapes)
            if Y not in parent:
                parent[Y] = (X, p)
                order.append(Y)
                queue.append(Y)
                if len(order) > limit:
                    raise RuntimeError("type-set fixpoint exceeded its bound")
    return order, parent


class MixedKindSet(Exception):
    def __init__(self, X, chain):
        super().__init__(f"type set {sorted(X)} mixes {LITERAL} with shape types")
        self.set = X
        self.chain = chain


def provenance_chain(X, parent) -> list:
    """Path from a root down to X as [(set, pred-or-origin), ...]."""
    chain = []
    cur = X
    while True:
        origin = parent[cur]
        if isinstance(origin, tuple) and len(origin) == 2 and isinstance(origin[0], frozenset):
            chain.append((cur, origin[1]))
            cur = origin[0]
        else:
            chain.append((cur, origin))
            break
    chain.reverse()
    return chain


def completion_graph(j0: TypedGraph, shapes: ShapeSchema, nulls: NullFactory | None = None) -> TypedGraph:
    nulls = nulls or NullFactory()
    fr = _sorted_frontier(j0, shapes)
    roots = [(delta(j0.types(n), p, shapes), ("frontier", n, p)) for n, p in fr]
    order, parent = type_set_closure(roots, shapes)
    for X in order:
        if is_mixed(X):
            raise MixedKindSet(X, provenance_chain(X, parent))
    node = {X: nulls.iri() for X in sorted((X for X in order if LITERAL not in X), key=set_key)}
    triples = set()

    def target(X):
        return nulls.lit() if X == frozenset({LITERAL}) else node[X]

    for n, p in fr:
        triples.add((n, p, target(delta(j0.types(n), p, shapes))))
    for X in sorted(node, key=set_key):
        for p in sorted(req(X, shapes)):
            triples.add((node[X], p, target(delta(X, p, shapes))))
    typing = {v: set(X) for X, v in node.items()}
    return TypedGraph(frozenset(triples), typing)


def cotypes_of_graph(j: TypedGraph, shapes: ShapeSchema) -> set[frozenset]:
    roots = [(delta(j.types(n), p, shapes), ("frontier", n, p)) for n, p in _sorted_frontier(j, shapes)]
    order, _ = type_set_closure(roots, shapes)
    return set(order)


# ---------------------------------------------------------------- simulation


def _compatible(n: Value, m: Value) -> bool:
    if n.is_literal != m.is_literal:
        return False
    return n.is_null or n == m


def _encode(g: TypedGraph, extra=()):
    nodes = sorted(g.nodes() | set(extra), key=lambda v: v.sort_key())
    ix = {v: k for k, v in enumerate(nodes)}
    return nodes, ix


def max_simulation(g: TypedGraph, h: TypedGraph, impl=None) -> set[tuple[Value, Value]]:
    gn, gi = _encode(g)
    hn, hi = _encode(h)
    preds: dict[str, int] = {}
    ge = [(gi[s], preds.setdefault(p, len(preds)), gi[o]) for s, p, o in g.triples]
    he = [(hi[s], preds.setdefault(p, len(preds)), hi[o]) for s, p, o in h.triples]
    nl, nr = len(gn), len(hn)
    rel = bytearray(nl * nr)
    for u, n in enumerate(gn):
        if n.is_null:
            row = u * nr
            for v, m in enumerate(hn):
                if m.is_literal == n.is_literal:
                    rel[row + v] = 1
        elif n in hi:
            rel[u * nr + hi[n]] = 1
    kernels.refine_simulation(nl, nr, ge, he, rel, impl)
    return {(gn[k // nr], hn[k % nr]) for k in range(nl * nr) if rel[k]}


def is_simulated(g: TypedGraph, h: TypedGraph) -> bool:
    left = {n for n, _ in max_simulation(g, h)}
    return left >= g.nodes()


def is_simulation(rel, g: TypedGraph, h: TypedGraph) -> bool:
    gout, hout = g.out_edges(), h.out_edges()
    for n, m in rel:
        if not _compatible(n, m):
            return False
        for p, n2 in gout.get(n, ()):
            if not any(q == p and (n2, m2) in rel for q, m2 in hout.get(m, ())):
                return False
    return True


def bisim_classes(g: TypedGraph, impl=None) -> list[list[Value]]:
    nodes, ix = _encode(g)
    preds: dict[str, int] = {}
    edges = [(ix[s], preds.setdefault(p, len(preds)), ix[o]) for s, p, o in g.triples]
    # non-nulls start (and stay) alone; nulls start in one block per kind
    init = []
    for k, v in enumerate(nodes):
        if v.is_null:
            init.append(-1 if v.is_literal else -2)
        else:
            init.append(k)
    remap: dict[int, int] = {}
    init = [remap.setdefault(b, len(remap)) for b in init]
    blocks = kernels.bisim_blocks(len(nodes), edges, init, impl)
    classes: dict[int, list[Value]] = {}
    for k, b in enumerate(blocks):
        classes.setdefault(b, []).append(nodes[k])
    return sorted(classes.values(), key=lambda c: c[0].sort_key())


def _representative(cls: list[Value]) -> Value:
    for v in cls:
        if not v.is_null:
            return v
    return min(cls, key=lambda v: v.id)


def bisim_quotient(g: TypedGraph, impl=None) -> TypedGraph:
    rep: dict[Value, Value] = {}
    for cls in bisim_classes(g, impl):
        r = _representative(cls)
        for v in cls:
            rep[v] = r
    triples = {(rep[s], p, rep[o]) for s, p, o in g.triples}
    typing: dict[Value, set[str]] = {}
    for n, ts in g.typing.items():
        typing.setdefault(rep[n], set()).update(ts)
    return TypedGraph(frozenset(triples), typing)


def renumber_nulls(g: TypedGraph) -> TypedGraph:
    """Compact null ids in (kind, id) order, so output numbering starts at 0."""
    nulls = sorted((v for v in g.nodes() if v.is_null), key=lambda v: (v.is_literal, v.id))
    new = {}
    for k, v in enumerate(nulls):
        new[v] = NullLit(k) if v.is_literal else NullIri(k)
    f = lambda v: new.get(v, v)  # noqa: E731
    return TypedGraph(frozenset((f(s), p, f(o)) for s, p, o in g.triples),
                      {f(n): ts for n, ts in g.typing.items()})


# ---------------------------------------------------------------- U0


class NoSolution(Exception):
    def __init__(self, reason: str, evidence=None):
        super().__init__(reason)
        self.evidence = evidence


class InconsistentSetting(Exception):
    def __init__(self, verdict):
        super().__init__("setting is inconsistent")
        self.verdict = verdict


@dataclass
class SolutionParts:
    j0: TypedGraph
    completion: TypedGraph
    universal: TypedGraph


def solution_parts(s: Setting, i: SourceInstance) -> SolutionParts:
    res = fd_chase(i, s.source)
    if not res.ok or res.unifier:
        raise NoSolution("source instance violates its functional dependencies", res.failure)
    try:
        j0 = core_pre_solution(s, i)
    except KindClash as e:
        raise NoSolution(str(e), e) from e
    except SourceInconsistent as e:
        raise NoSolution(str(e), e) from e
    pf = check_pf(j0, s.shapes)
    if pf:
        raise NoSolution("core pre-solution violates a functional shape constraint", pf)
    try:
        gs = completion_graph(j0, s.shapes)
    except MixedKindSet as e:
        raise NoSolution(str(e), e.chain) from e
    u0 = renumber_nulls(bisim_quotient(j0.union(gs)))
    return SolutionParts(j0, gs, u0)


def universal_solution(s: Setting, i: SourceInstance, check_setting: bool = True) -> TypedGraph:
    if check_setting:
        from .consistency import check_consistency
        verdict = check_consistency(s)
        if verdict.status != "consistent":
            raise InconsistentSetting(verdict)
    return solution_parts(s, i).universal
