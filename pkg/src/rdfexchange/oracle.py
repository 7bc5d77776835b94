"""Independent test machinery.

Nothing in the engine depends on this module.  It holds the reduction from
CNF satisfiability to setting inconsistency, two SAT solvers, a generator of
alternative solutions used to falsify non-certain answers, random setting
and instance generators, and a brute-force instance-level inconsistency check.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass

import networkx as nx

from .chase import KindClash, check_pf, core_pre_solution, fd_chase
from .model import (LITERAL, Atom, ConstLit, ConstructorLibrary,
                    FunctionalDependency, Iri, IriApp, IriConstructor, LitConst,
                    Mult, NullIri, NullLit, RelationalSchema, Setting,
                    ShapeSchema, SourceInstance, StTgd, TripleAtom, TypeAtom,
                    TypedGraph, Var)
from .solution import delta, is_mixed, req, cotypes_of_graph, solution_parts


# ---------------------------------------------------------------- CNF


@dataclass(frozen=True)
class Cnf:
    num_vars: int
    clauses: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        for c in self.clauses:
            if not c:
                raise ValueError("empty clause")
            for lit in c:
                if lit == 0 or abs(lit) > self.num_vars:
                    raise ValueError(f"literal {lit} out of range")


class TooLarge(Exception):
    pass


def brute_sat(cnf: Cnf) -> bool:
    if cnf.num_vars > 24:
        raise TooLarge(f"{cnf.num_vars} variables")
    for bits in itertools.product((False, True), repeat=cnf.num_vars):
        if all(any(bits[abs(l) - 1] == (l > 0) for l in c) for c in cnf.clauses):
            return True
    return False


def dpll_sat(cnf: Cnf) -> bool:
    """Unit propagation plus branching; a second, structurally different solver."""

    def solve(clauses: list[frozenset]) -> bool:
        clauses = list(clauses)
        while True:
            if not clauses:
                return True
            if any(not c for c in clauses):
                return False
            unit = next((c for c in clauses if len(c) == 1), None)
            if unit is None:
                break
            (lit,) = unit
            clauses = [c - {-lit} for c in clauses if lit not in c]
        lit = next(iter(clauses[0]))
        return (solve([c - {-lit} for c in clauses if lit not in c])
                or solve([c - {lit} for c in clauses if -lit not in c]))

    return solve([frozenset(c) for c in cnf.clauses])


def random_cnf(rng: random.Random, max_vars: int = 6, max_clauses: int = 8, max_len: int = 3) -> Cnf:
    n = rng.randint(1, max_vars)
    m = rng.randint(1, max_clauses)
    clauses = []
    for _ in range(m):
        k = rng.randint(1, max_len)
        vs = rng.sample(range(1, n + 1), min(k, n))
        clauses.append(tuple(v if rng.random() < 0.5 else -v for v in vs))
    return Cnf(n, tuple(clauses))


def sat_setting(cnf: Cnf) -> Setting:
    """Setting that is inconsistent exactly when ``cnf`` is satisfiable.

    A source value c is pushed along f1(c) -> ... -> f(m+1)(c); clause j's link
    fires only if some literal of it agrees with the truth value stored in Vt
    or Vf.  The last node is functional on :a, and Vt/Vf write their values
    there, so two different values collide exactly when a consistent choice
    of one literal per clause exists.
    """
    n, m = cnf.num_vars, len(cnf.clauses)
    rels = {"Vt": ("A", "B"), "Vf": ("A", "B")}
    for i in range(1, n + 1):
        rels[f"R{i}"] = ("A", "B")
    fds = tuple(FunctionalDependency(r, ("A",), ("B",)) for r in rels)
    ctors = {f"f{j}": IriConstructor.from_template(f"f{j}", ("x",), f"{j}:{{x}}")
             for j in range(1, m + 2)}
    types = tuple(f"T{j}" for j in range(1, m + 2))
    dlt = {(f"T{j}", ":a"): (f"T{j + 1}", Mult.STAR) for j in range(1, m + 1)}
    dlt[(f"T{m + 1}", ":a")] = (LITERAL, Mult.ONE)
    x, y = "x", "y"
    last = IriApp(f"f{m + 1}", (x,))
    tgds = [StTgd((Atom("Vt", (x, y)),), TripleAtom(last, ":a", Var(y)), "VT"),
            StTgd((Atom("Vf", (x, y)),), TripleAtom(last, ":a", Var(y)), "VF")]
    for j, clause in enumerate(cnf.clauses, 1):
        link = TripleAtom(IriApp(f"f{j}", (x,)), ":a", IriApp(f"f{j + 1}", (x,)))
        for k, lit in enumerate(clause, 1):
            store, tag = ("Vt", "RT") if lit > 0 else ("Vf", "RF")
            body = (Atom(f"R{abs(lit)}", (x, y)), Atom(store, (x, y)))
            tgds.append(StTgd(body, link, f"{tag}_{j}_{k}"))
    first = IriApp("f1", (x,))
    tgds.append(StTgd((Atom("Vt", (x, y)),), TypeAtom("T1", first), "ST"))
    tgds.append(StTgd((Atom("Vf", (x, y)),), TypeAtom("T1", first), "SF"))
    return Setting(RelationalSchema(rels, fds), ShapeSchema(types, dlt), tuple(tgds),
                   ConstructorLibrary(ctors))


# ---------------------------------------------------------------- alternative solutions


def _unrolled(parts, shapes, depth: int) -> TypedGraph:
    """J0 plus fresh tree copies of the completion up to ``depth``, closed back
    onto the canonical type-set nodes of the completion graph."""
    gs = parts.completion
    canon = {frozenset(ts): n for n, ts in gs.typing.items()}
    next_id = 1 + max((v.id for v in gs.nodes() if v.is_null), default=-1)
    triples = set(parts.j0.triples) | set(gs.triples)
    typing = {n: set(ts) for n, ts in parts.j0.typing.items()}
    for n, ts in gs.typing.items():
        typing.setdefault(n, set()).update(ts)

    def fresh(cls):
        nonlocal next_id
        next_id += 1
        return cls(next_id - 1)

    def build(X, d):
        if X == frozenset({LITERAL}):
            return fresh(NullLit)
        if d > depth:
            return canon[X]
        node = fresh(NullIri)
        typing[node] = set(X)
        for p in sorted(req(X, shapes)):
            triples.add((node, p, build(delta(X, p, shapes), d + 1)))
        return node

    has = {(s, p) for s, p, _ in parts.j0.triples}
    for n, ts in sorted(parts.j0.typing.items(), key=lambda kv: kv[0].sort_key()):
        for p in sorted(req(ts, shapes)):
            if (n, p) not in has:
                # replace the completion's frontier edge with a fresh branch
                triples = {t for t in triples if not (t[0] == n and t[1] == p)}
                triples.add((n, p, build(delta(ts, p, shapes), 1)))
    return TypedGraph(frozenset(triples), typing)


def _ground(g: TypedGraph, tag: str) -> TypedGraph:
    taken = {v.text for v in g.nodes() if isinstance(v, (Iri, ConstLit))}

    def name(base):
        k = 0
        while f"{base}{k}" in taken:
            k += 1
        taken.add(f"{base}{k}")
        return f"{base}{k}"

    m = {}
    for v in sorted((v for v in g.nodes() if v.is_null), key=lambda v: (v.is_literal, v.id)):
        m[v] = ConstLit(name(f"{tag}-lit-")) if v.is_literal else Iri(name(f"urn:{tag}:"))
    f = lambda v: m.get(v, v)  # noqa: E731
    return TypedGraph(frozenset((f(s), p, f(o)) for s, p, o in g.triples),
                      {f(n): ts for n, ts in g.typing.items()})


def _collapse_literals(g: TypedGraph) -> TypedGraph:
    lits = sorted(v for v in g.nodes() if isinstance(v, ConstLit))
    if not lits:
        return g
    f = lambda v: lits[0] if isinstance(v, NullLit) else v  # noqa: E731
    return TypedGraph(frozenset((s, p, f(o)) for s, p, o in g.triples), g.typing)


def alt_solutions(s: Setting, i: SourceInstance, depth: int = 1) -> list[TypedGraph]:
    parts = solution_parts(s, i)
    cands = [parts.universal,
             parts.j0.union(parts.completion)]
    for d in range(1, depth + 1):
        cands.append(_unrolled(parts, s.shapes, d))
    cands.append(_ground(cands[-1], "alt"))
    cands.append(_collapse_literals(cands[1]))
    out: list[TypedGraph] = []
    for g in cands:
        if g not in out:
            out.append(g)
    return out


# ---------------------------------------------------------------- random settings


PREDS = (":p", ":q", ":r")


def random_setting(rng: random.Random, max_rel: int = 3, max_arity: int = 3, max_tgds: int = 4,
                   max_types: int = 3, max_fds: int = 2, max_ctors: int = 2) -> Setting:
    rels = {}
    for k in range(rng.randint(1, max_rel)):
        rels[f"R{k}"] = tuple(f"a{j}" for j in range(rng.randint(1, max_arity)))
    fds = []
    for _ in range(rng.randint(0, max_fds)):
        r = rng.choice(sorted(rels))
        attrs = rels[r]
        if len(attrs) < 2:
            continue
        lhs = rng.sample(attrs, rng.randint(1, len(attrs) - 1))
        rhs = [rng.choice([a for a in attrs if a not in lhs])]
        fd = FunctionalDependency(r, tuple(sorted(lhs)), tuple(rhs))
        if fd not in fds:
            fds.append(fd)
    ctors = {}
    for k in range(rng.randint(1, max_ctors)):
        ar = rng.randint(1, 2)
        params = tuple(f"v{j}" for j in range(ar))
        tmpl = f"c{k}:" + "-".join("{" + p + "}" for p in params)
        ctors[f"g{k}"] = IriConstructor.from_template(f"g{k}", params, tmpl)
    types = tuple(f"T{k}" for k in range(rng.randint(1, max_types)))
    dlt = {}
    for t in types:
        for p in PREDS:
            if rng.random() < 0.45:
                target = LITERAL if rng.random() < 0.4 else rng.choice(types)
                dlt[(t, p)] = (target, rng.choice(list(Mult)))
    tgds = []
    for k in range(rng.randint(1, max_tgds)):
        body = []
        pool = ["x", "y", "z", "w"]
        for _ in range(rng.randint(1, 2)):
            r = rng.choice(sorted(rels))
            body.append(Atom(r, tuple(rng.choice(pool) for _ in rels[r])))
        bound = sorted({v for a in body for v in a.args})

        def app():
            c = rng.choice(sorted(ctors))
            return IriApp(c, tuple(rng.choice(bound) for _ in ctors[c].params))

        if k == 0 or rng.random() < 0.3:
            head = TypeAtom(rng.choice(types), app())
        else:
            r = rng.random()
            if r < 0.45:
                obj = app()
            elif r < 0.9:
                obj = Var(rng.choice(bound))
            else:
                obj = LitConst(rng.choice(("k0", "k1")))
            head = TripleAtom(app(), rng.choice(PREDS), obj)
        tgds.append(StTgd(tuple(body), head, f"r{k}"))
    return Setting(RelationalSchema(rels, tuple(fds)), ShapeSchema(types, dlt), tuple(tgds),
                   ConstructorLibrary(ctors))


def random_instance(rng: random.Random, s: Setting, domain: int = 3, density: float = 0.4) -> SourceInstance:
    """Random FD-satisfying instance (tuples added greedily in random order)."""
    dom = [ConstLit(f"d{k}") for k in range(domain)]
    facts: set = set()
    for rel, attrs in s.source.relations.items():
        cands = list(itertools.product(dom, repeat=len(attrs)))
        rng.shuffle(cands)
        for args in cands:
            if rng.random() > density:
                continue
            trial = SourceInstance(frozenset(facts | {(rel, args)}))
            if fd_chase(trial, s.source).ok:
                facts.add((rel, args))
    return SourceInstance(frozenset(facts))


# ---------------------------------------------------------------- instance-level oracle


def instance_defect(s: Setting, i: SourceInstance) -> str | None:
    """Why the concrete, FD-satisfying instance ``i`` has no solution (None if it has one)."""
    try:
        j0 = core_pre_solution(s, i)
    except KindClash:
        return "kind-clash"
    if check_pf(j0, s.shapes):
        return "pf"
    if any(is_mixed(X) for X in cotypes_of_graph(j0, s.shapes)):
        return "mixed"
    return None


def _maximal_relation_instances(s: Setting, rel: str, dom) -> list[frozenset]:
    arity = len(s.source.relations[rel])
    tuples = list(itertools.product(dom, repeat=arity))
    fds = [(fd, *s.source.positions(fd)) for fd in s.source.fds if fd.relation == rel]
    if not fds:
        return [frozenset(tuples)]
    compat = nx.Graph()
    compat.add_nodes_from(range(len(tuples)))
    for a in range(len(tuples)):
        for b in range(a + 1, len(tuples)):
            ta, tb = tuples[a], tuples[b]
            clash = any(all(ta[k] == tb[k] for k in lhs) and any(ta[k] != tb[k] for k in rhs)
                        for _, lhs, rhs in fds)
            if not clash:
                compat.add_edge(a, b)
    return [frozenset(tuples[k] for k in clique) for clique in nx.find_cliques(compat)]


def maximal_instances(s: Setting, domain: int = 3, budget: int | None = None):
    """Every maximal FD-satisfying instance over ``domain`` constants, up to
    renaming of the constants.  Returns None when more than ``budget``."""
    dom = [ConstLit(f"d{k}") for k in range(domain)]
    used = sorted({a.relation for t in s.tgds for a in t.body})
    per_rel = [_maximal_relation_instances(s, r, dom) for r in used]
    total = 1
    for opts in per_rel:
        total *= len(opts)
    if budget is not None and total > budget * 6:
        return None
    # renaming constants maps maximal instances to maximal instances, so a
    # permutation acts on each relation's option list by index
    perms = list(itertools.permutations(range(domain)))
    images = []
    for opts in per_rel:
        where = {o: k for k, o in enumerate(opts)}
        images.append([[where[frozenset(tuple(dom[perm[int(v.text[1:])]] for v in t) for t in o)]
                        for o in opts] for perm in perms])
    seen = set()
    out = []
    for combo in itertools.product(*(range(len(o)) for o in per_rel)):
        canon = min(tuple(img[p][k] for img, k in zip(images, combo)) for p in range(len(perms)))
        if canon in seen:
            continue
        seen.add(canon)
        facts = frozenset((r, args) for r, opts, k in zip(used, per_rel, combo) for args in opts[k])
        out.append(SourceInstance(facts))
        if budget is not None and len(out) > budget:
            return None
    return out


def brute_force_defect(s: Setting, domain: int = 3, budget: int | None = None):
    """(defect, instance) for the first maximal instance without a solution,
    (None, None) if all have one, or None when the search exceeds the budget.

    Lack of a solution is preserved when facts are added, so maximal
    FD-satisfying instances are the only ones worth trying.
    """
    insts = maximal_instances(s, domain, budget)
    if insts is None:
        return None
    for i in insts:
        d = instance_defect(s, i)
        if d is not None:
            return d, i
    return None, None
