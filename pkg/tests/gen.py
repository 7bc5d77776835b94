"""Random graphs and forward NREs shared by the property tests."""

import random

from rdfexchange.model import ConstLit, Iri, NullIri, NullLit, TypedGraph
from rdfexchange.query import (Any, Concat, Eps, Nest, NodeTest, Pred, Star,
                               Union)

PREDS = (":p", ":q", ":r")
IRIS = tuple(Iri(f"n:{k}") for k in range(3))
LITS = tuple(ConstLit(f"v{k}") for k in range(2))


def random_graph(rng: random.Random, nodes: int = 5, edges: int = 8, null_share: float = 0.5) -> TypedGraph:
    subjects, objects = [], []
    for k in range(nodes):
        literal = rng.random() < 0.3
        if rng.random() < null_share:
            v = NullLit(k) if literal else NullIri(k)
        else:
            v = rng.choice(LITS if literal else IRIS)
        objects.append(v)
        if not literal:
            subjects.append(v)
    subjects = subjects or [NullIri(nodes)]
    triples = {(rng.choice(subjects), rng.choice(PREDS), rng.choice(objects)) for _ in range(edges)}
    return TypedGraph(frozenset(triples), {})


def ground(g: TypedGraph, rng: random.Random) -> TypedGraph:
    """Map each null to a random same-kind constant: the result is simulated by g."""
    sub = {}
    for v in g.nodes():
        if v.is_null:
            sub[v] = rng.choice(LITS) if v.is_literal else rng.choice(IRIS + (v,))
    f = lambda v: sub.get(v, v)  # noqa: E731
    return TypedGraph(frozenset((f(s), p, f(o)) for s, p, o in g.triples), {})


def random_nre(rng: random.Random, depth: int = 4):
    if depth <= 1 or rng.random() < 0.3:
        r = rng.random()
        if r < 0.6:
            return Pred(rng.choice(PREDS))
        if r < 0.75:
            return Any()
        if r < 0.85:
            return Eps()
        return NodeTest(rng.choice(IRIS + LITS))
    kind = rng.choice(("cat", "cat", "union", "star", "nest"))
    if kind == "cat":
        return Concat(random_nre(rng, depth - 1), random_nre(rng, depth - 1))
    if kind == "union":
        return Union(random_nre(rng, depth - 1), random_nre(rng, depth - 1))
    if kind == "star":
        return Star(random_nre(rng, depth - 1))
    return Nest(random_nre(rng, depth - 1))
