"""Static consistency checking of exchange settings.

A setting is consistent when every FD-satisfying source instance has a
solution.  Two independent failure modes are checked:

* value: some accessible constructor node can receive two different objects
  for a functional predicate (decided by chasing a symbolic tableau);
* node kind: some reachable combination of required types demands a node be
  both a literal and an IRI.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterator

from .chase import fd_chase
from .model import (LITERAL, ConstLit, IriApp, LitConst, NullLit, Setting,
                    SourceInstance, StTgd, TripleAtom, TypeAtom, Value, Var)
from .solution import is_mixed, provenance_chain, type_set_closure


# ---------------------------------------------------------------- accessibility


@dataclass(frozen=True)
class AccessSequence:
    steps: tuple[StTgd, ...]
    types: tuple[str, ...]
    ctors: tuple[str, ...]
    preds: tuple[str, ...]

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(t.label for t in self.steps)

    @property
    def end(self) -> tuple[str, str]:
        return self.types[-1], self.ctors[-1]

    def to_dict(self):
        return {"steps": list(self.labels), "types": list(self.types),
                "constructors": list(self.ctors), "predicates": list(self.preds)}


def _seeds(s: Setting):
    for t in s.tgds:
        if isinstance(t.head, TypeAtom):
            yield t, t.head.type, t.head.subject.ctor


def _moves(s: Setting):
    """(type, ctor) -> [(tgd, pred, next_type, next_ctor)] in rule order."""
    out: dict[tuple[str, str], list] = {}
    for t in s.tgds:
        h = t.head
        if not isinstance(h, TripleAtom) or not isinstance(h.obj, IriApp):
            continue
        for T in s.shapes.types:
            rule = s.shapes.delta.get((T, h.pred))
            if rule is None or rule[0] == LITERAL:
                continue
            out.setdefault((T, h.subject.ctor), []).append((t, h.pred, rule[0], h.obj.ctor))
    return out


def access_pairs(s: Setting) -> set[tuple[str, str]]:
    moves = _moves(s)
    seen = set()
    queue = deque()
    for _, T, f in _seeds(s):
        if (T, f) not in seen:
            seen.add((T, f))
            queue.append((T, f))
    while queue:
        node = queue.popleft()
        for _, _, T2, f2 in moves.get(node, ()):
            if (T2, f2) not in seen:
                seen.add((T2, f2))
                queue.append((T2, f2))
    return seen


def access_sequences(s: Setting, T: str, f: str, limit: int | None = None,
                     max_repeat: int = 1) -> Iterator[AccessSequence]:
    """Sequences reaching (T, f), shortest first, then by rule order.

    A sequence is elementary when no (rule, type) step repeats; ``max_repeat``
    relaxes that to at most that many occurrences of each step.
    """
    moves = _moves(s)
    order = {t.label: k for k, t in enumerate(s.tgds)}
    seeds = sorted(_seeds(s), key=lambda x: order[x[0].label])
    # backwards reachability towards the goal prunes dead branches
    back: dict[tuple[str, str], set] = {}
    for src, lst in moves.items():
        for _, _, T2, f2 in lst:
            back.setdefault((T2, f2), set()).add(src)
    useful = {(T, f)}
    queue = deque([(T, f)])
    while queue:
        for prev in back.get(queue.popleft(), ()):
            if prev not in useful:
                useful.add(prev)
                queue.append(prev)
    n_states = len({(t.label, T2) for lst in moves.values() for t, _, T2, _ in lst})
    max_len = (n_states + 1) * max_repeat
    emitted = 0
    for length in range(1, max_len + 1):
        for seq in _paths(seeds, moves, useful, (T, f), length, max_repeat):
            yield seq
            emitted += 1
            if limit is not None and emitted >= limit:
                return


def _paths(seeds, moves, useful, goal, length, max_repeat):
    counts: dict[tuple[str, str], int] = {}
    steps, types, ctors, preds = [], [], [], []

    def push(key):
        counts[key] = counts.get(key, 0) + 1

    def go():
        cur = (types[-1], ctors[-1])
        if len(steps) == length:
            if cur == goal:
                yield AccessSequence(tuple(steps), tuple(types), tuple(ctors), tuple(preds))
            return
        for t, p, T2, f2 in moves.get(cur, ()):
            key = (t.label, T2)
            if (T2, f2) not in useful or counts.get(key, 0) >= max_repeat:
                continue
            push(key)
            steps.append(t), types.append(T2), ctors.append(f2), preds.append(p)
            yield from go()
            steps.pop(), types.pop(), ctors.pop(), preds.pop()
            counts[key] -= 1

    for t, T0, f0 in seeds:
        if (T0, f0) not in useful:
            continue
        key = (t.label, T0)
        counts = {key: 1}
        steps, types, ctors, preds = [t], [T0], [f0], []
        yield from go()


# ---------------------------------------------------------------- contentious pairs


Sort = tuple[str, str, str]


def contentious(s: Setting) -> list[tuple[Sort, StTgd, StTgd]]:
    """Pairs of rules that can both write functional predicate p of an
    accessible (T, f) node.  Distinct pairs come before self-pairs."""
    out = []
    for T, f in sorted(access_pairs(s)):
        for (T2, p), (_, m) in sorted(s.shapes.delta.items()):
            if T2 != T or not m.functional:
                continue
            prod = [t for t in s.tgds if isinstance(t.head, TripleAtom)
                    and t.head.subject.ctor == f and t.head.pred == p]
            for a in range(len(prod)):
                for b in range(a + 1, len(prod)):
                    out.append(((T, f, p), prod[a], prod[b]))
            for t in prod:
                out.append(((T, f, p), t, t))
    return out


# ---------------------------------------------------------------- violation tableau


def _out_args(h) -> tuple[str, ...]:
    if isinstance(h, TypeAtom):
        return h.subject.args
    return h.obj.args


def violation_instance(pi: AccessSequence, sigma: StTgd, sigma_prime: StTgd
                       ) -> tuple[SourceInstance, dict[str, NullLit]]:
    """Symbolic source instance chaining pi into both contentious rules.

    Variables are renamed apart per position (``x@0``, ``x@1``, ..., ``x@a``,
    ``x@b``); nulls are allocated in order of first appearance.
    """
    rules = [t.rename(f"@{k}") for k, t in enumerate(pi.steps)]
    rules += [sigma.rename("@a"), sigma_prime.rename("@b")]
    parent: list[int] = []
    h: dict[str, int] = {}

    def find(k: int) -> int:
        while parent[k] != k:
            parent[k] = parent[parent[k]]
            k = parent[k]
        return k

    def fresh() -> int:
        parent.append(len(parent))
        return parent[-1]

    def bind(var: str, null: int):
        if var in h:
            a, b = find(h[var]), find(null)
            if a != b:
                parent[max(a, b)] = min(a, b)
        else:
            h[var] = null

    n = len(pi.steps)
    for k, r in enumerate(rules):
        if k > 0:
            link = rules[min(k, n) - 1].head
            ys = _out_args(link)
            xs = r.head.subject.args
            if len(xs) != len(ys):
                raise ValueError(f"arity mismatch between {link} and {r.head}")
            for x, y in zip(xs, ys):
                bind(x, h[y])
        for v in r.vars():
            if v not in h:
                h[v] = fresh()
    assignment = {v: NullLit(find(k)) for v, k in h.items()}
    facts = set()
    for r in rules:
        for a in r.body:
            facts.add((a.relation, tuple(assignment[v] for v in a.args)))
    return SourceInstance(frozenset(facts)), assignment


def _image(term, suffix: str, assignment, unifier):
    if isinstance(term, LitConst):
        return ConstLit(term.text)
    if isinstance(term, Var):
        v = assignment[term.name + suffix]
        return unifier.get(v, v)
    args = tuple(unifier.get(assignment[a + suffix], assignment[a + suffix]) for a in term.args)
    return (term.ctor, args)


# ---------------------------------------------------------------- witnesses and reports


@dataclass(frozen=True)
class ViolationWitness:
    sort: Sort
    pi: AccessSequence
    sigma: StTgd
    sigma_prime: StTgd
    tableau: SourceInstance
    assignment: dict
    chased: SourceInstance
    final_objects: tuple
    kind: str = "value"

    def to_dict(self):
        from .textio import render_instance
        return {"kind": self.kind, "sort": list(self.sort), "pi": self.pi.to_dict(),
                "sigma": self.sigma.label, "sigma_prime": self.sigma_prime.label,
                "tableau": render_instance(self.tableau).splitlines(),
                "chased": render_instance(self.chased).splitlines(),
                "final_objects": [_show(o) for o in self.final_objects]}

    def describe(self) -> str:
        from .textio import render_instance
        T, f, p = self.sort
        lines = [f"value inconsistency on ({T}, {f}, {p})",
                 f"  access sequence: {' '.join(self.pi.labels)}",
                 f"  contentious rules: {self.sigma.label}, {self.sigma_prime.label}",
                 f"  objects after FD chase: {_show(self.final_objects[0])} vs {_show(self.final_objects[1])}",
                 "  tableau:"]
        lines += ["    " + line for line in render_instance(self.tableau).splitlines()]
        return "\n".join(lines)


def _show(obj) -> str:
    if isinstance(obj, tuple):
        return f"{obj[0]}({', '.join(map(repr, obj[1]))})"
    return repr(obj)


@dataclass(frozen=True)
class NodeKindWitness:
    set: frozenset
    chain: tuple
    kind: str = "node-kind"

    def to_dict(self):
        return {"kind": self.kind, "set": sorted(self.set),
                "chain": [[sorted(X), o if isinstance(o, str) else list(o)] for X, o in self.chain]}

    def describe(self) -> str:
        steps = []
        for X, o in self.chain:
            how = f"root of {o[1]}" if isinstance(o, tuple) else f"via {o}"
            steps.append(f"{{{', '.join(sorted(X))}}} ({how})")
        return "node-kind inconsistency: " + " -> ".join(steps)


@dataclass(frozen=True)
class DirectClash:
    type: str
    ctor: str
    pred: str
    rule: str
    obj: str
    kind: str = "direct-clash"

    def to_dict(self):
        return {"kind": self.kind, "type": self.type, "constructor": self.ctor,
                "predicate": self.pred, "rule": self.rule, "object": self.obj}

    def describe(self) -> str:
        return (f"direct clash: rule {self.rule} writes {self.obj} on {self.pred} of "
                f"({self.type}, {self.ctor}) against the shape's node kind")


@dataclass
class Verdict:
    status: str  # "consistent", "inconsistent" or "inconclusive"
    witnesses: list = field(default_factory=list)

    @property
    def consistent(self) -> bool:
        return self.status == "consistent"

    def to_dict(self):
        return {"status": self.status, "witnesses": [w.to_dict() for w in self.witnesses]}


def check_value_consistency(s: Setting, max_sequences: int | None = None,
                            exhaustive: bool = False, max_repeat: int = 1) -> Verdict:
    witnesses = []
    truncated = False
    cache: dict[tuple[str, str], list[AccessSequence]] = {}
    for sort, sigma, sigma_p in contentious(s):
        T, f, _ = sort
        if (T, f) not in cache:
            ask = None if max_sequences is None else max_sequences + 1
            seqs = list(access_sequences(s, T, f, ask, max_repeat))
            if max_sequences is not None and len(seqs) > max_sequences:
                truncated = True
                seqs = seqs[:max_sequences]
            cache[(T, f)] = seqs
        for pi in cache[(T, f)]:
            w = _try(s, sort, pi, sigma, sigma_p)
            if w is not None:
                witnesses.append(w)
                if not exhaustive:
                    return Verdict("inconsistent", witnesses)
                break
    if witnesses:
        return Verdict("inconsistent", witnesses)
    return Verdict("inconclusive" if truncated else "consistent")


def _try(s, sort, pi, sigma, sigma_p):
    tableau, h = violation_instance(pi, sigma, sigma_p)
    res = fd_chase(tableau, s.source)
    # all-null tableaux never fail
    t = _image(sigma.head.obj, "@a", h, res.unifier)
    t2 = _image(sigma_p.head.obj, "@b", h, res.unifier)
    if t == t2:
        return None
    return ViolationWitness(sort, pi, sigma, sigma_p, tableau, h, res.instance, (t, t2))


def cotype_roots(s: Setting) -> list[tuple[frozenset, tuple]]:
    acc = access_pairs(s)
    out = []
    for f in s.library.constructors:
        X = frozenset(T for T, g in acc if g == f)
        if X:
            out.append((X, ("root", f)))
    return out


def check_node_kind(s: Setting, include_direct_clash: bool = True, exhaustive: bool = False) -> Verdict:
    witnesses: list = []
    order, parent = type_set_closure(cotype_roots(s), s.shapes)
    for X in order:
        if is_mixed(X):
            witnesses.append(NodeKindWitness(X, tuple(provenance_chain(X, parent))))
            if not exhaustive:
                return Verdict("inconsistent", witnesses)
    if include_direct_clash:
        for w in direct_clashes(s):
            witnesses.append(w)
            if not exhaustive:
                break
    return Verdict("inconsistent" if witnesses else "consistent", witnesses)


def direct_clashes(s: Setting) -> list[DirectClash]:
    out = []
    for T, f in sorted(access_pairs(s)):
        for t in s.tgds:
            h = t.head
            if not isinstance(h, TripleAtom) or h.subject.ctor != f:
                continue
            rule = s.shapes.delta.get((T, h.pred))
            if rule is None:
                continue
            wants_literal = rule[0] == LITERAL
            is_iri = isinstance(h.obj, IriApp)
            if wants_literal == is_iri:
                out.append(DirectClash(T, f, h.pred, t.label, str(h.obj)))
    return out


def check_consistency(s: Setting, max_sequences: int | None = None, exhaustive: bool = False,
                      include_direct_clash: bool = True, max_repeat: int = 1) -> Verdict:
    value = check_value_consistency(s, max_sequences, exhaustive, max_repeat)
    if value.witnesses and not exhaustive:
        return value
    kind = check_node_kind(s, include_direct_clash, exhaustive)
    witnesses = value.witnesses + kind.witnesses
    if witnesses:
        return Verdict("inconsistent", witnesses)
    return Verdict(value.status)


def materialize_counterexample(w: ViolationWitness, s: Setting | None = None) -> SourceInstance:
    """Ground every null of the chased tableau to its own fresh constant."""
    avoid = s.literal_constants() if s is not None else set()
    nulls = sorted({v for _, args in w.chased.facts for v in args if isinstance(v, NullLit)},
                   key=lambda v: v.id)
    names: dict[Value, ConstLit] = {}
    k = 0
    for v in nulls:
        while f"c{k}" in avoid:
            k += 1
        names[v] = ConstLit(f"c{k}")
        k += 1
    return SourceInstance(frozenset((rel, tuple(names.get(v, v) for v in args))
                                    for rel, args in w.chased.facts))
