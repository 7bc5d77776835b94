import random

import pytest
from conftest import FIXTURES
from hypothesis import given, settings
from hypothesis import strategies as st

from rdfexchange.chase import (KindClash, SourceInconsistent, check_pf,
                               core_pre_solution, fd_chase, satisfies_tgds,
                               validate_shapes)
from rdfexchange.model import (ConstLit, FunctionalDependency, Iri, NullLit,
                               RelationalSchema, SourceInstance, TypedGraph)
from rdfexchange.textio import parse_graph, parse_instance, parse_setting


def inst(*facts):
    return SourceInstance(frozenset(facts))


S2 = RelationalSchema({"S": ("a", "b")}, (FunctionalDependency("S", ("a",), ("b",)),))


def test_fd_chase_unifies_nulls_to_lower_id():
    res = fd_chase(inst(("S", (NullLit(3), NullLit(5))), ("S", (NullLit(3), NullLit(7)))), S2)
    assert res.ok
    assert res.unifier == {NullLit(7): NullLit(5)}
    assert len(res.instance) == 1


def test_fd_chase_prefers_constants():
    res = fd_chase(inst(("S", (NullLit(0), NullLit(1))), ("S", (NullLit(0), ConstLit("c")))), S2)
    assert res.unifier == {NullLit(1): ConstLit("c")}


def test_fd_chase_fails_on_distinct_constants():
    r = RelationalSchema({"User": ("uid", "name")}, (FunctionalDependency("User", ("uid",), ("name",)),))
    res = fd_chase(inst(("User", (ConstLit("1"), ConstLit("a"))), ("User", (ConstLit("1"), ConstLit("b")))), r)
    assert not res.ok
    assert res.failure == (r.fds[0], (ConstLit("a"), ConstLit("b")))


def test_fd_chase_cascades_through_lhs():
    r = RelationalSchema({"R": ("a", "b", "c")}, (FunctionalDependency("R", ("a",), ("b",)),
                                                  FunctionalDependency("R", ("b",), ("c",))))
    n = NullLit
    res = fd_chase(inst(("R", (n(0), n(1), ConstLit("x"))), ("R", (n(0), n(2), ConstLit("y")))), r)
    assert not res.ok


def test_fd_chase_accepts_bug_instance(bug):
    s, i = bug
    res = fd_chase(i, s.source)
    assert res.ok and res.unifier == {} and res.instance == i


# brute-force reference: merge classes pairwise until nothing changes
def reference_fd_chase(facts, fds, schema):
    cls = {v: {v} for _, args in facts for v in args}
    changed = True
    while changed:
        changed = False
        for fd in fds:
            lhs, rhs = schema.positions(fd)
            for r1, a in facts:
                for r2, b in facts:
                    if r1 != fd.relation or r2 != fd.relation:
                        continue
                    if all(cls[a[k]] is cls[b[k]] for k in lhs):
                        for k in rhs:
                            if cls[a[k]] is not cls[b[k]]:
                                merged = cls[a[k]] | cls[b[k]]
                                for v in merged:
                                    cls[v] = merged
                                changed = True
    for c in {id(c): c for c in cls.values()}.values():
        if sum(isinstance(v, ConstLit) for v in c) > 1:
            return None
    return {v: frozenset(c) for v, c in cls.items()}


values = st.one_of(st.builds(NullLit, st.integers(0, 4)), st.sampled_from([ConstLit("a"), ConstLit("b")]))
R3 = RelationalSchema({"R": ("a", "b", "c")})
fd_pool = [FunctionalDependency("R", l, r) for l, r in
           [(("a",), ("b",)), (("b",), ("c",)), (("a", "b"), ("c",)), (("c",), ("a",))]]


@settings(max_examples=200)
@given(st.lists(st.tuples(values, values, values), max_size=5),
       st.lists(st.sampled_from(fd_pool), max_size=3, unique=True), st.randoms())
def test_fd_chase_matches_reference(rows, fds, rnd):
    facts = [("R", r) for r in rows]
    ref = reference_fd_chase(facts, fds, R3)
    res = fd_chase(inst(*facts), fds, R3)
    assert res.ok == (ref is not None)
    if not res.ok:
        return
    for v, c in ref.items():
        assert res.resolve(v) == res.resolve(min(c, key=lambda x: (not isinstance(x, ConstLit), x)))
    # order independence and idempotence
    shuffled = list(fds)
    rnd.shuffle(shuffled)
    assert fd_chase(inst(*facts), shuffled, R3).instance == res.instance
    again = fd_chase(res.instance, fds, R3)
    assert again.ok and again.unifier == {} and again.instance == res.instance


def test_core_pre_solution_of_bug(bug):
    s, i = bug
    j0 = core_pre_solution(s, i)
    preds = [p for _, p, _ in j0.triples]
    assert {p: preds.count(p) for p in set(preds)} == {
        ":descr": 3, ":rep": 3, ":related": 2, ":name": 2, ":tracks": 2, ":email": 1}
    assert j0.type_facts() == [(Iri("bug:1"), "TBug"), (Iri("bug:2"), "TBug"), (Iri("bug:3"), "TBug"),
                               (Iri("usr:1"), "TUser"), (Iri("usr:2"), "TUser")]
    assert not satisfies_tgds(j0, s, i)


def test_core_pre_solution_of_empty_instance(bug):
    s, _ = bug
    assert core_pre_solution(s, inst()) == TypedGraph(frozenset(), {})


def test_core_pre_solution_kind_clash():
    s = parse_setting("""
        relation R(x, y)
        iri f(v) = "f:{v}"
        shape T { :p -> @U [*] }
        shape U { }
        rule R(x, y) => T(f(x))
        rule R(x, y) => Triple(f(x), :p, y)
    """)
    with pytest.raises(KindClash) as e:
        core_pre_solution(s, parse_instance("R(1, v)", s.source))
    assert (e.value.node, e.value.type, e.value.pred) == (ConstLit("v"), "U", ":p")


def test_core_pre_solution_rejects_fd_violations(bug):
    s, _ = bug
    with pytest.raises(SourceInconsistent):
        core_pre_solution(s, parse_instance("User(1, a)\nUser(1, b)", s.source))


def test_core_pre_solution_is_order_independent(bug):
    s, i = bug
    rev = type(s)(s.source, s.shapes, tuple(reversed(s.tgds)), s.library)
    assert core_pre_solution(rev, i) == core_pre_solution(s, i)


PF_SETTING = "shape T {{ :p -> Literal [{m}] }}"
PF_GRAPH = 'type(<a:1>, T).\ntriple(<a:1>, :p, "x").\ntriple(<a:1>, :p, "y").\n'


def test_check_pf():
    g = parse_graph(PF_GRAPH)
    bad = check_pf(g, parse_setting(PF_SETTING.format(m="1")).shapes)
    assert len(bad) == 1 and bad[0].witnesses == (ConstLit("x"), ConstLit("y"))
    assert check_pf(g, parse_setting(PF_SETTING.format(m="*")).shapes) == []


def test_check_pf_on_bug_j0(bug):
    s, i = bug
    assert check_pf(core_pre_solution(s, i), s.shapes) == []


def test_validate_hand_solution(bug):
    s, _ = bug
    g = parse_graph((FIXTURES / "bug_solution.graph").read_text())
    assert validate_shapes(g, s.shapes) == []


def test_validate_bug_j0_reports_missing_predicates(bug):
    s, i = bug
    bad = validate_shapes(core_pre_solution(s, i), s.shapes)
    assert [(v.kind, v.node, v.type, v.predicate) for v in bad] == [
        ("PE", Iri("usr:2"), "TUser", ":email"), ("PE", Iri("usr:2"), "TUser", ":tracks")]


def test_validate_empty_graph(bug):
    s, _ = bug
    assert validate_shapes(TypedGraph(frozenset(), {}), s.shapes) == []


def test_validate_reports_untyped_and_ill_kinded_objects():
    shapes = parse_setting("shape T { :p -> @U [*]; :q -> Literal [*] }\nshape U { }").shapes
    g = parse_graph('type(<a>, T).\ntriple(<a>, :p, <b>).\ntriple(<a>, :p, "v").\ntriple(<a>, :q, <c>).\n')
    kinds = sorted(v.kind for v in validate_shapes(g, shapes))
    assert kinds == ["TP", "TP-kind-clash", "TP-kind-clash"]


def test_satisfies_tgds_lists_missing_firings(bug):
    s, i = bug
    j0 = core_pre_solution(s, i)
    smaller = TypedGraph(j0.triples - {(Iri("usr:1"), ":name", ConstLit("Jose"))}, j0.typing)
    assert [label for label, _ in satisfies_tgds(smaller, s, i)] == ["rule3"]


def test_random_instances_give_fd_consistent_pre_solutions():
    from rdfexchange.oracle import random_instance, random_setting
    rng = random.Random(2)
    for _ in range(30):
        s = random_setting(rng)
        i = random_instance(rng, s)
        assert fd_chase(i, s.source).ok
        try:
            j0 = core_pre_solution(s, i)
        except KindClash:
            continue
        assert not satisfies_tgds(j0, s, i)
