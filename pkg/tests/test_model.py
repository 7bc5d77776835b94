import pytest
from hypothesis import given
from hypothesis import strategies as st

from rdfexchange.model import (Atom, ConstLit, ConstructorLibrary, Iri, IriApp,
                               IriConstructor, Mult, NotFull, NullFactory,
                               NullIri, NullLit, OverlapError, RawRule,
                               RelationalSchema, Setting, ShapeSchema,
                               SourceInstance, StTgd, TripleAtom, TypeAtom,
                               TypedGraph, Var, check_library, make_iri,
                               normalize_tgds, validate_setting)


def ctor(name, params, text):
    return IriConstructor.from_template(name, params, text)


def test_value_variants_are_disjoint():
    vals = [Iri("a"), ConstLit("a"), NullIri(0), NullLit(0)]
    assert len(set(vals)) == 4
    assert [v.is_literal for v in vals] == [False, True, False, True]
    assert [v.is_null for v in vals] == [False, False, True, True]


def test_values_sort_by_variant_then_payload():
    vals = [NullLit(1), ConstLit("b"), Iri("z"), NullIri(3), ConstLit("a"), Iri("a")]
    assert sorted(vals) == [Iri("a"), Iri("z"), ConstLit("a"), ConstLit("b"), NullIri(3), NullLit(1)]


def test_null_factory_shares_one_counter():
    f = NullFactory()
    assert [f.lit(), f.iri(), f.lit()] == [NullLit(0), NullIri(1), NullLit(2)]


def test_fd_positions():
    from rdfexchange.model import FunctionalDependency
    r = RelationalSchema({"Bug": ("bid", "descr", "uid")})
    assert r.positions(FunctionalDependency("Bug", ("bid",), ("descr", "uid"))) == ((0,), (1, 2))


def test_instance_concreteness():
    assert SourceInstance(frozenset({("R", (ConstLit("a"),))})).is_concrete
    assert not SourceInstance(frozenset({("R", (NullLit(0),))})).is_concrete


@pytest.mark.parametrize("c, args, expected", [
    (("bug2iri", ["bid"], "bug:{bid}"), ["2"], "bug:2"),
    (("usr2iri", ["uid"], "usr:{uid}"), [""], "usr:"),
    (("pair2iri", ["a", "b"], "p:{a}-{b}"), ["x/y", "z"], "p:x%2Fy-z"),
])
def test_make_iri(c, args, expected):
    assert make_iri(ctor(*c), args) == expected


def test_make_iri_keeps_unreserved_characters():
    assert make_iri(ctor("f", ["x"], "f:{x}"), ["Az09-._~"]) == "f:Az09-._~"


def test_make_iri_escapes_separator_inside_arguments():
    c = ctor("pair", ["a", "b"], "p:{a}-{b}")
    assert make_iri(c, ["1-2", "3"]) != make_iri(c, ["1", "2-3"])


def test_make_iri_rejects_wrong_arity():
    with pytest.raises(ValueError):
        make_iri(ctor("f", ["x"], "f:{x}"), ["1", "2"])


@given(st.lists(st.text(max_size=6), min_size=2, max_size=2),
       st.lists(st.text(max_size=6), min_size=2, max_size=2))
def test_make_iri_is_injective(a, b):
    c = ctor("pair", ["a", "b"], "p:{a}-{b}")
    assert (make_iri(c, a) == make_iri(c, b)) == (a == b)


@given(st.text(min_size=1, max_size=3, alphabet="-:/ab"),
       st.lists(st.text(alphabet="-:/ab", max_size=4), min_size=4, max_size=4))
def test_make_iri_injective_for_any_separator(sep, xs):
    c = ctor("pair", ["a", "b"], "p:{a}" + sep + "{b}")
    assert (make_iri(c, xs[:2]) == make_iri(c, xs[2:])) == (xs[:2] == xs[2:])


def test_constructor_problems():
    assert ctor("f", ["x", "y"], "f:{x}{y}").problems()
    assert ctor("f", ["x", "y"], "f:{x}").problems()
    assert not ctor("f", ["x", "y"], "f:{x}/{y}").problems()


def test_check_library():
    check_library(ConstructorLibrary({"bug2iri": ctor("bug2iri", ["bid"], "bug:{bid}"),
                                      "usr2iri": ctor("usr2iri", ["uid"], "usr:{uid}")}))
    check_library(ConstructorLibrary({"f": ctor("f", ["x"], "a:{x}")}))
    with pytest.raises(OverlapError) as e:
        check_library(ConstructorLibrary({"f": ctor("f", ["x"], "e:{x}"),
                                          "g": ctor("g", ["x", "y"], "e:{x}-{y}")}))
    assert (e.value.first, e.value.second) == ("f", "g")


@given(st.lists(st.text(alphabet="ab:", min_size=1, max_size=3), min_size=2, max_size=4, unique=True),
       st.lists(st.text(alphabet="ab:-", max_size=3), min_size=4, max_size=4))
def test_accepted_libraries_have_disjoint_ranges(prefixes, args):
    lib = ConstructorLibrary({f"c{k}": ctor(f"c{k}", ["x"], p + "{x}") for k, p in enumerate(prefixes)})
    try:
        check_library(lib)
    except OverlapError:
        return
    images = [{make_iri(c, [a]) for a in args} for c in lib.constructors.values()]
    for i in range(len(images)):
        for j in range(i + 1, len(images)):
            assert not images[i] & images[j]


def test_mult_flags():
    assert [m.functional for m in Mult] == [True, True, False, False]
    assert [m.required for m in Mult] == [True, False, False, True]


def _bug_rule():
    b = IriApp("bug2iri", ("b",))
    return RawRule((Atom("Bug", ("b", "d", "u")),),
                   (TripleAtom(b, ":descr", Var("d")), TypeAtom("TBug", b),
                    TripleAtom(b, ":rep", IriApp("usr2iri", ("u",)))), "rule1")


def test_normalize_splits_heads():
    out = normalize_tgds([_bug_rule()])
    assert [t.label for t in out] == ["rule1#1", "rule1#2", "rule1#3"]
    assert all(t.body == _bug_rule().body for t in out)


def test_normalize_keeps_single_head_rule():
    raw = RawRule((Atom("R", ("x",)),), (TypeAtom("T", IriApp("f", ("x",))),), "r")
    assert normalize_tgds([raw]) == [StTgd(raw.body, raw.heads[0], "r")]


def test_normalize_rejects_unbound_head_variable():
    raw = RawRule((Atom("R", ("x",)),), (TripleAtom(IriApp("f", ("x",)), ":p", Var("y")),), "r")
    with pytest.raises(NotFull) as e:
        normalize_tgds([raw])
    assert e.value.variable == "y"


def test_rename_suffixes_every_variable():
    t = normalize_tgds([_bug_rule()])[2].rename("@1")
    assert t.body[0].args == ("b@1", "d@1", "u@1")
    assert t.head.obj == IriApp("usr2iri", ("u@1",))


def test_validate_empty_setting():
    assert validate_setting(Setting()) == []


def test_validate_reports_unknown_type():
    s = Setting(RelationalSchema({"R": ("a",)}), ShapeSchema(("T",), {}),
                (StTgd((Atom("R", ("x",)),), TypeAtom("TGhost", IriApp("f", ("x",))), "r"),),
                ConstructorLibrary({"f": ctor("f", ["x"], "f:{x}")}))
    assert [d.message for d in validate_setting(s)] == ["unknown type TGhost"]


def test_validate_collects_every_problem():
    s = Setting(RelationalSchema({"R": ("a",)}), ShapeSchema((), {}),
                (StTgd((Atom("Q", ("x",)),), TypeAtom("T", IriApp("g", ("x",))), "r"),), ConstructorLibrary())
    assert len(validate_setting(s)) >= 3


def test_typed_graph_rejects_literal_subjects_and_typed_literals():
    with pytest.raises(ValueError):
        TypedGraph(frozenset({(ConstLit("x"), ":p", ConstLit("y"))}), {})
    with pytest.raises(ValueError):
        TypedGraph(frozenset(), {NullLit(0): {"T"}})


def test_typed_graph_nodes_and_equality():
    a, b = Iri("a"), NullIri(0)
    g = TypedGraph(frozenset({(a, ":p", ConstLit("v"))}), {b: {"T"}, a: set()})
    assert g.nodes() == {a, ConstLit("v"), b}
    assert g == TypedGraph(g.triples, {b: frozenset({"T"})})
    assert g.type_facts() == [(b, "T")]
