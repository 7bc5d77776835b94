import pytest
from conftest import FIXTURES, load_instance, load_setting
from hypothesis import given
from hypothesis import strategies as st

from rdfexchange.model import ConstLit, Iri, NullIri, NullLit, TypedGraph
from rdfexchange.oracle import Cnf
from rdfexchange.query import Concat, Inv, NodeTest, Pred, Star
from rdfexchange.solution import renumber_nulls
from rdfexchange.textio import (ParseError, parse_dimacs, parse_graph,
                                parse_instance, parse_nre, parse_setting,
                                render_dimacs, render_graph, render_instance,
                                render_setting, tokenize)


def messages(text, parser=parse_setting):
    with pytest.raises(ParseError) as e:
        parser(text)
    return [d.message for d in e.value.diagnostics]


def test_bug_setting_counts():
    s = load_setting("bug.setting")
    assert len(s.source.relations) == 5
    assert len(s.source.fds) == 3
    assert len(s.library.constructors) == 2
    assert len(s.shapes.types) == 2
    assert len(s.tgds) == 7
    assert s.tgd("rule1#2").head.type == "TBug"


def test_fixtures_parse():
    for name in ("bug.setting", "chain.setting", "chain_keyed.setting"):
        load_setting(name)


def test_single_relation_setting():
    s = parse_setting("relation R(a)")
    assert dict(s.source.relations) == {"R": ("a",)}
    assert not s.tgds and not s.shapes.types and not s.library.constructors


def test_undeclared_target_type():
    assert messages("shape T { :p -> @U [1] }") == ["unknown type U"]


def test_diagnostics_carry_locations_and_recover():
    with pytest.raises(ParseError) as e:
        parse_setting("relation R(a)\nbogus statement\nrule R(x) => Triple(f(x), :p, y)\n", "x.setting")
    diags = e.value.diagnostics
    assert diags[0].location.file == "x.setting" and diags[0].location.line == 2
    assert len(diags) >= 2


def test_fd_forms():
    s = parse_setting("relation User(uid, name)\nfd User : uid -> name\nfd User:uid->name")
    assert s.source.fds[0] == s.source.fds[1]


def test_default_multiplicity_is_one():
    s = parse_setting("shape T { :p -> Literal }")
    assert s.shapes.delta[("T", ":p")][1].value == "1"


def test_render_setting_round_trips():
    for name in ("bug.setting", "chain_keyed.setting"):
        s = load_setting(name)
        assert parse_setting(render_setting(s)) == s


def test_bug_instance():
    s = load_setting("bug.setting")
    i = load_instance("bug.inst", s)
    assert len(i) == 10
    counts = {r: len(i.relation(r)) for r in s.source.relations}
    assert counts == {"User": 2, "Email": 1, "Track": 2, "Bug": 3, "Rel": 2}
    assert (ConstLit("1"), ConstLit("j@ex.com")) in i.relation("Email")


def test_instance_errors():
    s = parse_setting("relation User(uid, name)")
    assert len(parse_instance("", s.source)) == 0
    assert "arity" in messages("User(1)", lambda t: parse_instance(t, s.source))[0]
    assert "unknown relation" in messages("Nope(1)", lambda t: parse_instance(t, s.source))[0]


def test_instance_round_trip():
    s = load_setting("bug.setting")
    i = load_instance("bug.inst", s)
    assert parse_instance(render_instance(i), s.source) == i


def test_golden_j0_shape():
    lines = (FIXTURES / "bug.j0").read_text().splitlines()
    assert len(lines) == 18
    assert lines[0] == 'triple(<bug:1>, :descr, "Boom!").'


def test_empty_graph():
    assert render_graph(TypedGraph(frozenset(), {})) == ""
    assert parse_graph("") == TypedGraph(frozenset(), {})


def test_literal_subject_rejected():
    assert messages('triple("x", :p, "y").', parse_graph) == ["literal subject"]


def test_graph_round_trip_of_fixtures():
    for name in ("bug.j0", "bug.u0", "bug_solution.graph"):
        g = parse_graph((FIXTURES / name).read_text())
        assert parse_graph(render_graph(g)) == g


nodes = st.one_of(
    st.builds(Iri, st.text(alphabet="abc:/", min_size=1, max_size=4)),
    st.builds(NullIri, st.integers(0, 5)))
objects = st.one_of(nodes, st.builds(ConstLit, st.text(max_size=4)),
                    st.builds(NullLit, st.integers(6, 9)))
graphs = st.builds(
    lambda ts, typed: TypedGraph(frozenset(ts), {n: {t} for n, t in typed}),
    st.lists(st.tuples(nodes, st.sampled_from([":p", ":q", "http://x/y"]), objects), max_size=6),
    st.lists(st.tuples(nodes, st.sampled_from(["T", "U"])), max_size=3))


@given(graphs)
def test_render_parse_render_is_stable(g):
    text = render_graph(g)
    assert parse_graph(text) == g
    assert render_graph(parse_graph(text)) == text
    assert render_graph(renumber_nulls(g)).count("\n") == text.count("\n")


def test_parse_nre_examples():
    assert parse_nre("node(<bug:2>)/:related/:rep/:name") == Concat(Concat(Concat(
        NodeTest(Iri("bug:2")), Pred(":related")), Pred(":rep")), Pred(":name"))
    assert parse_nre("(:related)*") == Star(Pred(":related"))
    e = parse_nre("^:rep")
    assert e == Inv(Pred(":rep")) and not e.is_forward


def test_dimacs_round_trip():
    cnf = parse_dimacs("c comment\np cnf 3 2\n1 -2 0\n2 3 0\n")
    assert cnf == Cnf(3, ((1, -2), (2, 3)))
    assert parse_dimacs(render_dimacs(cnf)) == cnf


def test_tokenizer_keeps_arrow_after_names():
    kinds = [t.kind for t in tokenize("uid->name") if t.kind != "nl"]
    assert kinds == ["name", "arrow", "name"]
