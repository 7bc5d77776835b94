import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rdfexchange.chase import satisfies_tgds, validate_shapes
from rdfexchange.consistency import check_consistency
from rdfexchange.oracle import (Cnf, TooLarge, alt_solutions, brute_force_defect,
                                brute_sat, dpll_sat, instance_defect,
                                maximal_instances, random_cnf, random_setting,
                                sat_setting)
from rdfexchange.solution import is_simulated, universal_solution
from rdfexchange.textio import parse_instance, parse_setting, render_setting


def test_brute_sat_examples():
    assert brute_sat(Cnf(1, ((1,),)))
    assert not brute_sat(Cnf(1, ((1,), (-1,))))
    with pytest.raises(TooLarge):
        brute_sat(Cnf(30, ((1,),)))


def test_cnf_validation():
    with pytest.raises(ValueError):
        Cnf(1, ((2,),))
    with pytest.raises(ValueError):
        Cnf(1, ((),))


@settings(max_examples=300)
@given(st.integers(0, 10**6))
def test_solvers_agree(seed):
    cnf = random_cnf(random.Random(seed), 6, 8, 3)
    assert brute_sat(cnf) == dpll_sat(cnf)


def test_sat_setting_shape():
    s = sat_setting(Cnf(1, ((1,),)))
    assert len(s.source.relations) == 3
    assert len(s.library.constructors) == 2
    assert check_consistency(s).status == "inconsistent"
    assert parse_setting(render_setting(s)) == s


def test_sat_setting_unsatisfiable():
    assert check_consistency(sat_setting(Cnf(1, ((1,), (-1,))))).status == "consistent"


def test_sat_setting_without_clauses_is_inconsistent():
    # the empty conjunction is satisfiable, so the reduction must report a conflict
    cnf = Cnf(1, ())
    assert brute_sat(cnf)
    assert check_consistency(sat_setting(cnf)).status == "inconsistent"


def test_alt_solutions_bug(bug):
    s, i = bug
    u0 = universal_solution(s, i)
    for k in (1, 2):
        alts = alt_solutions(s, i, depth=k)
        assert len(alts) >= 2 and alts[0] == u0
        for g in alts:
            assert validate_shapes(g, s.shapes) == []
            assert satisfies_tgds(g, s, i) == []
            assert is_simulated(u0, g)


def test_alt_solutions_without_frontier(bug):
    s, _ = bug
    i = parse_instance('User(1, a)\nEmail(1, e)\nTrack(1, 1)\nBug(1, d, 1)', s.source)
    alts = alt_solutions(s, i)
    assert len(alts) == 1 and not any(n.is_null for n in alts[0].nodes())


def test_instance_defects():
    s = parse_setting('relation R(a, b)\niri f(x) = "f:{x}"\nshape T { :p -> Literal [1] }\n'
                      'rule R(x, y) => T(f(x)), Triple(f(x), :p, y)')
    assert instance_defect(s, parse_instance("R(1, a)", s.source)) is None
    assert instance_defect(s, parse_instance("R(1, a)\nR(1, b)", s.source)) == "pf"
    defect, inst = brute_force_defect(s)
    assert defect == "pf" and inst is not None


def test_maximal_instances_respect_keys():
    s = parse_setting('relation R(a, b)\nfd R : a -> b\niri f(x) = "f:{x}"\nshape T { }\n'
                      'rule R(x, y) => T(f(x))')
    insts = maximal_instances(s, domain=3)
    # up to renaming: every key gets a value, and values either repeat the key or not
    assert insts and all(len(i) == 3 for i in insts)


def test_random_settings_are_well_formed():
    from rdfexchange.model import validate_setting
    rng = random.Random(0)
    for _ in range(100):
        assert validate_setting(random_setting(rng)) == []
