"""Command-line entry point.

Exit codes: 0 consistent/true/ok, 1 inconsistent/false/no solution,
2 usage or parse error, 3 inconclusive.
"""

from __future__ import annotations

import argparse
import json
import sys

from .chase import KindClash, SourceInconsistent, check_pf, core_pre_solution, validate_shapes
from .consistency import ViolationWitness, check_consistency, materialize_counterexample
from .oracle import sat_setting
from .query import NotForward, NreSyntaxError, certain_bool, certain_pairs, parse_nre
from .solution import InconsistentSetting, NoSolution, universal_solution
from .textio import (ParseError, parse_dimacs, parse_graph, parse_instance,
                     parse_setting, render_graph, render_instance, render_pairs,
                     render_setting)

OK, NO, USAGE, INCONCLUSIVE = 0, 1, 2, 3


def _read(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _setting(path):
    return parse_setting(_read(path), path)


def _instance(path, s):
    return parse_instance(_read(path), s.source, path)


def _check(a, out, err):
    s = _setting(a.setting)
    v = check_consistency(s, max_sequences=a.max_sequences, exhaustive=a.all)
    if a.json:
        out.write(json.dumps(v.to_dict(), indent=2) + "\n")
    else:
        out.write(v.status + "\n")
        for w in v.witnesses:
            out.write(w.describe() + "\n")
    return {"consistent": OK, "inconsistent": NO}.get(v.status, INCONCLUSIVE)


def _chase(a, out, err):
    s = _setting(a.setting)
    i = _instance(a.instance, s)
    try:
        j0 = core_pre_solution(s, i)
    except (KindClash, SourceInconsistent) as e:
        err.write(f"{e}\n")
        return NO
    out.write(render_graph(j0))
    bad = check_pf(j0, s.shapes)
    for v in bad:
        err.write(f"{v}\n")
    return NO if bad else OK


def _solve(a, out, err):
    s = _setting(a.setting)
    i = _instance(a.instance, s)
    out.write(render_graph(universal_solution(s, i)))
    return OK


def _query(a, out, err):
    s = _setting(a.setting)
    i = _instance(a.instance, s)
    e = parse_nre(a.expr)
    if a.boolean:
        ans = certain_bool(s, i, e)
        out.write("true\n" if ans else "false\n")
        return OK if ans else NO
    out.write(render_pairs(certain_pairs(s, i, e)))
    return OK


def _validate(a, out, err):
    s = _setting(a.setting)
    g = parse_graph(_read(a.graph), a.graph)
    bad = validate_shapes(g, s.shapes)
    for v in bad:
        out.write(f"{v}\n")
    return NO if bad else OK


def _gen_sat(a, out, err):
    out.write(render_setting(sat_setting(parse_dimacs(_read(a.cnf)))))
    return OK


def _counterexample(a, out, err):
    s = _setting(a.setting)
    v = check_consistency(s, max_sequences=a.max_sequences)
    for w in v.witnesses:
        if isinstance(w, ViolationWitness):
            out.write(render_instance(materialize_counterexample(w, s)))
            return NO
    if v.witnesses:
        err.write("no value witness; node-kind witness follows\n")
        err.write(v.witnesses[0].describe() + "\n")
        return NO
    err.write(v.status + "\n")
    return OK if v.status == "consistent" else INCONCLUSIVE


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rdfx", description="relational-to-RDF exchange engine")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("check", help="decide consistency of a setting")
    p.add_argument("setting")
    p.add_argument("--max-sequences", type=int, default=None)
    p.add_argument("--json", action="store_true")
    p.add_argument("--all", action="store_true", help="collect every witness")
    p.set_defaults(run=_check)

    p = sub.add_parser("chase", help="print the core pre-solution")
    p.add_argument("setting")
    p.add_argument("instance")
    p.set_defaults(run=_chase)

    p = sub.add_parser("solve", help="print the universal simulation solution")
    p.add_argument("setting")
    p.add_argument("instance")
    p.set_defaults(run=_solve)

    p = sub.add_parser("query", help="certain answers to a forward NRE")
    p.add_argument("setting")
    p.add_argument("instance")
    p.add_argument("-e", "--expr", required=True)
    p.add_argument("--boolean", action="store_true")
    p.set_defaults(run=_query)

    p = sub.add_parser("validate", help="check a typed graph against the shapes")
    p.add_argument("setting")
    p.add_argument("graph")
    p.set_defaults(run=_validate)

    p = sub.add_parser("gen-sat", help="setting from a DIMACS CNF")
    p.add_argument("cnf")
    p.set_defaults(run=_gen_sat)

    p = sub.add_parser("counterexample", help="source instance with no solution")
    p.add_argument("setting")
    p.add_argument("--max-sequences", type=int, default=None)
    p.set_defaults(run=_counterexample)
    return ap


def run(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        a = build_parser().parse_args(argv)
    except SystemExit as e:
        return USAGE if e.code else OK
    try:
        return a.run(a, out, err)
    except ParseError as e:
        for d in e.diagnostics:
            err.write(f"{d}\n")
        return USAGE
    except NreSyntaxError as e:
        err.write(f"{e}\n")
        return USAGE
    except OSError as e:
        err.write(f"{e}\n")
        return USAGE
    except NotForward as e:
        err.write(f"{e}\n")
        return USAGE
    except InconsistentSetting as e:
        err.write("setting is inconsistent\n")
        for w in e.verdict.witnesses:
            err.write(w.describe() + "\n")
        return NO if e.verdict.status == "inconsistent" else INCONCLUSIVE
    except NoSolution as e:
        err.write(f"no solution: {e}\n")
        return NO


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
