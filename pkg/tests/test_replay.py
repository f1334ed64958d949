import dataclasses
import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rtlsym.elaborate import XOp, XSig
from rtlsym.errors import DesignMismatch, SettleDivergence, VectorError
from rtlsym.harness import harness_from_dict
from rtlsym.replay import (CoverageData, format_table, merge, pct, report, simulate,
                           simulate_suite)
from rtlsym.suite import format_suite, parse_suite
from rtlsym.symexec import TestCase, run

from conftest import design_from, load


def mux_test(sel, d0=1, d1=0):
    return TestCase(0, [{"din_0": d0, "din_1": d1, "sel": sel}], None)


def test_simulate_mux(mux):
    d, h = mux
    out = d.signal("mux_out").index
    r0 = simulate(d, h, mux_test(0))
    assert r0.state.values[out] == 1 and r0.trace == [(0, 0)]
    assert r0.coverage.branch_hits == [[1, 0]]
    r1 = simulate(d, h, mux_test(1))
    assert r1.trace == [(0, 1)] and r1.coverage.branch_hits == [[0, 1]]
    both = merge(r0.coverage, r1.coverage)
    assert both.branch_hits == [[1, 1]] and both.stmt_hits == [1, 1]
    rep = report(d, both)
    assert (rep.stmt_pct, rep.branch_pct) == (100.0, 100.0)
    assert rep.detail == []


def test_counter_counts_to_three():
    d, h = load("counter")
    h = dataclasses.replace(h, max_cycles=3)
    r = simulate(d, h, TestCase(0, [{"en": 1}] * 3, None))
    assert r.state.values[d.signal("cnt").index] == 3
    assert r.state.cycle == 3


def test_report_empty_and_rounding(mux):
    d, _ = mux
    rep = report(d, CoverageData.empty(d))
    assert (rep.stmt_pct, rep.branch_pct) == (0.0, 0.0)
    assert (rep.stmt_covered, rep.stmt_total, rep.branch_total) == (0, 2, 2)
    assert pct(63, 64) == 98.4
    assert pct(1, 3) == 33.3 and pct(2, 3) == 66.7
    assert pct(1, 8) == 12.5 and pct(1, 16) == 6.3   # 6.25 rounds half up
    assert pct(0, 0) == 100.0


def test_detail_rows_sorted_and_formatted():
    d, h = load("fsm")
    r = simulate(d, h, TestCase(0, [{"rst": 0, "cmd": 0}] * 2, None))
    rep = report(d, r.coverage)
    keys = [(row.loc.line, row.loc.col) for row in rep.detail]
    assert keys == sorted(keys) and rep.detail
    line = rep.detail[0].line()
    path, lno, rest = line.split(":", 2)
    col, kind, hits = rest.split()
    assert path.endswith("fsm.v") and lno.isdigit() and col.isdigit()
    assert kind in ("kind=stmt", "kind=branch-arm") and hits == "hits=0"
    table = format_table(rep)
    assert "Statement" in table and "Uncovered:" in table
    json.dumps(rep.summary())


def test_merge_design_mismatch(mux):
    d, _ = mux
    f, _ = load("fsm")
    with pytest.raises(DesignMismatch):
        merge(CoverageData.empty(d), CoverageData.empty(f))
    with pytest.raises(DesignMismatch):
        report(f, CoverageData.empty(d))


def _coverage(shape):
    n_stmt, arms = shape
    return st.builds(CoverageData,
                     st.lists(st.integers(0, 5), min_size=n_stmt, max_size=n_stmt),
                     st.tuples(*[st.lists(st.integers(0, 5), min_size=a, max_size=a)
                                 for a in arms]).map(list))


SHAPE = (4, (2, 3, 2))


@settings(max_examples=150)
@given(_coverage(SHAPE), _coverage(SHAPE), _coverage(SHAPE))
def test_merge_algebra(a, b, c):
    empty = CoverageData([0] * SHAPE[0], [[0] * n for n in SHAPE[1]])
    assert merge(a, empty) == a
    assert merge(a, b) == merge(b, a)
    assert merge(merge(a, b), c) == merge(a, merge(b, c))


def test_coverage_monotonicity():
    d, h = load("alu")
    suite, _ = run(d, h)
    cov = CoverageData.empty(d)
    prev = report(d, cov)
    for t in suite.tests:
        new = merge(cov, simulate(d, h, t).coverage)
        assert all(x >= y for x, y in zip(new.stmt_hits, cov.stmt_hits))
        assert all(x >= y for p, q in zip(new.branch_hits, cov.branch_hits) for x, y in zip(p, q))
        rep = report(d, new)
        assert rep.stmt_pct >= prev.stmt_pct and rep.branch_pct >= prev.branch_pct
        cov, prev = new, rep


def test_parallel_replay_matches_serial():
    d, h = load("fsm")
    suite, _ = run(d, h)
    a, ta = simulate_suite(d, h, suite, jobs=1)
    b, tb = simulate_suite(d, h, suite, jobs=4)
    assert a == b and ta == tb


@pytest.mark.parametrize("vec,msg", [
    ({"din_0": 1, "din_1": 0}, "no value"),
    ({"din_0": 1, "din_1": 0, "sel": 2}, "exceeds"),
    ({"din_0": 1, "din_1": 0, "sel": 0, "mux_out": 1}, "not controlled"),
])
def test_vector_errors(mux, vec, msg):
    d, h = mux
    with pytest.raises(VectorError, match=msg):
        simulate(d, h, TestCase(0, [vec], None))


def test_settle_divergence():
    d = design_from("module m(input a, output y); assign y = ~a; endmodule")
    p = d.comb[0]
    y = d.signal("y").index
    loop = dataclasses.replace(p.body, rhs=XOp("not", (XSig(y, 1),), 1))
    broken = dataclasses.replace(d, processes=[dataclasses.replace(p, body=loop)])
    h = harness_from_dict({"top": "m", "fixed": {"a": 0}})
    with pytest.raises(SettleDivergence):
        simulate(broken, h, TestCase(0, [{"a": 0}], None))


def test_suite_text_round_trip(mux):
    d, h = mux
    suite, _ = run(d, h)
    text = format_suite(suite)
    assert text.splitlines()[0] == "testsuite mux tests=2"
    assert "cycle 0: din_0=0x1 din_1=0x0 sel=0x1" in text
    again = parse_suite(text, suite.inputs)
    assert format_suite(again) == text
    # the trace line is optional
    bare = "\n".join(l for l in text.splitlines() if not l.startswith("trace")) + "\n"
    assert [t.vectors for t in parse_suite(bare).tests] == [t.vectors for t in suite.tests]


def test_suite_hex_padding():
    d, h = load("fpu_like")
    h = dataclasses.replace(h, max_cycles=1)
    suite, _ = run(d, h)
    line = format_suite(suite).splitlines()[3]
    assert line.startswith("cycle 0: opa=0x") and " fpu_op=0x" in line
    assert all(len(f.split("=0x")[1]) == {"opa": 2, "opb": 2}.get(f.split("=")[0], 1)
               for f in line.split()[2:])


@pytest.mark.parametrize("text,msg", [
    ("", "empty"),
    ("testsuite mux tests=1\ntest 0\ncycle 0: sel=0x1\n", "end"),
    ("testsuite mux tests=2\ntest 0\ncycle 0: sel=0x1\nend\n", "announces"),
    ("testsuite mux tests=1\ntest 0\ncycle 1: sel=0x1\nend\n", "cycle 0"),
    ("testsuite mux tests=1\ntest 0\ncycle 0: sel=1\nend\n", "hex"),
    ("testsuite mux tests=1\ntest 0\ncycle 0: sel=0x2\nend\n", "exceeds"),
    ("testsuite mux tests=1\ntest 0\ncycle 0: foo=0x0\nend\n", "unknown input"),
])
def test_suite_parse_errors(text, msg):
    with pytest.raises(VectorError, match=msg):
        parse_suite(text, [("din_0", 1), ("din_1", 1), ("sel", 1)])
