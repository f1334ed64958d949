import dataclasses
import itertools
import random

import pytest

from rtlsym import bv
from rtlsym.errors import HarnessError, OscillationError
from rtlsym.harness import Budgets, harness_from_dict, validate_harness
from rtlsym.replay import simulate
from rtlsym.solver import SolverConfig, check
from rtlsym.symexec import SymbolicExecutor, init_state, run, settle_comb, step_cycle

from conftest import (MUX_HARNESS, SMALL, all_fixed, brute_force_traces, concrete_mismatches,
                      design_from, load, symbolic_bits)


def test_init_state_mux(mux):
    d, h = mux
    st = init_state(d, h)
    sel = d.signal("sel").index
    assert st.store[sel] == bv.mk_var("sel", 1, 0)
    assert bv.const_value(st.store[d.signal("din_0").index]) == 1
    assert bv.const_value(st.store[d.signal("din_1").index]) == 0
    assert bv.const_value(st.store[d.signal("mux_out").index]) == 0
    assert st.path_condition == [] and st.cycle == 0


@pytest.mark.parametrize("change,msg", [
    ({"symbolic": [{"signal": "selx", "bits": 1}]}, "unknown signal"),
    ({"symbolic": [{"signal": "sel", "bits": 8}]}, "declared 1"),
    ({"fixed": {"din_0": 1}}, "not covered"),
    ({"fixed": {"din_0": 1, "din_1": 0, "sel": 0}}, "both"),
    ({"fixed": {"din_0": 2, "din_1": 0}}, "does not fit"),
    ({"top": "other"}, "does not match"),
    ({"max_cycles": 0}, "max_cycles"),
    ({"clock": "sel", "symbolic": []}, "clock"),
])
def test_harness_errors(mux, change, msg):
    d, _ = mux
    with pytest.raises(HarnessError, match=msg):
        h = harness_from_dict(dict(MUX_HARNESS, **change))
        validate_harness(d, h)
        init_state(d, h)


def test_harness_schema_errors():
    with pytest.raises(HarnessError, match="unknown harness keys"):
        harness_from_dict(dict(MUX_HARNESS, sybmolic=[]))
    with pytest.raises(HarnessError, match="mode"):
        harness_from_dict(dict(MUX_HARNESS, symbolic=[{"signal": "sel", "bits": 1, "mode": "x"}]))


def test_settle_comb_forks_mux(mux):
    d, h = mux
    children = settle_comb(init_state(d, h), d, h)
    assert len(children) == 2
    out = d.signal("mux_out").index
    sel = bv.mk_var("sel", 1)
    c0, c1 = children
    assert c0.trace == [(0, 0)] and c1.trace == [(0, 1)]
    assert c0.path_condition == [bv.mk_op("eq", [sel, bv.mk_const(1, 0)])]
    assert bv.const_value(c0.store[out]) == 1 and bv.const_value(c1.store[out]) == 0
    for child, v in ((c0, 0), (c1, 1)):
        assert all(bv.eval_concrete(p, {("sel", 0): v}) == 1 for p in child.path_condition)


def test_concrete_branch_does_not_fork(mux):
    d, _ = mux
    h = harness_from_dict(dict(MUX_HARNESS, symbolic=[], fixed={"din_0": 1, "din_1": 0, "sel": 0}))
    (child,) = settle_comb(init_state(d, h), d, h)
    assert child.trace == [(0, 0)] and child.path_condition == []


def test_four_paths():
    d, h = load("four_paths")
    assert len(settle_comb(init_state(d, h), d, h)) == 4
    suite, stats = run(d, h)
    assert len(suite.tests) == 4
    assert len({tuple(t.expected_trace) for t in suite.tests}) == 4


def test_counter_four_paths_eight_vectors():
    d, h = load("counter")
    suite, stats = run(d, h)
    assert len(suite.tests) == 4 and suite.vector_count == 8
    seqs = {tuple(v["en"] for v in t.vectors) for t in suite.tests}
    assert seqs == set(itertools.product((0, 1), repeat=2))


def test_step_cycle_without_clocked_processes(mux):
    d, h = mux
    states = step_cycle(init_state(d, h), d, h)
    assert [s.trace for s in states] == [s.trace for s in settle_comb(init_state(d, h), d, h)]
    assert all(s.cycle == 1 and s.status == "complete" for s in states)


def test_mux_tests(mux):
    d, h = mux
    suite, stats = run(d, h)
    assert [t.vectors for t in suite.tests] == [
        [{"din_0": 1, "din_1": 0, "sel": 0}], [{"din_0": 1, "din_1": 0, "sel": 1}]]
    assert stats.tests == 2 and stats.paths_completed == 2 and stats.budget_exhausted is None


def test_zero_symbolic_inputs_single_test(mux):
    d, _ = mux
    h = harness_from_dict(dict(MUX_HARNESS, symbolic=[], fixed={"din_0": 1, "din_1": 0, "sel": 1}))
    suite, _ = run(d, h)
    assert len(suite.tests) == 1 and suite.tests[0].expected_trace == [(0, 1)]


def test_reset_cycles_do_not_fork():
    d, h = load("rcounter")
    suite, _ = run(d, h)
    # the reset cycle takes the reset arm on every path, with no fork
    assert all(t.expected_trace[0] == (0, 0) for t in suite.tests)
    assert len(suite.tests) == 2 ** (h.max_cycles - h.reset.cycles)
    assert all(t.vectors[0]["rst"] == 1 and t.vectors[1]["rst"] == 0 for t in suite.tests)


def test_hold_inputs_repeat_every_cycle():
    d, h = load("alu")
    suite, _ = run(d, h)
    for t in suite.tests:
        assert all(v == t.vectors[0] for v in t.vectors)


def test_unconstrained_inputs_default_to_zero():
    d = design_from("module m(input [3:0] a, b, output reg y); always @* if (a == 4'd3) y = 1; "
                    "else y = 0; endmodule")
    h = harness_from_dict({"top": "m", "symbolic": [{"signal": "a", "bits": 4},
                                                     {"signal": "b", "bits": 4}]})
    suite, _ = run(d, h)
    assert [t.vectors[0] for t in suite.tests] == [{"a": 3, "b": 0}, {"a": 0, "b": 0}]


@pytest.mark.parametrize("name", SMALL + ["fpu_like"])
def test_replay_soundness(name):
    d, h = load(name)
    suite, _ = run(d, h)
    assert suite.tests
    for t in suite.tests:
        assert simulate(d, h, t).trace == t.expected_trace


@pytest.mark.parametrize("name", SMALL)
def test_bounded_completeness(name):
    d, h = load(name)
    assert symbolic_bits(d, h) <= 12 and h.max_cycles <= 4
    suite, _ = run(d, h)
    assert {tuple(t.expected_trace) for t in suite.tests} == brute_force_traces(d, h)


@pytest.mark.parametrize("name", ["four_paths", "counter", "fsm", "alu"])
def test_path_conditions_pairwise_unsat(name):
    d, h = load(name)
    ex = SymbolicExecutor(d, h)
    states = ex.explore()
    assert len(states) > 1
    for a, b in itertools.combinations(states, 2):
        assert check(a.path_condition + b.path_condition).unsat


@pytest.mark.parametrize("name", SMALL + ["fpu_like"])
def test_concrete_degeneration(name):
    d, h = load(name)
    rng = random.Random(name)
    for _ in range(4):
        values = {s.signal: rng.randrange(1 << s.bits) for s in h.symbolic_inputs}
        assert concrete_mismatches(d, all_fixed(h, values)) == []


def test_determinism_and_jobs():
    d, h = load("fsm")
    a, sa = run(d, h)
    b, sb = run(d, h, jobs=4)
    assert [(t.vectors, t.expected_trace) for t in a.tests] == \
           [(t.vectors, t.expected_trace) for t in b.tests]
    assert sa.counters() == sb.counters()


def test_max_paths_budget():
    d, h = load("fsm")
    h = dataclasses.replace(h, budgets=Budgets(max_paths=5))
    suite, stats = run(d, h)
    assert len(suite.tests) == 5
    assert stats.budget_exhausted == "max_paths" and stats.paths_killed > 0


def test_solver_call_budget():
    d, h = load("fsm")
    h = dataclasses.replace(h, budgets=Budgets(max_solver_calls=3))
    suite, stats = run(d, h)
    assert stats.budget_exhausted == "max_solver_calls"
    for t in suite.tests:
        assert simulate(d, h, t).trace == t.expected_trace


def test_wall_clock_budget():
    d, h = load("fsm")
    h = dataclasses.replace(h, budgets=Budgets(wall_clock_s=1e-9))
    suite, stats = run(d, h)
    assert stats.budget_exhausted == "wall_clock"


def test_unknown_kills_paths_instead_of_pruning():
    d, h = load("alu")
    suite, stats = run(d, h, solver=SolverConfig(conflict_limit=0))
    full, _ = run(d, h)
    assert stats.paths_killed > 0
    assert len(suite.tests) <= len(full.tests)


def test_external_solver_same_suite():
    import shutil
    if shutil.which("z3") is None:
        pytest.skip("z3 binary not installed")
    d, h = load("alu")
    a, _ = run(d, h)
    b, _ = run(d, h, solver=SolverConfig(backend="external"))
    assert [t.expected_trace for t in a.tests] == [t.expected_trace for t in b.tests]
    for t in b.tests:
        assert simulate(d, h, t).trace == t.expected_trace


def test_oscillation_guard():
    d = design_from("module m(input a, output y); wire t; assign t = a; assign y = t; endmodule")
    h = harness_from_dict({"top": "m", "fixed": {"a": 1}})
    SymbolicExecutor(d, h)
    broken = dataclasses.replace(d, processes=list(reversed(d.processes)))
    with pytest.raises(OscillationError):
        SymbolicExecutor(broken, h)
