import itertools
from pathlib import Path

import pytest

from rtlsym.elaborate import elaborate
from rtlsym.frontend import parse_file, parse_source
from rtlsym.harness import controlled_inputs, load_harness, reset_value

CORPUS = Path(__file__).resolve().parent.parent / "corpus"

# designs small enough for brute-force oracles (<= 12 symbolic bits in total)
SMALL = ["mux", "four_paths", "counter", "rcounter", "fsm", "alu"]
ALL = SMALL + ["fpu_like"]


def corpus_path(name, ext=".v"):
    return str(CORPUS / (name + ext))


def load(name):
    """Return (design, harness) for a corpus entry."""
    path = corpus_path(name)
    return elaborate(parse_file(path), file=path), load_harness(corpus_path(name, ".yaml"))


def design_from(src):
    return elaborate(parse_source(src))


def all_vector_sequences(design, harness):
    """Every concrete input sequence the harness admits (brute force)."""
    fixed = dict(harness.fixed_inputs)
    per_symbol = []   # (signal, cycle or None for hold, width)
    for s in harness.symbolic_inputs:
        w = design.signal(s.signal).width
        if s.mode == "hold":
            per_symbol.append((s.signal, None, w))
        else:
            per_symbol.extend((s.signal, k, w) for k in range(harness.max_cycles))
    ranges = [range(1 << w) for _, _, w in per_symbol]
    for combo in itertools.product(*ranges):
        vectors = []
        for k in range(harness.max_cycles):
            vec = {}
            for sig in controlled_inputs(design, harness):
                name = sig.name
                if name in fixed:
                    vec[name] = fixed[name]
                elif harness.reset is not None and name == harness.reset.signal:
                    vec[name] = reset_value(harness, k)
            for (name, cyc, _), v in zip(per_symbol, combo):
                if cyc is None or cyc == k:
                    vec[name] = v
            vectors.append(vec)
        yield vectors


def symbolic_bits(design, harness):
    total = 0
    for s in harness.symbolic_inputs:
        w = design.signal(s.signal).width
        total += w if s.mode == "hold" else w * harness.max_cycles
    return total


@pytest.fixture
def mux():
    return load("mux")


MUX_HARNESS = {"top": "mux", "symbolic": [{"signal": "sel", "bits": 1}],
               "fixed": {"din_0": 1, "din_1": 0}, "max_cycles": 1}


def brute_force_traces(design, harness):
    """Set of branch-outcome sequences over every admissible input sequence."""
    from rtlsym.replay import Simulator

    sim = Simulator(design)
    return {tuple(sim.run(vs, harness.clock).trace) for vs in all_vector_sequences(design, harness)}


def all_fixed(harness, values):
    """Copy of ``harness`` with every symbolic input fixed to ``values[name]``."""
    import dataclasses

    fixed = list(harness.fixed_inputs) + [(s.signal, values[s.signal]) for s in harness.symbolic_inputs]
    return dataclasses.replace(harness, symbolic_inputs=(), fixed_inputs=tuple(fixed))


def concrete_mismatches(design, harness):
    """Compare settled symbolic stores with simulator snapshots; returns mismatch list."""
    from rtlsym import bv
    from rtlsym.replay import Simulator
    from rtlsym.symexec import SymbolicExecutor

    ex = SymbolicExecutor(design, harness, record_history=True)
    states = ex.explore()
    assert len(states) == 1
    st = states[0]
    test = ex.make_test(0, st, {})
    snaps = []
    final = Simulator(design).run(test.vectors, harness.clock, snapshots=snaps)
    bad = []
    for k, (sym, con) in enumerate(zip(st.history, snaps)):
        for s in design.signals:
            v = bv.const_value(sym[s.index])
            if v != con[s.index]:
                bad.append((k, s.name, v, con[s.index]))
    for s in design.signals:
        if bv.const_value(st.store[s.index]) != final.state.values[s.index]:
            bad.append(("final", s.name))
    if len(st.history) != harness.max_cycles:
        bad.append(("cycles", len(st.history)))
    return bad


def pytest_terminal_summary(terminalreporter):
    try:
        import test_acceptance
    except ImportError:
        return
    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(test_acceptance.RESULTS):
            terminalreporter.write_line(line)
