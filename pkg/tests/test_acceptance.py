"""Acceptance criteria, one test each.

Every test records a PASS/FAIL line; the lines are printed as they happen
(visible with ``-s``) and repeated in the terminal summary.
"""

import contextlib
import json
import os
import random
import time

import pytest

from rtlsym.cli import main as cli_main
from rtlsym.elaborate import elaborate
from rtlsym.frontend import parse_file
from rtlsym.harness import load_harness
from rtlsym.replay import report, simulate_suite
from rtlsym.solver import SolverConfig, check
from rtlsym.symexec import run

import fuzzgen
from conftest import (SMALL, ALL, all_fixed, brute_force_traces, concrete_mismatches, corpus_path,
                      load, symbolic_bits)

RESULTS = []


@contextlib.contextmanager
def criterion(num, title):
    info = {}
    try:
        yield info
    except BaseException as exc:
        line = f"criterion {num} [{title}]: FAIL - {info.get('detail', '')} {type(exc).__name__}: {exc}"
        RESULTS.append(line.strip())
        print(line)
        raise
    line = f"criterion {num} [{title}]: PASS - {info.get('detail', '')}".rstrip(" -")
    RESULTS.append(line)
    print(line)


def test_c1_mux_end_to_end():
    with criterion(1, "mux end-to-end") as info:
        t0 = time.perf_counter()
        path = corpus_path("mux")
        d = elaborate(parse_file(path), file=path)
        h = load_harness(corpus_path("mux", ".yaml"))
        suite, _ = run(d, h)
        cov, _ = simulate_suite(d, h, suite)
        rep = report(d, cov)
        elapsed = time.perf_counter() - t0
        info["detail"] = (f"tests={len(suite.tests)} sel={[t.vectors[0]['sel'] for t in suite.tests]} "
                          f"stmt={rep.stmt_pct}% branch={rep.branch_pct}% time={elapsed:.3f}s")
        assert len(suite.tests) == 2
        assert sorted(t.vectors[0]["sel"] for t in suite.tests) == [0, 1]
        assert rep.stmt_pct == 100.0 and rep.branch_pct == 100.0
        assert elapsed < 1.0


def test_c2_four_paths():
    with criterion(2, "four-path design") as info:
        d, h = load("four_paths")
        suite, _ = run(d, h)
        traces = [tuple(t.expected_trace) for t in suite.tests]
        info["detail"] = f"tests={len(suite.tests)} distinct_traces={len(set(traces))}"
        assert len(suite.tests) == 4 and len(set(traces)) == 4


def test_c3_bounded_completeness():
    with criterion(3, "bounded-completeness oracle") as info:
        rows = []
        assert len(SMALL) >= 5
        for name in SMALL:
            d, h = load(name)
            bits = symbolic_bits(d, h)
            assert bits <= 12 and h.max_cycles <= 4, name
            t0 = time.perf_counter()
            suite, _ = run(d, h)
            generated = {tuple(t.expected_trace) for t in suite.tests}
            elapsed = time.perf_counter() - t0
            expected = brute_force_traces(d, h)
            rows.append(f"{name}:{len(generated)}/{len(expected)}@{elapsed:.2f}s")
            info["detail"] = " ".join(rows)
            assert generated == expected, name
            assert elapsed < 60.0, name


def test_c4_solver_fuzz():
    with criterion(4, "solver fuzz oracle") as info:
        rng = random.Random(2024)
        n = 10_000
        for i in range(n):
            seed = i % 3
            cfg = SolverConfig(seed=seed)
            ok, detail = fuzzgen.run_case(rng, lambda hs: check(hs, cfg), f"acc{i % 50}_")
            info["detail"] = f"cases={i + 1}"
            assert ok, detail
        info["detail"] = f"cases={n} all verdicts and models agree with enumeration"


def test_c5_concrete_degeneration():
    with criterion(5, "concrete-degeneration oracle") as info:
        checked = 0
        for name in ALL:
            d, h = load(name)
            rng = random.Random(f"c5{name}")
            for _ in range(5):
                values = {s.signal: rng.randrange(1 << s.bits) for s in h.symbolic_inputs}
                bad = concrete_mismatches(d, all_fixed(h, values))
                assert bad == [], (name, values, bad[:5])
                checked += 1
        info["detail"] = f"designs={len(ALL)} fixed harnesses={checked}"


def test_c6_fpu_benchmark(tmp_path):
    with criterion(6, "FPU-shaped benchmark (substitute for the FPU claim)") as info:
        out = str(tmp_path / "fpu")
        t0 = time.perf_counter()
        rc = cli_main(["pipeline", "--max-cycles", "3", corpus_path("fpu_like"),
                       corpus_path("fpu_like", ".yaml"), "--out", out])
        elapsed = time.perf_counter() - t0
        assert rc == 0
        rep = json.load(open(os.path.join(out, "report.json")))
        stats = json.load(open(os.path.join(out, "stats.json")))
        res = json.load(open(os.path.join(out, "resources.json")))
        info["detail"] = (f"stmt={rep['stmt_pct']}% branch={rep['branch_pct']}% tests={stats['tests']} "
                          f"vectors={stats['vectors']} time_min={res['time_min']} wall={elapsed:.1f}s")
        assert stats["max_cycles"] == 3
        assert rep["stmt_pct"] >= 95.0 and rep["branch_pct"] >= 90.0
        assert elapsed < 600.0
        assert stats["tests"] > 0 and stats["vectors"] == 3 * stats["tests"]
        assert {"tests", "vectors", "time_min"} <= set(res)


def test_c7_determinism(tmp_path):
    with criterion(7, "determinism across runs and --jobs") as info:
        compared = []
        for name in ("fsm", "fpu_like"):
            outs = []
            for jobs in ("1", "4"):
                out = str(tmp_path / f"{name}_{jobs}")
                assert cli_main(["pipeline", corpus_path(name), corpus_path(name, ".yaml"),
                                 "--seed", "7", "--jobs", jobs, "--out", out]) == 0
                outs.append(out)
            for f in ("suite.txt", "stats.json", "report.json", "coverage.json", "coverage_detail.txt",
                      "coverage.png"):
                a = open(os.path.join(outs[0], f), "rb").read()
                b = open(os.path.join(outs[1], f), "rb").read()
                assert a == b, (name, f)
                compared.append(f"{name}/{f}")
        info["detail"] = f"{len(compared)} files byte-identical"


def test_c8_property_suites():
    import test_bv
    import test_replay
    import test_symexec

    with criterion(8, "property suites") as info:
        for w in (1, 2, 3, 4):
            for kind in test_bv.BINARY:
                test_bv.test_simplifier_sound_binary(kind, w)
            test_bv.test_simplifier_sound_unary_ite_extract(w)
        for wa, wb in [(1, 1), (1, 3), (2, 2), (3, 1), (4, 4), (3, 4)]:
            test_bv.test_extract_concat_identity(wa, wb)
        test_replay.test_merge_algebra()
        for name in ("four_paths", "counter", "fsm", "alu"):
            test_symexec.test_path_conditions_pairwise_unsat(name)
        info["detail"] = "simplifier soundness, extract/concat, merge algebra, path disjointness"


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q", "-s"]))
