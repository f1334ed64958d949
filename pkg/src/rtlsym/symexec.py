"""Cycle-bounded symbolic execution of an elaborated design.

Each cycle binds the harness inputs, evaluates every combinational process
once in topological order, runs the clocked processes against the
pre-update store and commits their nonblocking writes together. A branch
whose guard does not fold to a constant forks the path; each child keeps
its arm guard in the path condition and survives only if that condition is
satisfiable. Exploration is depth-first, first arm first.
"""

from __future__ import annotations

import logging
import resource
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

from . import bv
from .elaborate import Assign, BlockStmt, CaseStmt, IfStmt, XConst, XSig
from .errors import OscillationError
from .harness import controlled_inputs, reset_value, validate_harness
from .solver import SolverConfig, check

log = logging.getLogger(__name__)


@dataclass
class PathState:
    store: dict                       # signal index -> node handle
    path_condition: list = field(default_factory=list)
    cycle: int = 0
    trace: list = field(default_factory=list)   # (branch id, arm) in execution order
    status: str = "active"            # active | complete | infeasible | budget_killed
    model: Optional[dict] = None      # an assignment satisfying path_condition
    pc_set: set = field(default_factory=set)
    pending: Optional[dict] = None    # nonblocking writes of the current clock edge
    history: Optional[list] = None    # settled store per cycle, when recorded

    def fork(self):
        return PathState(
            store=dict(self.store),
            path_condition=list(self.path_condition),
            cycle=self.cycle,
            trace=list(self.trace),
            status=self.status,
            model=self.model,
            pc_set=set(self.pc_set),
            pending=None if self.pending is None else dict(self.pending),
            history=None if self.history is None else list(self.history),
        )


@dataclass
class TestCase:
    id: int
    vectors: list                     # per cycle: {signal name: value}
    expected_trace: list

    __test__ = False  # not a pytest class


@dataclass
class TestSuite:
    design: str
    inputs: list                      # [(name, width)] in declaration order
    tests: list

    __test__ = False

    @property
    def vector_count(self):
        return sum(len(t.vectors) for t in self.tests)


@dataclass
class ExplorationStats:
    tests: int = 0
    vectors: int = 0
    max_cycles: int = 0
    paths_completed: int = 0
    paths_killed: int = 0
    paths_infeasible: int = 0
    solver_calls: int = 0
    budget_exhausted: Optional[str] = None
    elapsed_ms: float = 0.0
    peak_rss_mb: Optional[float] = None
    cpu_pct: Optional[float] = None

    def counters(self):
        """Deterministic part of the statistics (no timing, no memory)."""
        return {
            "tests": self.tests,
            "vectors": self.vectors,
            "max_cycles": self.max_cycles,
            "paths_completed": self.paths_completed,
            "paths_killed": self.paths_killed,
            "paths_infeasible": self.paths_infeasible,
            "solver_calls": self.solver_calls,
            "budget_exhausted": self.budget_exhausted,
        }

    def resources(self):
        return {
            "elapsed_ms": round(self.elapsed_ms, 3),
            "time_min": round(self.elapsed_ms / 60000.0, 4),
            "peak_rss_mb": self.peak_rss_mb,
            "cpu_pct": self.cpu_pct,
        }


class _Abort(Exception):
    pass


def sym_eval(x, store):
    """Build the DAG node for IR expression ``x`` over a symbolic store."""
    if isinstance(x, XSig):
        return store[x.sig]
    if isinstance(x, XConst):
        return bv.mk_const(x.width, x.value)
    return bv.mk_op(x.op, [sym_eval(a, store) for a in x.args], x.params)


def write_bits(old, value, hi, lo, width):
    """Return ``old`` with bits ``hi..lo`` replaced by ``value``."""
    if lo == 0 and hi == width - 1:
        return value
    parts = []
    if hi < width - 1:
        parts.append(bv.mk_op("extract", [old], (width - 1, hi + 1)))
    parts.append(value)
    if lo > 0:
        parts.append(bv.mk_op("extract", [old], (lo - 1, 0)))
    return bv.mk_op("concat", parts)


class SymbolicExecutor:
    def __init__(self, design, harness, solver: SolverConfig = SolverConfig(),
                 jobs: int = 1, record_history: bool = False):
        validate_harness(design, harness)
        self.design = design
        self.harness = harness
        self.solver = solver
        self.jobs = max(1, jobs)
        self.record_history = record_history
        self.stats = ExplorationStats(max_cycles=harness.max_cycles)
        self.comb = design.comb
        self.clocked = design.clocked
        self._check_order()
        self._symbolic = {s.signal: s for s in harness.symbolic_inputs}
        self._deadline = None

    def _check_order(self):
        # a process may only read signals settled by an earlier process
        later = set()
        for p in reversed(self.comb):
            later |= p.write_set
            if p.read_set & later:
                raise OscillationError(
                    f"combinational process at {p.loc} reads a signal that settles after it")

    # -- solver interface ----------------------------------------------------

    def _solve(self, constraints):
        if self.stats.solver_calls >= self.harness.budgets.max_solver_calls:
            self.stats.budget_exhausted = "max_solver_calls"
            raise _Abort
        self.stats.solver_calls += 1
        return check(constraints, self.solver)

    def _feasible(self, state, guard):
        """Return ``(verdict, new_conjuncts, model)`` for extending ``state`` by ``guard``."""
        new = []
        for c in bv.conjuncts(guard):
            if c in state.pc_set:
                continue
            if bv.bnot(c) in state.pc_set or bv.const_value(c) == 0:
                return "unsat", None, None
            new.append(c)
        if not new:
            return "sat", new, state.model
        if state.model is not None and all(
                bv.eval_concrete(c, state.model, default=0) == 1 for c in new):
            return "sat", new, state.model
        res = self._solve(state.path_condition + new)
        return res.status, new, res.model

    # -- statement execution -------------------------------------------------

    def init_state(self):
        d = self.design
        store = {s.index: bv.mk_const(s.width, 0) for s in d.signals}
        state = PathState(store=store, model={})
        if self.record_history:
            state.history = []
        self._bind_inputs(state)
        return state

    def _bind_inputs(self, state):
        d, h = self.design, self.harness
        k = state.cycle
        for s in h.symbolic_inputs:
            sig = d.signal(s.signal)
            cyc = 0 if s.mode == "hold" else k
            state.store[sig.index] = bv.mk_var(sig.name, sig.width, cyc)
        for name, value in h.fixed_inputs:
            sig = d.signal(name)
            state.store[sig.index] = bv.mk_const(sig.width, value)
        if h.reset is not None:
            sig = d.signal(h.reset.signal)
            state.store[sig.index] = bv.mk_const(1, reset_value(h, k))

    def _assign(self, state, stmt):
        value = sym_eval(stmt.rhs, state.store)
        total = bv.width(value)
        offset = total
        signals = self.design.signals
        for t in stmt.targets:
            offset -= t.width
            piece = value if len(stmt.targets) == 1 else \
                bv.mk_op("extract", [value], (offset + t.width - 1, offset))
            w = signals[t.sig].width
            if stmt.blocking:
                state.store[t.sig] = write_bits(state.store[t.sig], piece, t.hi, t.lo, w)
            else:
                old = state.pending.get(t.sig, state.store[t.sig])
                state.pending[t.sig] = write_bits(old, piece, t.hi, t.lo, w)

    def _branch(self, state, bid, guards):
        """Split ``state`` over mutually exclusive arm ``guards``; yields (child, arm)."""
        values = [bv.const_value(g) for g in guards]
        if all(v is not None for v in values):
            k = values.index(1)
            state.trace.append((bid, k))
            return [(state, k)]
        out = []
        for k, g in enumerate(guards):
            if values[k] == 0:
                continue
            verdict, new, model = self._feasible(state, g)
            if verdict == "unsat":
                self.stats.paths_infeasible += 1
                continue
            if verdict == "unknown":
                self.stats.paths_killed += 1
                continue
            child = state.fork()
            child.path_condition.extend(new)
            child.pc_set.update(new)
            child.model = model
            child.trace.append((bid, k))
            out.append((child, k))
        return out

    def _exec(self, state, stmt):
        if isinstance(stmt, Assign):
            self._assign(state, stmt)
            return [state]
        if isinstance(stmt, BlockStmt):
            states = [state]
            for s in stmt.stmts:
                states = [r for st in states for r in self._exec(st, s)]
            return states
        if isinstance(stmt, IfStmt):
            g = sym_eval(stmt.cond, state.store)
            guards = [g, bv.bnot(g)]
            bodies = [stmt.then, stmt.else_]
        elif isinstance(stmt, CaseStmt):
            matches = [sym_eval(m, state.store) for m in stmt.matches]
            guards, prior = [], []
            for m in matches:
                guards.append(bv.band(*prior, m))
                prior.append(bv.bnot(m))
            guards.append(bv.band(*prior))
            bodies = list(stmt.bodies) + [stmt.default]
        else:
            raise TypeError(f"unknown statement {stmt!r}")
        out = []
        for child, k in self._branch(state, stmt.bid, guards):
            if bodies[k] is None:
                out.append(child)
            else:
                out.extend(self._exec(child, bodies[k]))
        return out

    # -- cycle semantics -----------------------------------------------------

    def settle_comb(self, state):
        states = [state]
        for p in self.comb:
            states = [r for st in states for r in self._exec(st, p.body)]
        return states

    def step_cycle(self, state):
        self._bind_inputs(state)
        out = []
        for st in self.settle_comb(state):
            if st.history is not None:
                st.history.append(dict(st.store))
            st.pending = {}
            states = [st]
            for p in self.clocked:
                states = [r for s in states for r in self._exec(s, p.body)]
            for s in states:
                s.store.update(s.pending)
                s.pending = None
                s.cycle += 1
                if s.cycle >= self.harness.max_cycles:
                    s.status = "complete"
                out.append(s)
        return out

    def explore(self):
        """Depth-first search; returns the complete states in DFS order."""
        budgets = self.harness.budgets
        if self._deadline is None:
            self._deadline = time.monotonic() + budgets.wall_clock_s
        complete = []
        stack = [self.init_state()]
        try:
            while stack:
                if time.monotonic() > self._deadline:
                    self.stats.budget_exhausted = "wall_clock"
                    break
                st = stack.pop()
                if st.status == "complete":
                    complete.append(st)
                    if len(complete) >= budgets.max_paths:
                        if stack:
                            self.stats.budget_exhausted = "max_paths"
                        break
                    continue
                stack.extend(reversed(self.step_cycle(st)))
        except _Abort:
            pass
        for st in stack:
            st.status = "budget_killed"
        self.stats.paths_killed += len(stack) if self.stats.budget_exhausted else 0
        return complete

    def make_test(self, tid, state, model):
        d, h = self.design, self.harness
        vectors = []
        for k in range(h.max_cycles):
            vec = {}
            for sig in controlled_inputs(d, h):
                if sig.name in self._symbolic:
                    s = self._symbolic[sig.name]
                    key = (sig.name, 0 if s.mode == "hold" else k)
                    vec[sig.name] = model.get(key, 0)
                elif h.reset is not None and sig.name == h.reset.signal:
                    vec[sig.name] = reset_value(h, k)
                else:
                    vec[sig.name] = dict(h.fixed_inputs)[sig.name]
            vectors.append(vec)
        return TestCase(tid, vectors, list(state.trace))

    def run(self):
        """Explore all paths and emit one test per complete, solvable path."""
        start = time.monotonic()
        cpu0 = time.process_time()
        self._deadline = start + self.harness.budgets.wall_clock_s
        complete = self.explore()
        self.stats.paths_completed = len(complete)

        def final(st):
            return check(st.path_condition, self.solver)

        self.stats.solver_calls += len(complete)
        if self.jobs > 1 and len(complete) > 1:
            with ThreadPoolExecutor(self.jobs) as pool:
                results = list(pool.map(final, complete))
        else:
            results = [final(st) for st in complete]

        tests = []
        for st, res in zip(complete, results):
            if res.sat:
                tests.append(self.make_test(len(tests), st, res.model))
            elif res.unknown:
                self.stats.paths_killed += 1
            else:
                log.warning("path certified feasible was refuted by the final check")
                self.stats.paths_infeasible += 1
        inputs = [(s.name, s.width) for s in controlled_inputs(self.design, self.harness)]
        suite = TestSuite(self.design.name, inputs, tests)

        elapsed = time.monotonic() - start
        self.stats.tests = len(tests)
        self.stats.vectors = suite.vector_count
        self.stats.elapsed_ms = elapsed * 1000.0
        self.stats.peak_rss_mb = round(resource.getrusage(resource.RUSAGE_SELF).ru_maxrss / 1024.0, 1)
        self.stats.cpu_pct = round(100.0 * (time.process_time() - cpu0) / elapsed, 1) if elapsed else None
        return suite, self.stats


def init_state(design, harness):
    return SymbolicExecutor(design, harness).init_state()


def settle_comb(state, design, harness, solver: SolverConfig = SolverConfig()):
    return SymbolicExecutor(design, harness, solver).settle_comb(state)


def step_cycle(state, design, harness, solver: SolverConfig = SolverConfig()):
    return SymbolicExecutor(design, harness, solver).step_cycle(state)


def run(design, harness, solver: SolverConfig = SolverConfig(), jobs: int = 1):
    return SymbolicExecutor(design, harness, solver, jobs=jobs).run()
