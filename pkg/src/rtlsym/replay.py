"""Two-state cycle-based simulator with statement and branch coverage.

Expression evaluation here is deliberately independent of :mod:`rtlsym.bv`
so the two can be cross-checked against each other.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

from .elaborate import Assign, BlockStmt, CaseStmt, IfStmt, XConst, XSig
from .errors import DesignMismatch, SettleDivergence, VectorError
from .harness import controlled_inputs


@dataclass
class SimState:
    values: dict      # signal index -> int
    cycle: int = 0


@dataclass
class CoverageData:
    stmt_hits: list
    branch_hits: list  # per branch, one counter per arm

    @classmethod
    def empty(cls, design):
        return cls([0] * len(design.stmt_table), [[0] * b.arms for b in design.branch_table])

    @property
    def universe(self):
        return len(self.stmt_hits), tuple(len(b) for b in self.branch_hits)

    def to_dict(self, design_name):
        return {"design": design_name, "stmt_hits": list(self.stmt_hits),
                "branch_hits": [list(b) for b in self.branch_hits]}

    @classmethod
    def from_dict(cls, d):
        return cls(list(d["stmt_hits"]), [list(b) for b in d["branch_hits"]])


def merge(a: CoverageData, b: CoverageData) -> CoverageData:
    if a.universe != b.universe:
        raise DesignMismatch("coverage data come from different designs")
    return CoverageData([x + y for x, y in zip(a.stmt_hits, b.stmt_hits)],
                        [[x + y for x, y in zip(p, q)]
                         for p, q in zip(a.branch_hits, b.branch_hits)])


class SimResult(NamedTuple):
    state: SimState
    trace: list
    coverage: CoverageData


# -- concrete expression semantics --------------------------------------------

def _m(w):
    return (1 << w) - 1


def _popcount(v):
    return bin(v).count("1")


def evaluate(x, values):
    if isinstance(x, XSig):
        return values[x.sig]
    if isinstance(x, XConst):
        return x.value
    op, w = x.op, x.width
    if op == "ite":
        c = evaluate(x.args[0], values)
        return evaluate(x.args[1] if c else x.args[2], values)
    a = [evaluate(arg, values) for arg in x.args]
    if op == "add":
        return (a[0] + a[1]) & _m(w)
    if op == "sub":
        return (a[0] + (~a[1] & _m(w)) + 1) & _m(w)
    if op == "mul":
        return (a[0] * a[1]) & _m(w)
    if op == "udiv":
        return 0 if a[1] == 0 else a[0] // a[1]
    if op == "urem":
        return 0 if a[1] == 0 else a[0] - (a[0] // a[1]) * a[1]
    if op == "and":
        return a[0] & a[1]
    if op == "or":
        return a[0] | a[1]
    if op == "xor":
        return a[0] ^ a[1]
    if op == "not":
        return a[0] ^ _m(w)
    if op == "shl":
        return 0 if a[1] >= w else (a[0] << a[1]) & _m(w)
    if op == "lshr":
        return 0 if a[1] >= w else a[0] >> a[1]
    if op == "eq":
        return 1 if a[0] == a[1] else 0
    if op == "ne":
        return 0 if a[0] == a[1] else 1
    if op == "ult":
        return 1 if a[0] < a[1] else 0
    if op == "ule":
        return 1 if a[0] <= a[1] else 0
    if op == "ugt":
        return 1 if a[0] > a[1] else 0
    if op == "uge":
        return 1 if a[0] >= a[1] else 0
    if op == "extract":
        hi, lo = x.params
        return (a[0] >> lo) & _m(hi - lo + 1)
    if op == "concat":
        out = 0
        for arg, v in zip(x.args, a):
            out = (out << arg.width) | v
        return out
    if op == "zext":
        return a[0]
    if op == "redand":
        return 1 if a[0] == _m(x.args[0].width) else 0
    if op == "redor":
        return 1 if a[0] else 0
    if op == "redxor":
        return _popcount(a[0]) & 1
    raise ValueError(f"unknown operator {op!r}")


class Simulator:
    def __init__(self, design):
        self.design = design
        self.widths = [s.width for s in design.signals]
        self.comb = design.comb
        self.clocked = design.clocked
        self.settle_bound = len(self.comb) + 1

    def _assign(self, stmt, values, pending, cov):
        if cov is not None:
            cov.stmt_hits[stmt.sid] += 1
        v = evaluate(stmt.rhs, values)
        offset = stmt.rhs.width
        for t in stmt.targets:
            offset -= t.width
            piece = (v >> offset) & _m(t.width)
            dest = values if stmt.blocking else pending
            old = dest.get(t.sig, values[t.sig]) if dest is pending else values[t.sig]
            mask = _m(t.width) << t.lo
            dest[t.sig] = (old & ~mask & _m(self.widths[t.sig])) | (piece << t.lo)

    def _exec(self, stmt, values, pending, cov, trace):
        if isinstance(stmt, Assign):
            self._assign(stmt, values, pending, cov)
        elif isinstance(stmt, BlockStmt):
            for s in stmt.stmts:
                self._exec(s, values, pending, cov, trace)
        elif isinstance(stmt, IfStmt):
            arm = 0 if evaluate(stmt.cond, values) else 1
            self._record(stmt.bid, arm, cov, trace)
            body = stmt.then if arm == 0 else stmt.else_
            if body is not None:
                self._exec(body, values, pending, cov, trace)
        elif isinstance(stmt, CaseStmt):
            arm = len(stmt.bodies)
            for k, m in enumerate(stmt.matches):
                if evaluate(m, values):
                    arm = k
                    break
            self._record(stmt.bid, arm, cov, trace)
            body = stmt.default if arm == len(stmt.bodies) else stmt.bodies[arm]
            if body is not None:
                self._exec(body, values, pending, cov, trace)
        else:
            raise TypeError(f"unknown statement {stmt!r}")

    @staticmethod
    def _record(bid, arm, cov, trace):
        if cov is not None:
            cov.branch_hits[bid][arm] += 1
        if trace is not None:
            trace.append((bid, arm))

    def settle(self, values, cov, trace):
        """Evaluate combinational logic to a fixpoint.

        Only the first pass is recorded; later passes must not change any
        value, and failing to converge within the bound is an error.
        """
        for i in range(self.settle_bound):
            before = dict(values)
            for p in self.comb:
                if i == 0:
                    self._exec(p.body, values, None, cov, trace)
                else:
                    self._exec(p.body, values, None, None, None)
            if i > 0 and values == before or not self.comb:
                return
        raise SettleDivergence(
            f"combinational logic did not settle within {self.settle_bound} iterations")

    def clock_edge(self, values, cov, trace):
        pending = {}
        for p in self.clocked:
            self._exec(p.body, values, pending, cov, trace)
        values.update(pending)

    def run(self, vectors, clock=None, snapshots=None):
        values = {s.index: 0 for s in self.design.signals}
        cov = CoverageData.empty(self.design)
        trace = []
        inputs = {s.name: s for s in self.design.inputs if s.name != clock}
        for k, vec in enumerate(vectors):
            missing = set(inputs) - set(vec)
            if missing:
                raise VectorError(f"cycle {k}: no value for {', '.join(sorted(missing))}")
            for name, value in vec.items():
                sig = inputs.get(name)
                if sig is None:
                    raise VectorError(f"cycle {k}: {name!r} is not a driven input")
                if not 0 <= value < 1 << sig.width:
                    raise VectorError(f"cycle {k}: {name}={value} exceeds {sig.width} bits")
                values[sig.index] = value
            self.settle(values, cov, trace)
            if snapshots is not None:
                snapshots.append(dict(values))
            self.clock_edge(values, cov, trace)
        return SimResult(SimState(values, len(vectors)), trace, cov)


def simulate(design, harness, test, snapshots=None) -> SimResult:
    """Replay ``test`` cycle by cycle; returns final state, branch trace and coverage."""
    expected = {s.name for s in controlled_inputs(design, harness)}
    for k, vec in enumerate(test.vectors):
        extra = set(vec) - expected
        if extra:
            raise VectorError(f"cycle {k}: {', '.join(sorted(extra))} not controlled by the harness")
    return Simulator(design).run(test.vectors, harness.clock, snapshots)


def simulate_suite(design, harness, suite, jobs=1):
    """Replay every test; returns ``(merged coverage, [trace per test])``."""
    def one(t):
        return simulate(design, harness, t)

    if jobs > 1 and len(suite.tests) > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(jobs) as pool:
            results = list(pool.map(one, suite.tests))
    else:
        results = [one(t) for t in suite.tests]
    cov = CoverageData.empty(design)
    for r in results:
        cov = merge(cov, r.coverage)
    return cov, [r.trace for r in results]


# -- reporting -----------------------------------------------------------------

def pct(covered, total):
    """100 * covered / total rounded half-up to one decimal (100.0 when total is 0)."""
    if total == 0:
        return 100.0
    tenths = (2000 * covered + total) // (2 * total)
    return tenths / 10


@dataclass
class CoverageReport:
    design: str
    stmt_covered: int
    stmt_total: int
    stmt_pct: float
    branch_covered: int
    branch_total: int
    branch_pct: float
    detail: list = field(default_factory=list)  # uncovered rows

    def summary(self):
        return {
            "design": self.design,
            "stmt_covered": self.stmt_covered, "stmt_total": self.stmt_total,
            "stmt_pct": self.stmt_pct,
            "branch_covered": self.branch_covered, "branch_total": self.branch_total,
            "branch_pct": self.branch_pct,
            "uncovered": [{"loc": str(r.loc), "kind": r.kind, "arm": r.arm, "hits": r.hits}
                          for r in self.detail],
        }


@dataclass(frozen=True)
class DetailRow:
    loc: object
    kind: str        # "stmt" | "branch-arm"
    hits: int
    arm: int = -1     # arm index for branch rows

    def line(self):
        return f"{self.loc} kind={self.kind} hits={self.hits}"


def report(design, cov: CoverageData) -> CoverageReport:
    if cov.universe != (len(design.stmt_table), design.arm_counts):
        raise DesignMismatch("coverage data do not belong to this design")
    rows = []
    stmt_cov = 0
    for entry, hits in zip(design.stmt_table, cov.stmt_hits):
        if hits:
            stmt_cov += 1
        else:
            rows.append(DetailRow(entry.loc, "stmt", 0))
    br_cov = br_total = 0
    for entry, arms in zip(design.branch_table, cov.branch_hits):
        for k, hits in enumerate(arms):
            br_total += 1
            if hits:
                br_cov += 1
            else:
                rows.append(DetailRow(entry.loc, "branch-arm", 0, k))
    rows.sort(key=lambda r: (r.loc.line, r.loc.col, r.kind, r.arm))
    n = len(design.stmt_table)
    return CoverageReport(design.name, stmt_cov, n, pct(stmt_cov, n),
                          br_cov, br_total, pct(br_cov, br_total), rows)


def format_table(rep: CoverageReport) -> str:
    lines = [
        f"Coverage for {rep.design}",
        f"{'Metric':<10} {'Covered':>8} {'Total':>8} {'Percent':>8}",
        f"{'Statement':<10} {rep.stmt_covered:>8} {rep.stmt_total:>8} {rep.stmt_pct:>7.1f}%",
        f"{'Branch':<10} {rep.branch_covered:>8} {rep.branch_total:>8} {rep.branch_pct:>7.1f}%",
    ]
    if rep.detail:
        lines.append("Uncovered:")
        lines.extend("  " + r.line() for r in rep.detail)
    return "\n".join(lines) + "\n"
