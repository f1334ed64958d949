"""Lower a parsed module into an executable RTL IR.

The IR keeps the statement structure of each process but resolves names to
dense signal indices and lowers every expression to width-annotated operator
nodes (``XConst`` / ``XSig`` / ``XOp``) whose operator kinds are exactly the
bitvector kinds in :mod:`rtlsym.bv`. Operand widths are made explicit with
``zext`` / ``extract`` so interpreters never apply width rules themselves.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Optional

from .errors import ElabError
from .frontend import syntax as ast

MAX_WIDTH = 128


@dataclass(frozen=True)
class Signal:
    index: int
    name: str
    width: int
    kind: str  # "input" | "output" | "internal"


# -- IR expressions ----------------------------------------------------------

@dataclass(frozen=True)
class XConst:
    width: int
    value: int


@dataclass(frozen=True)
class XSig:
    sig: int
    width: int


@dataclass(frozen=True)
class XOp:
    op: str
    args: tuple
    width: int
    params: tuple = ()


# -- IR statements -----------------------------------------------------------

@dataclass(frozen=True)
class Target:
    sig: int
    hi: int
    lo: int

    @property
    def width(self):
        return self.hi - self.lo + 1


@dataclass(frozen=True)
class Assign:
    sid: int
    targets: tuple  # of Target, most significant first
    rhs: object     # width == sum of target widths
    blocking: bool
    loc: Optional[ast.SourceLoc] = field(default=None, compare=False)


@dataclass(frozen=True)
class IfStmt:
    bid: int
    cond: object    # width 1
    then: object
    else_: object   # None for an implicit else arm
    loc: Optional[ast.SourceLoc] = field(default=None, compare=False)


@dataclass(frozen=True)
class CaseStmt:
    """Priority-ordered case; ``matches[k]`` is the width-1 test for arm k.

    Arm ``len(bodies)`` is the default arm (``default`` may be None).
    """

    bid: int
    matches: tuple
    bodies: tuple
    default: object
    loc: Optional[ast.SourceLoc] = field(default=None, compare=False)


@dataclass(frozen=True)
class BlockStmt:
    stmts: tuple


@dataclass(frozen=True)
class Process:
    id: int
    kind: str                   # "comb" | "clocked"
    body: object
    read_set: frozenset
    write_set: frozenset
    edge: Optional[str] = None  # "posedge" | "negedge" for clocked processes
    clock: Optional[int] = None
    loc: Optional[ast.SourceLoc] = field(default=None, compare=False)


@dataclass(frozen=True)
class StmtEntry:
    sid: int
    loc: ast.SourceLoc


@dataclass(frozen=True)
class BranchEntry:
    bid: int
    loc: ast.SourceLoc
    arms: int
    kind: str  # "if" | "case"


@dataclass
class RtlDesign:
    name: str
    signals: list
    processes: list           # combinational in topological order, then clocked
    stmt_table: list
    branch_table: list
    clock: Optional[int] = None
    warnings: list = field(default_factory=list)
    file: str = "<input>"

    def __post_init__(self):
        self._by_name = {s.name: s for s in self.signals}

    def signal(self, name) -> Signal:
        return self._by_name[name]

    def has_signal(self, name) -> bool:
        return name in self._by_name

    @property
    def inputs(self):
        return [s for s in self.signals if s.kind == "input"]

    @property
    def comb(self):
        return [p for p in self.processes if p.kind == "comb"]

    @property
    def clocked(self):
        return [p for p in self.processes if p.kind == "clocked"]

    @property
    def arm_counts(self):
        return tuple(b.arms for b in self.branch_table)


# -- width rules -------------------------------------------------------------

_MAX_RULE = {"+", "-", "*", "&", "|", "^"}
_ONE_BIT = {"==", "!=", "<", "<=", ">", ">=", "&&", "||"}


def width_of(e, widths) -> int:
    """Self-determined width of AST expression ``e``.

    ``widths`` maps signal names to declared widths.
    """
    if isinstance(e, ast.Const):
        if e.value >= 1 << e.width:
            raise ElabError(e.loc, f"literal value {e.value} overflows its width {e.width}")
        return e.width
    if isinstance(e, ast.Ref):
        return _lookup(widths, e.name, e.loc)
    if isinstance(e, ast.BitSelect):
        _lookup(widths, e.name, e.loc)
        width_of(e.index, widths)
        return 1
    if isinstance(e, ast.PartSelect):
        _lookup(widths, e.name, e.loc)
        return e.hi - e.lo + 1
    if isinstance(e, ast.Unary):
        w = width_of(e.operand, widths)
        return w if e.op in ("~", "-", "+") else 1
    if isinstance(e, ast.Binary):
        wa, wb = width_of(e.lhs, widths), width_of(e.rhs, widths)
        if e.op in _ONE_BIT:
            return 1
        if e.op in _MAX_RULE:
            return max(wa, wb)
        return wa  # shifts, / and %
    if isinstance(e, ast.Concat):
        w = sum(width_of(p, widths) for p in e.parts)
        if w > MAX_WIDTH:
            raise ElabError(e.loc, f"concatenation width {w} exceeds {MAX_WIDTH}")
        return w
    if isinstance(e, ast.Ternary):
        width_of(e.cond, widths)
        return max(width_of(e.then, widths), width_of(e.else_, widths))
    raise TypeError(f"not an expression: {e!r}")


def _lookup(widths, name, loc):
    try:
        return widths[name]
    except KeyError:
        raise ElabError(loc, f"undeclared name {name!r}") from None


# -- lowering ----------------------------------------------------------------

def _resize(x, w):
    if x.width == w:
        return x
    if isinstance(x, XConst):
        return XConst(w, x.value & ((1 << w) - 1))
    if x.width < w:
        return XOp("zext", (x,), w, (w,))
    return XOp("extract", (x,), w, (w - 1, 0))


def _truth(x):
    return x if x.width == 1 else XOp("redor", (x,), 1)


_BINOP = {"+": "add", "-": "sub", "*": "mul", "&": "and", "|": "or", "^": "xor",
          "==": "eq", "!=": "ne", "<": "ult", "<=": "ule", ">": "ugt", ">=": "uge",
          "/": "udiv", "%": "urem", "<<": "shl", ">>": "lshr"}


class _Lowering:
    def __init__(self, module: ast.ModuleAst, file: str):
        self.module = module
        self.file = file
        self.signals = []
        self.widths = {}
        self.index = {}
        self.stmt_table = []
        self.branch_table = []
        self.warnings = []

    # names -------------------------------------------------------------------

    def declare(self):
        m = self.module
        for p in m.ports:
            if p.width < 1:
                raise ElabError(p.loc, f"port {p.name!r} has width 0")
            self._add(p.name, p.width, p.direction)
        for n in m.nets:
            if n.width < 1:
                raise ElabError(n.loc, f"net {n.name!r} has width 0")
            if n.name in self.index:
                continue
            self._add(n.name, n.width, "internal")

    def _add(self, name, width, kind):
        if width > MAX_WIDTH:
            raise ElabError(None, f"signal {name!r} wider than {MAX_WIDTH} bits")
        sig = Signal(len(self.signals), name, width, kind)
        self.signals.append(sig)
        self.widths[name] = width
        self.index[name] = sig.index

    def sig(self, name, loc):
        if name not in self.index:
            raise ElabError(loc, f"undeclared name {name!r}")
        return self.signals[self.index[name]]

    # expressions -----------------------------------------------------------

    def expr(self, e):
        w = width_of(e, self.widths)
        x = self._expr(e)
        assert x.width == w, (e, x.width, w)
        return x

    def _expr(self, e):
        if isinstance(e, ast.Const):
            return XConst(e.width, e.value)
        if isinstance(e, ast.Ref):
            s = self.sig(e.name, e.loc)
            return XSig(s.index, s.width)
        if isinstance(e, ast.BitSelect):
            s = self.sig(e.name, e.loc)
            base = XSig(s.index, s.width)
            if isinstance(e.index, ast.Const):
                if e.index.value >= s.width:
                    raise ElabError(e.loc, f"bit {e.index.value} out of range for {s.name!r}")
                return XOp("extract", (base,), 1, (e.index.value, e.index.value))
            shifted = XOp("lshr", (base, self._expr(e.index)), s.width)
            return XOp("extract", (shifted,), 1, (0, 0))
        if isinstance(e, ast.PartSelect):
            s = self.sig(e.name, e.loc)
            if e.hi >= s.width:
                raise ElabError(e.loc, f"part select [{e.hi}:{e.lo}] out of range for {s.name!r}")
            return XOp("extract", (XSig(s.index, s.width),), e.hi - e.lo + 1, (e.hi, e.lo))
        if isinstance(e, ast.Unary):
            a = self._expr(e.operand)
            if e.op == "~":
                return XOp("not", (a,), a.width)
            if e.op == "+":
                return a
            if e.op == "-":
                return XOp("sub", (XConst(a.width, 0), a), a.width)
            if e.op == "!":
                return XOp("not", (_truth(a),), 1)
            return XOp({"&": "redand", "|": "redor", "^": "redxor"}[e.op], (a,), 1)
        if isinstance(e, ast.Binary):
            a, b = self._expr(e.lhs), self._expr(e.rhs)
            if e.op == "&&":
                return XOp("and", (_truth(a), _truth(b)), 1)
            if e.op == "||":
                return XOp("or", (_truth(a), _truth(b)), 1)
            kind = _BINOP[e.op]
            if kind in ("shl", "lshr"):
                return XOp(kind, (a, b), a.width)
            w = max(a.width, b.width)
            x = XOp(kind, (_resize(a, w), _resize(b, w)), 1 if e.op in _ONE_BIT else w)
            if kind in ("udiv", "urem"):
                x = _resize(x, a.width)
            return x
        if isinstance(e, ast.Concat):
            parts = tuple(self._expr(p) for p in e.parts)
            if len(parts) == 1:
                return parts[0]
            return XOp("concat", parts, sum(p.width for p in parts))
        if isinstance(e, ast.Ternary):
            c, t, f = self._expr(e.cond), self._expr(e.then), self._expr(e.else_)
            w = max(t.width, f.width)
            return XOp("ite", (_truth(c), _resize(t, w), _resize(f, w)), w)
        raise TypeError(f"not an expression: {e!r}")

    # statements ------------------------------------------------------------

    def targets(self, lv):
        if isinstance(lv, ast.Ref):
            s = self.sig(lv.name, lv.loc)
            return [Target(s.index, s.width - 1, 0)]
        if isinstance(lv, ast.BitSelect):
            s = self.sig(lv.name, lv.loc)
            i = lv.index.value
            if i >= s.width:
                raise ElabError(lv.loc, f"bit {i} out of range for {s.name!r}")
            return [Target(s.index, i, i)]
        if isinstance(lv, ast.PartSelect):
            s = self.sig(lv.name, lv.loc)
            if lv.hi < lv.lo or lv.hi >= s.width:
                raise ElabError(lv.loc, f"part select [{lv.hi}:{lv.lo}] out of range for {s.name!r}")
            return [Target(s.index, lv.hi, lv.lo)]
        if isinstance(lv, ast.Concat):
            out = []
            for p in lv.parts:
                out.extend(self.targets(p))
            return out
        raise ElabError(getattr(lv, "loc", None), "invalid assignment target")

    def assign(self, lhs, rhs, blocking, loc):
        targets = self.targets(lhs)
        for t in targets:
            if self.signals[t.sig].kind == "input":
                raise ElabError(loc, f"assignment to input {self.signals[t.sig].name!r}")
        x = self.expr(rhs)
        sid = len(self.stmt_table)
        self.stmt_table.append(StmtEntry(sid, loc))
        return Assign(sid, tuple(targets), _resize(x, sum(t.width for t in targets)),
                      blocking, loc)

    def stmt(self, s, kinds):
        if isinstance(s, ast.Block):
            return BlockStmt(tuple(self.stmt(x, kinds) for x in s.stmts))
        if isinstance(s, (ast.BlockingAssign, ast.NonblockingAssign)):
            blocking = isinstance(s, ast.BlockingAssign)
            kinds.add("blocking" if blocking else "nonblocking")
            return self.assign(s.lhs, s.rhs, blocking, s.loc)
        if isinstance(s, ast.If):
            cond = _truth(self.expr(s.cond))
            bid = len(self.branch_table)
            self.branch_table.append(BranchEntry(bid, s.loc, 2, "if"))
            then = self.stmt(s.then, kinds)
            else_ = None if s.else_ is None else self.stmt(s.else_, kinds)
            return IfStmt(bid, cond, then, else_, s.loc)
        if isinstance(s, ast.Case):
            subject = self.expr(s.subject)
            bid = len(self.branch_table)
            self.branch_table.append(BranchEntry(bid, s.loc, len(s.arms) + 1, "case"))
            matches, bodies = [], []
            for arm in s.arms:
                tests = []
                for lab in arm.labels:
                    lw = width_of(lab, self.widths)
                    w = max(lw, subject.width)
                    tests.append(XOp("eq", (_resize(subject, w), XConst(w, lab.value)), 1))
                m = tests[0]
                for t in tests[1:]:
                    m = XOp("or", (m, t), 1)
                matches.append(m)
                bodies.append(self.stmt(arm.body, kinds))
            default = None if s.default is None else self.stmt(s.default, kinds)
            return CaseStmt(bid, tuple(matches), tuple(bodies), default, s.loc)
        raise TypeError(f"not a statement: {s!r}")


def _reads(x, out):
    if isinstance(x, XSig):
        out.add(x.sig)
    elif isinstance(x, XOp):
        for a in x.args:
            _reads(a, out)


def _dataflow(s, defined, exposed, writes, widths):
    """Collect upward-exposed reads and all writes; returns the definitely-written set."""
    if isinstance(s, BlockStmt):
        for x in s.stmts:
            defined = _dataflow(x, defined, exposed, writes, widths)
        return defined
    if isinstance(s, Assign):
        r = set()
        _reads(s.rhs, r)
        exposed |= r - defined
        out = set(defined)
        for t in s.targets:
            writes.add(t.sig)
        for t in s.targets:
            if t.lo == 0 and t.hi == widths[t.sig] - 1:
                out.add(t.sig)
        return frozenset(out)
    if isinstance(s, IfStmt):
        r = set()
        _reads(s.cond, r)
        exposed |= r - defined
        a = _dataflow(s.then, defined, exposed, writes, widths)
        b = defined if s.else_ is None else _dataflow(s.else_, defined, exposed, writes, widths)
        return a & b
    if isinstance(s, CaseStmt):
        r = set()
        for m in s.matches:
            _reads(m, r)
        exposed |= r - defined
        outs = [_dataflow(b, defined, exposed, writes, widths) for b in s.bodies]
        outs.append(defined if s.default is None else
                    _dataflow(s.default, defined, exposed, writes, widths))
        result = outs[0]
        for o in outs[1:]:
            result = result & o
        return result
    raise TypeError(s)


def _analyze(body, widths):
    exposed, writes = set(), set()
    _dataflow(body, frozenset(), exposed, writes, widths)
    return frozenset(exposed), frozenset(writes)


def _all_reads(s, out):
    if isinstance(s, BlockStmt):
        for x in s.stmts:
            _all_reads(x, out)
    elif isinstance(s, Assign):
        _reads(s.rhs, out)
    elif isinstance(s, IfStmt):
        _reads(s.cond, out)
        _all_reads(s.then, out)
        if s.else_ is not None:
            _all_reads(s.else_, out)
    elif isinstance(s, CaseStmt):
        for m in s.matches:
            _reads(m, out)
        for b in s.bodies:
            _all_reads(b, out)
        if s.default is not None:
            _all_reads(s.default, out)


def elaborate(module: ast.ModuleAst, file: Optional[str] = None) -> RtlDesign:
    """Resolve names, lower expressions and check the design's static rules."""
    if file is None:
        file = module.loc.file if module.loc else "<input>"
    low = _Lowering(module, file)
    low.declare()
    widths = {s.index: s.width for s in low.signals}

    raw = []  # (kind, body, loc, sensitivity)
    for item in module.items:
        kinds = set()
        if isinstance(item, ast.ContinuousAssign):
            body = low.assign(item.lhs, item.rhs, True, item.loc)
            raw.append(("comb", body, item.loc, None))
            continue
        body = low.stmt(item.body, kinds)
        sens = item.sensitivity
        if sens.kind == "edge":
            if "blocking" in kinds:
                raise ElabError(item.loc, "clocked always block must use only nonblocking assignments")
            raw.append(("clocked", body, item.loc, sens))
        else:
            if "nonblocking" in kinds:
                raise ElabError(item.loc, "combinational always block must use only blocking assignments")
            raw.append(("comb", body, item.loc, sens))

    procs = []
    drivers = {}
    clocks = set()
    for pid, (kind, body, loc, sens) in enumerate(raw):
        exposed, writes = _analyze(body, widths)
        for w in writes:
            if w in drivers and drivers[w] != pid:
                name = low.signals[w].name
                raise ElabError(loc, f"multiple drivers for {name!r}")
            drivers[w] = pid
        if kind == "comb":
            if sens is not None and sens.kind == "level":
                for name in sens.entries:
                    low.sig(name, sens.loc)
                listed = {low.index[n] for n in sens.entries}
                missing = sorted(low.signals[i].name for i in exposed - listed)
                if missing:
                    low.warnings.append(
                        f"{loc}: warning: sensitivity list omits {', '.join(missing)}; "
                        "treated as combinational")
            procs.append(Process(pid, "comb", body, exposed, writes, loc=loc))
        else:
            body_reads = set()
            _all_reads(body, body_reads)
            for _, name in sens.entries:
                low.sig(name, sens.loc)
            candidates = [(e, low.index[n]) for e, n in sens.entries
                          if low.index[n] not in body_reads]
            edge, clock = (candidates or [(sens.entries[0][0], low.index[sens.entries[0][1]])])[0]
            if low.signals[clock].kind != "input":
                raise ElabError(loc, f"clock {low.signals[clock].name!r} must be an input")
            clocks.add(clock)
            procs.append(Process(pid, "clocked", body, frozenset(body_reads), writes,
                                 edge=edge, clock=clock, loc=loc))
    if len(clocks) > 1:
        names = ", ".join(sorted(low.signals[c].name for c in clocks))
        raise ElabError(None, f"multiple clocks are not supported ({names})")

    comb = [p for p in procs if p.kind == "comb"]
    for p in comb:
        loop = p.read_set & p.write_set
        if loop:
            name = low.signals[min(loop)].name
            raise ElabError(p.loc, f"combinational cycle through {name!r}")
    order = _topo_order(comb, low.signals)
    return RtlDesign(
        name=module.name,
        signals=low.signals,
        processes=order + [p for p in procs if p.kind == "clocked"],
        stmt_table=low.stmt_table,
        branch_table=low.branch_table,
        clock=next(iter(clocks)) if clocks else None,
        warnings=low.warnings,
        file=file,
    )


def _topo_order(comb, signals):
    writer = {}
    for p in comb:
        for w in p.write_set:
            writer[w] = p.id
    succ = {p.id: set() for p in comb}
    indeg = {p.id: 0 for p in comb}
    for p in comb:
        for r in p.read_set:
            q = writer.get(r)
            if q is not None and q != p.id and p.id not in succ[q]:
                succ[q].add(p.id)
                indeg[p.id] += 1
    by_id = {p.id: p for p in comb}
    ready = [pid for pid, d in indeg.items() if d == 0]
    heapq.heapify(ready)
    order = []
    while ready:
        pid = heapq.heappop(ready)
        order.append(by_id[pid])
        for q in sorted(succ[pid]):
            indeg[q] -= 1
            if indeg[q] == 0:
                heapq.heappush(ready, q)
    if len(order) != len(comb):
        stuck = sorted(pid for pid, d in indeg.items() if d > 0)
        p = by_id[stuck[0]]
        names = sorted({signals[s].name for q in stuck for s in by_id[q].write_set})
        raise ElabError(p.loc, f"combinational cycle through {', '.join(names)}")
    return order
