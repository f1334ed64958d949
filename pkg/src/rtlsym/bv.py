"""Hash-consed bitvector expression DAG.

Nodes live in an append-only :class:`NodeTable`; a handle is the node's
integer index. Construction goes through :func:`mk_const`, :func:`mk_var`
and :func:`mk_op`, which fold constants and apply a small fixed set of
local rewrites before interning.

All arithmetic is unsigned and modular on the node width. Division and
remainder by zero both yield zero.
"""

from __future__ import annotations

import threading
from typing import NamedTuple

from .errors import MissingVar, WidthError

MAX_WIDTH = 128

BINARY_SAME = frozenset({"add", "sub", "mul", "udiv", "urem", "and", "or", "xor"})
COMPARE = frozenset({"eq", "ne", "ult", "ule", "ugt", "uge"})
SHIFT = frozenset({"shl", "lshr"})
REDUCE = frozenset({"redand", "redor", "redxor"})
OP_KINDS = (BINARY_SAME | COMPARE | SHIFT | REDUCE
            | {"not", "ite", "extract", "concat", "zext"})


class Node(NamedTuple):
    kind: str
    width: int
    args: tuple
    params: tuple


class NodeTable:
    """Append-only node store; interning is atomic under a lock."""

    def __init__(self):
        self._nodes = []
        self._index = {}
        self._lock = threading.Lock()

    def __len__(self):
        return len(self._nodes)

    def __getitem__(self, handle) -> Node:
        return self._nodes[handle]

    def intern(self, node: Node) -> int:
        h = self._index.get(node)
        if h is not None:
            return h
        with self._lock:
            h = self._index.get(node)
            if h is None:
                h = len(self._nodes)
                self._nodes.append(node)
                self._index[node] = h
            return h


TABLE = NodeTable()


def node(h) -> Node:
    return TABLE[h]


def width(h) -> int:
    return TABLE[h].width


def mask(w) -> int:
    return (1 << w) - 1


def is_const(h) -> bool:
    return TABLE[h].kind == "const"


def const_value(h):
    n = TABLE[h]
    return n.params[0] if n.kind == "const" else None


def _check_width(w):
    if not isinstance(w, int) or not 1 <= w <= MAX_WIDTH:
        raise WidthError(f"width {w} outside 1..{MAX_WIDTH}")


def mk_const(w: int, value: int) -> int:
    _check_width(w)
    if value < 0 or value >= 1 << w:
        raise WidthError(f"constant {value} does not fit in {w} bits")
    return TABLE.intern(Node("const", w, (), (value,)))


def mk_var(name: str, w: int, cycle: int = 0) -> int:
    _check_width(w)
    return TABLE.intern(Node("var", w, (), (name, cycle)))


def true():
    return mk_const(1, 1)


def false():
    return mk_const(1, 0)


# -- concrete semantics ------------------------------------------------------

def apply_op(kind, w, vals, widths, params=()):
    """Value of ``kind`` applied to concrete operand values (result width ``w``)."""
    m = mask(w)
    if kind == "add":
        return (vals[0] + vals[1]) & m
    if kind == "sub":
        return (vals[0] - vals[1]) & m
    if kind == "mul":
        return (vals[0] * vals[1]) & m
    if kind == "udiv":
        return vals[0] // vals[1] if vals[1] else 0
    if kind == "urem":
        return vals[0] % vals[1] if vals[1] else 0
    if kind == "and":
        return vals[0] & vals[1]
    if kind == "or":
        return vals[0] | vals[1]
    if kind == "xor":
        return vals[0] ^ vals[1]
    if kind == "not":
        return ~vals[0] & m
    if kind == "shl":
        return (vals[0] << vals[1]) & m if vals[1] < w else 0
    if kind == "lshr":
        return vals[0] >> vals[1] if vals[1] < w else 0
    if kind == "eq":
        return int(vals[0] == vals[1])
    if kind == "ne":
        return int(vals[0] != vals[1])
    if kind == "ult":
        return int(vals[0] < vals[1])
    if kind == "ule":
        return int(vals[0] <= vals[1])
    if kind == "ugt":
        return int(vals[0] > vals[1])
    if kind == "uge":
        return int(vals[0] >= vals[1])
    if kind == "ite":
        return vals[1] if vals[0] else vals[2]
    if kind == "extract":
        hi, lo = params
        return (vals[0] >> lo) & mask(hi - lo + 1)
    if kind == "concat":
        out = 0
        for v, vw in zip(vals, widths):
            out = (out << vw) | v
        return out
    if kind == "zext":
        return vals[0]
    if kind == "redand":
        return int(vals[0] == mask(widths[0]))
    if kind == "redor":
        return int(vals[0] != 0)
    if kind == "redxor":
        return bin(vals[0]).count("1") & 1
    raise ValueError(f"unknown operator {kind!r}")


def _result_width(kind, ws, params):
    n = len(ws)
    if kind in BINARY_SAME or kind in COMPARE:
        if n != 2:
            raise WidthError(f"{kind} takes 2 operands, got {n}")
        if ws[0] != ws[1]:
            raise WidthError(f"{kind} operand widths differ: {ws[0]} vs {ws[1]}")
        return 1 if kind in COMPARE else ws[0]
    if kind in SHIFT:
        if n != 2:
            raise WidthError(f"{kind} takes 2 operands, got {n}")
        return ws[0]
    if kind == "not" or kind in REDUCE:
        if n != 1:
            raise WidthError(f"{kind} takes 1 operand, got {n}")
        return ws[0] if kind == "not" else 1
    if kind == "ite":
        if n != 3:
            raise WidthError(f"ite takes 3 operands, got {n}")
        if ws[0] != 1:
            raise WidthError("ite condition must be 1 bit wide")
        if ws[1] != ws[2]:
            raise WidthError(f"ite arm widths differ: {ws[1]} vs {ws[2]}")
        return ws[1]
    if kind == "extract":
        hi, lo = params
        if n != 1 or not 0 <= lo <= hi < ws[0]:
            raise WidthError(f"bad extract [{hi}:{lo}] of width {ws[0] if ws else '?'}")
        return hi - lo + 1
    if kind == "concat":
        if n < 1:
            raise WidthError("concat needs at least one operand")
        return sum(ws)
    if kind == "zext":
        (nw,) = params
        if n != 1 or nw < ws[0]:
            raise WidthError(f"cannot zero-extend width {ws[0] if ws else '?'} to {nw}")
        return nw
    raise ValueError(f"unknown operator {kind!r}")


def _simplify(kind, w, args, params):
    """Return a handle for a rewritten form, or None to intern as-is."""
    nodes = [TABLE[a] for a in args]
    consts = [n.params[0] if n.kind == "const" else None for n in nodes]

    if all(c is not None for c in consts):
        return mk_const(w, apply_op(kind, w, consts, [n.width for n in nodes], params))

    if kind == "ite":
        c, t, e = args
        if consts[0] is not None:
            return t if consts[0] else e
        if t == e:
            return t
        return None
    if kind == "not":
        if nodes[0].kind == "not":
            return nodes[0].args[0]
        return None
    if kind == "extract":
        if params == (w - 1 + params[1], 0) and nodes[0].width == w:
            return args[0]
        return None
    if kind == "zext":
        return args[0] if nodes[0].width == w else None
    if len(args) != 2:
        return None

    a, b = args
    ca, cb = consts
    ones = mask(w)
    if kind == "and":
        if ca == 0 or cb == 0:
            return mk_const(w, 0)
        if ca == ones:
            return b
        if cb == ones or a == b:
            return a
    elif kind == "or":
        if ca == ones or cb == ones:
            return mk_const(w, ones)
        if ca == 0:
            return b
        if cb == 0 or a == b:
            return a
    elif kind == "xor":
        if a == b:
            return mk_const(w, 0)
        if ca == 0:
            return b
        if cb == 0:
            return a
    elif kind == "add":
        if ca == 0:
            return b
        if cb == 0:
            return a
    elif kind == "sub":
        if a == b:
            return mk_const(w, 0)
        if cb == 0:
            return a
    elif kind == "mul":
        if ca == 0 or cb == 0:
            return mk_const(w, 0)
        if ca == 1:
            return b
        if cb == 1:
            return a
    elif kind in SHIFT:
        if cb == 0:
            return a
        if ca == 0 or (cb is not None and cb >= w):
            return mk_const(w, 0)
    elif kind == "eq":
        if a == b:
            return mk_const(1, 1)
    elif kind == "ne":
        if a == b:
            return mk_const(1, 0)
    return None


def mk_op(kind: str, operands, params=()) -> int:
    """Build ``kind(operands)``, folding constants and applying local rewrites."""
    args = tuple(operands)
    params = tuple(params)
    ws = [TABLE[a].width for a in args]
    w = _result_width(kind, ws, params)
    _check_width(w)
    h = _simplify(kind, w, args, params)
    if h is not None:
        return h
    return TABLE.intern(Node(kind, w, args, params))


# convenience constructors used throughout the executor

def bnot(h):
    return mk_op("not", [h])


def band(*hs):
    out = None
    for h in hs:
        out = h if out is None else mk_op("and", [out, h])
    return true() if out is None else out


def resize(h, w):
    cw = width(h)
    if cw == w:
        return h
    if cw < w:
        return mk_op("zext", [h], (w,))
    return mk_op("extract", [h], (w - 1, 0))


def conjuncts(h):
    """Flatten a width-1 conjunction into its leaves (constant-true dropped)."""
    out, stack = [], [h]
    while stack:
        x = stack.pop()
        n = TABLE[x]
        if n.kind == "and" and n.width == 1:
            stack.extend(reversed(n.args))
        elif not (n.kind == "const" and n.params[0] == 1):
            out.append(x)
    return out


def _postorder(roots):
    seen, order = set(), []
    for root in roots:
        if root in seen:
            continue
        stack = [(root, False)]
        while stack:
            h, done = stack.pop()
            if done:
                order.append(h)
                continue
            if h in seen:
                continue
            seen.add(h)
            stack.append((h, True))
            for a in reversed(TABLE[h].args):
                if a not in seen:
                    stack.append((a, False))
    return order


def variables(roots):
    """Var handles reachable from ``roots`` in first-occurrence (post-order) order."""
    return [h for h in _postorder(roots) if TABLE[h].kind == "var"]


_MISSING = object()


def eval_concrete(h, assignment, default=_MISSING) -> int:
    """Evaluate node ``h`` under ``assignment`` ({(name, cycle): value}).

    With ``default`` given, unassigned variables take that value instead of
    raising :class:`MissingVar`.
    """
    memo = {}
    for x in _postorder([h]):
        n = TABLE[x]
        if n.kind == "const":
            memo[x] = n.params[0]
        elif n.kind == "var":
            v = assignment.get(n.params, _MISSING)
            if v is _MISSING:
                if default is _MISSING:
                    raise MissingVar(f"{n.params[0]}@{n.params[1]}")
                v = default
            memo[x] = v & mask(n.width)
        else:
            memo[x] = apply_op(n.kind, n.width, [memo[a] for a in n.args],
                               [TABLE[a].width for a in n.args], n.params)
    return memo[h]


# -- SMT-LIB2 export ---------------------------------------------------------

def smt_name(name, cycle):
    return name if cycle == 0 else f"{name}@{cycle}"


def _bv_lit(value, w):
    return "#b" + format(value, f"0{w}b")


def _smt_op(n, a, ws):
    k, w = n.kind, n.width
    simple = {"add": "bvadd", "sub": "bvsub", "mul": "bvmul", "and": "bvand",
              "or": "bvor", "xor": "bvxor", "not": "bvnot", "ult": "bvult",
              "ule": "bvule", "ugt": "bvugt", "uge": "bvuge"}
    if k in simple and k not in COMPARE:
        return f"({simple[k]} {' '.join(a)})"
    if k in ("udiv", "urem"):
        zero = _bv_lit(0, w)
        return f"(ite (= {a[1]} {zero}) {zero} (bv{k} {a[0]} {a[1]}))"
    if k == "eq":
        return f"(ite (= {a[0]} {a[1]}) #b1 #b0)"
    if k == "ne":
        return f"(ite (= {a[0]} {a[1]}) #b0 #b1)"
    if k in ("ult", "ule", "ugt", "uge"):
        return f"(ite ({simple[k]} {a[0]} {a[1]}) #b1 #b0)"
    if k in SHIFT:
        op = "bvshl" if k == "shl" else "bvlshr"
        wb = ws[1]
        if wb == w:
            return f"({op} {a[0]} {a[1]})"
        if wb < w:
            return f"({op} {a[0]} ((_ zero_extend {w - wb}) {a[1]}))"
        low = f"((_ extract {w - 1} 0) {a[1]})"
        return (f"(ite (bvuge {a[1]} {_bv_lit(w, wb)}) {_bv_lit(0, w)} "
                f"({op} {a[0]} {low}))")
    if k == "ite":
        return f"(ite (= {a[0]} #b1) {a[1]} {a[2]})"
    if k == "extract":
        return f"((_ extract {n.params[0]} {n.params[1]}) {a[0]})"
    if k == "concat":
        return a[0] if len(a) == 1 else f"(concat {' '.join(a)})"
    if k == "zext":
        return f"((_ zero_extend {w - ws[0]}) {a[0]})"
    if k == "redand":
        return f"(ite (= {a[0]} {_bv_lit(mask(ws[0]), ws[0])}) #b1 #b0)"
    if k == "redor":
        return f"(ite (= {a[0]} {_bv_lit(0, ws[0])}) #b0 #b1)"
    if k == "redxor":
        bits = [f"((_ extract {i} {i}) {a[0]})" for i in range(ws[0])]
        out = bits[0]
        for b in bits[1:]:
            out = f"(bvxor {out} {b})"
        return out
    raise ValueError(f"unknown operator {k!r}")


def smtlib_script(constraints):
    """Return ``(script, names)`` where names maps SMT symbols to (name, cycle)."""
    constraints = list(constraints)
    for c in constraints:
        if width(c) != 1:
            raise WidthError("constraints must be 1 bit wide")
    if not constraints:
        return "(check-sat)\n", {}
    lines, names = [], {}
    for v in variables(constraints):
        n = TABLE[v]
        sym = smt_name(*n.params)
        names[sym] = n.params
        quoted = sym if "@" not in sym else f"|{sym}|"
        lines.append(f"(declare-const {quoted} (_ BitVec {n.width}))")

    # nodes shared between constraints or operands are let-bound once per assert
    for c in constraints:
        order = _postorder([c])
        uses = {}
        for x in order:
            for a in TABLE[x].args:
                uses[a] = uses.get(a, 0) + 1
        text, bindings = {}, []
        for x in order:
            n = TABLE[x]
            if n.kind == "const":
                text[x] = _bv_lit(n.params[0], n.width)
                continue
            if n.kind == "var":
                sym = smt_name(*n.params)
                text[x] = sym if "@" not in sym else f"|{sym}|"
                continue
            t = _smt_op(n, [text[a] for a in n.args], [TABLE[a].width for a in n.args])
            if uses.get(x, 0) > 1:
                name = f"?n{x}"
                bindings.append((name, t))
                text[x] = name
            else:
                text[x] = t
        body = f"(= {text[c]} #b1)"
        for name, t in reversed(bindings):
            body = f"(let (({name} {t})) {body})"
        lines.append(f"(assert {body})")
    lines.append("(check-sat)")
    lines.append("(get-model)")
    return "\n".join(lines) + "\n", names


def to_smtlib(constraints) -> str:
    """QF_BV script asserting every width-1 constraint equals ``#b1``."""
    return smtlib_script(constraints)[0]
