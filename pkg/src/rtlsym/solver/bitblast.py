"""Tseitin bit-blasting of width-1 bitvector constraints to CNF.

Each DAG node maps to a list of literals, least significant bit first.
Literal ``TRUE`` is variable 1, pinned by a unit clause, so constant bits
fold away inside the gate constructors instead of producing clauses.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .. import bv

TRUE = 1
FALSE = -1


@dataclass
class Cnf:
    num_vars: int
    clauses: list
    bit_map: dict = field(default_factory=dict)  # ((name, cycle), bit) -> cnf var
    var_widths: dict = field(default_factory=dict)  # (name, cycle) -> width

    def decode(self, model):
        """Turn a SAT model (list of bools indexed by variable) into an assignment."""
        out = {key: 0 for key in self.var_widths}
        for (key, bit), var in self.bit_map.items():
            if model[var]:
                out[key] |= 1 << bit
        return out


class BitBlaster:
    def __init__(self):
        self.num_vars = 1
        self.clauses = [[TRUE]]
        self.memo = {}
        self.gates = {}
        self.bit_map = {}
        self.var_widths = {}

    def fresh(self):
        self.num_vars += 1
        return self.num_vars

    # -- gates ---------------------------------------------------------------

    def AND(self, a, b):
        if a == FALSE or b == FALSE or a == -b:
            return FALSE
        if a == TRUE:
            return b
        if b == TRUE or a == b:
            return a
        if a > b:
            a, b = b, a
        key = ("and", a, b)
        g = self.gates.get(key)
        if g is None:
            g = self.fresh()
            self.clauses += [[-g, a], [-g, b], [g, -a, -b]]
            self.gates[key] = g
        return g

    def OR(self, a, b):
        return -self.AND(-a, -b)

    def XOR(self, a, b):
        if a == FALSE:
            return b
        if b == FALSE:
            return a
        if a == TRUE:
            return -b
        if b == TRUE:
            return -a
        if a == b:
            return FALSE
        if a == -b:
            return TRUE
        sign = 1
        if a < 0:
            a, sign = -a, -sign
        if b < 0:
            b, sign = -b, -sign
        if a > b:
            a, b = b, a
        key = ("xor", a, b)
        g = self.gates.get(key)
        if g is None:
            g = self.fresh()
            self.clauses += [[-g, a, b], [-g, -a, -b], [g, -a, b], [g, a, -b]]
            self.gates[key] = g
        return sign * g

    def MUX(self, s, t, e):
        if s == TRUE or t == e:
            return t
        if s == FALSE:
            return e
        if t == TRUE and e == FALSE:
            return s
        if t == FALSE and e == TRUE:
            return -s
        if t == TRUE:
            return self.OR(s, e)
        if t == FALSE:
            return self.AND(-s, e)
        if e == TRUE:
            return self.OR(-s, t)
        if e == FALSE:
            return self.AND(s, t)
        key = ("mux", s, t, e)
        g = self.gates.get(key)
        if g is None:
            g = self.fresh()
            self.clauses += [[-s, -t, g], [-s, t, -g], [s, -e, g], [s, e, -g],
                             [-t, -e, g], [t, e, -g]]
            self.gates[key] = g
        return g

    # -- word-level building blocks -----------------------------------------

    def adder(self, a, b, cin=FALSE):
        out = []
        c = cin
        for x, y in zip(a, b):
            t = self.XOR(x, y)
            out.append(self.XOR(t, c))
            c = self.OR(self.AND(x, y), self.AND(c, t))
        return out, c

    def sub(self, a, b):
        return self.adder(a, [-y for y in b], TRUE)

    def ult(self, a, b):
        _, carry = self.sub(a, b)
        return -carry

    def eq(self, a, b):
        r = TRUE
        for x, y in zip(a, b):
            r = self.AND(r, -self.XOR(x, y))
        return r

    def mul(self, a, b):
        w = len(a)
        acc = [FALSE] * w
        for i in range(w):
            if b[i] == FALSE:
                continue
            partial = [FALSE] * i + [self.AND(a[j], b[i]) for j in range(w - i)]
            acc, _ = self.adder(acc, partial)
        return acc

    def divmod(self, a, b):
        """Restoring division; both results forced to zero when b == 0."""
        w = len(a)
        q = [FALSE] * w
        r = [FALSE] * w
        bx = b + [FALSE]
        for i in range(w - 1, -1, -1):
            shifted = [a[i]] + r  # w+1 bits
            diff, carry = self.sub(shifted, bx)
            ge = carry
            q[i] = ge
            r = [self.MUX(ge, d, s) for d, s in zip(diff[:w], shifted[:w])]
        zero = self.eq(b, [FALSE] * w)
        q = [self.AND(-zero, x) for x in q]
        r = [self.AND(-zero, x) for x in r]
        return q, r

    def shift(self, a, amt, left):
        w = len(a)
        cur = list(a)
        k = 0
        while (1 << k) < w and k < len(amt):
            s = 1 << k
            if left:
                moved = [FALSE] * s + cur[:w - s]
            else:
                moved = cur[s:] + [FALSE] * s
            cur = [self.MUX(amt[k], m, c) for m, c in zip(moved, cur)]
            k += 1
        overflow = FALSE
        for bit in amt[k:]:
            overflow = self.OR(overflow, bit)
        return [self.AND(-overflow, c) for c in cur]

    # -- node translation ----------------------------------------------------

    def bits(self, root):
        memo = self.memo
        for h in bv._postorder([root]):
            if h in memo:
                continue
            memo[h] = self._blast(bv.node(h), [memo[a] for a in bv.node(h).args])
        return memo[root]

    def _blast(self, n, a):
        k, w = n.kind, n.width
        if k == "const":
            v = n.params[0]
            return [TRUE if (v >> i) & 1 else FALSE for i in range(w)]
        if k == "var":
            key = n.params
            self.var_widths[key] = w
            lits = []
            for i in range(w):
                var = self.bit_map.get((key, i))
                if var is None:
                    var = self.fresh()
                    self.bit_map[(key, i)] = var
                lits.append(var)
            return lits
        if k == "and":
            return [self.AND(x, y) for x, y in zip(*a)]
        if k == "or":
            return [self.OR(x, y) for x, y in zip(*a)]
        if k == "xor":
            return [self.XOR(x, y) for x, y in zip(*a)]
        if k == "not":
            return [-x for x in a[0]]
        if k == "add":
            return self.adder(a[0], a[1])[0]
        if k == "sub":
            return self.sub(a[0], a[1])[0]
        if k == "mul":
            return self.mul(a[0], a[1])
        if k == "udiv":
            return self.divmod(a[0], a[1])[0]
        if k == "urem":
            return self.divmod(a[0], a[1])[1]
        if k == "shl":
            return self.shift(a[0], a[1], True)
        if k == "lshr":
            return self.shift(a[0], a[1], False)
        if k == "eq":
            return [self.eq(a[0], a[1])]
        if k == "ne":
            return [-self.eq(a[0], a[1])]
        if k == "ult":
            return [self.ult(a[0], a[1])]
        if k == "ugt":
            return [self.ult(a[1], a[0])]
        if k == "ule":
            return [-self.ult(a[1], a[0])]
        if k == "uge":
            return [-self.ult(a[0], a[1])]
        if k == "ite":
            c = a[0][0]
            return [self.MUX(c, t, e) for t, e in zip(a[1], a[2])]
        if k == "extract":
            hi, lo = n.params
            return a[0][lo:hi + 1]
        if k == "concat":
            out = []
            for part in reversed(a):
                out.extend(part)
            return out
        if k == "zext":
            return a[0] + [FALSE] * (w - len(a[0]))
        if k == "redand":
            r = TRUE
            for x in a[0]:
                r = self.AND(r, x)
            return [r]
        if k == "redor":
            r = FALSE
            for x in a[0]:
                r = self.OR(r, x)
            return [r]
        if k == "redxor":
            r = FALSE
            for x in a[0]:
                r = self.XOR(r, x)
            return [r]
        raise ValueError(f"unknown operator {k!r}")


def bitblast(constraints) -> Cnf:
    """Equisatisfiable CNF for the conjunction of width-1 ``constraints``."""
    bb = BitBlaster()
    for c in constraints:
        if bv.width(c) != 1:
            raise bv.WidthError("constraints must be 1 bit wide")
        lit = bb.bits(c)[0]
        if lit == FALSE:
            bb.clauses.append([])
        elif lit != TRUE:
            bb.clauses.append([lit])
    return Cnf(bb.num_vars, bb.clauses, bb.bit_map, bb.var_widths)
