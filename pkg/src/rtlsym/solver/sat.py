"""CDCL SAT solver: two watched literals, first-UIP learning, VSIDS, Luby restarts.

Literals use DIMACS convention externally. Internally literal ``v`` is coded
as ``2*v`` and ``-v`` as ``2*v + 1``, so negation is ``code ^ 1``.
Decisions pick the highest-activity unassigned variable (lowest index on
ties) and try it false first.
"""

from __future__ import annotations

import heapq
import random
import time

SAT, UNSAT, UNKNOWN = "sat", "unsat", "unknown"

_RESTART_BASE = 64
_DECAY = 0.95


def _luby(i):
    """i-th element (1-based) of the Luby sequence 1 1 2 1 1 2 4 ..."""
    k = 1
    while (1 << k) - 1 < i:
        k += 1
    while True:
        if i == (1 << k) - 1:
            return 1 << (k - 1)
        i -= (1 << (k - 1)) - 1
        k = 1
        while (1 << k) - 1 < i:
            k += 1


class SatSolver:
    def __init__(self, num_vars, clauses, seed=0):
        self.n = num_vars
        size = 2 * (num_vars + 1)
        self.val = [0] * size          # per literal code: 1 true, -1 false, 0 unset
        self.level = [0] * (num_vars + 1)
        self.reason = [None] * (num_vars + 1)
        self.watches = [[] for _ in range(size)]
        self.trail = []
        self.trail_lim = []
        self.qhead = 0
        self.activity = [0.0] * (num_vars + 1)
        self.var_inc = 1.0
        self.conflicts = 0
        self.decisions = 0
        self.ok = True
        self.reason_text = None

        if seed:
            rng = random.Random(seed)
            for v in range(1, num_vars + 1):
                self.activity[v] = rng.random() * 1e-3
        self.heap = [(-self.activity[v], v) for v in range(1, num_vars + 1)]
        heapq.heapify(self.heap)

        for clause in clauses:
            if not self._add_input_clause(clause):
                self.ok = False
                break

    # -- clause database -----------------------------------------------------

    def _add_input_clause(self, clause):
        lits = set()
        for l in clause:
            code = 2 * l if l > 0 else -2 * l + 1
            if code ^ 1 in lits:
                return True  # tautology
            lits.add(code)
        # drop literals already false at level 0, satisfied clauses entirely
        c = []
        for code in sorted(lits):
            v = self.val[code]
            if v == 1:
                return True
            if v == 0:
                c.append(code)
        if not c:
            return False
        if len(c) == 1:
            self._enqueue(c[0], None)
            return self._propagate() is None
        self.watches[c[0]].append(c)
        self.watches[c[1]].append(c)
        return True

    def _enqueue(self, code, reason):
        self.val[code] = 1
        self.val[code ^ 1] = -1
        v = code >> 1
        self.level[v] = len(self.trail_lim)
        self.reason[v] = reason
        self.trail.append(code)

    # -- propagation ---------------------------------------------------------

    def _propagate(self):
        val = self.val
        watches = self.watches
        trail = self.trail
        while self.qhead < len(trail):
            p = trail[self.qhead]
            self.qhead += 1
            false_lit = p ^ 1
            ws = watches[false_lit]
            kept = []
            i, n = 0, len(ws)
            while i < n:
                c = ws[i]
                i += 1
                if c[0] == false_lit:
                    c[0], c[1] = c[1], false_lit
                first = c[0]
                if val[first] == 1:
                    kept.append(c)
                    continue
                for k in range(2, len(c)):
                    lk = c[k]
                    if val[lk] != -1:
                        c[1], c[k] = lk, false_lit
                        watches[lk].append(c)
                        break
                else:
                    kept.append(c)
                    if val[first] == -1:
                        kept.extend(ws[i:])
                        watches[false_lit] = kept
                        self.qhead = len(trail)
                        return c
                    self._enqueue(first, c)
            watches[false_lit] = kept
        return None

    # -- conflict analysis ---------------------------------------------------

    def _bump(self, v):
        self.activity[v] += self.var_inc
        if self.activity[v] > 1e100:
            for u in range(1, self.n + 1):
                self.activity[u] *= 1e-100
            self.var_inc *= 1e-100
            self.heap = [(-self.activity[u], u) for u in range(1, self.n + 1)
                         if self.val[2 * u] == 0]
            heapq.heapify(self.heap)

    def _analyze(self, confl):
        seen = set()
        learnt = [0]
        level = self.level
        cur = len(self.trail_lim)
        path = 0
        p = None
        idx = len(self.trail) - 1
        c = confl
        while True:
            start = 0 if p is None else 1
            for q in c[start:]:
                v = q >> 1
                if v not in seen and level[v] > 0:
                    seen.add(v)
                    self._bump(v)
                    if level[v] == cur:
                        path += 1
                    else:
                        learnt.append(q)
            while (self.trail[idx] >> 1) not in seen:
                idx -= 1
            p = self.trail[idx]
            idx -= 1
            v = p >> 1
            seen.discard(v)
            path -= 1
            if path == 0:
                break
            c = self.reason[v]
        learnt[0] = p ^ 1
        if len(learnt) == 1:
            return learnt, 0
        best = max(range(1, len(learnt)), key=lambda i: level[learnt[i] >> 1])
        learnt[1], learnt[best] = learnt[best], learnt[1]
        return learnt, level[learnt[1] >> 1]

    def _backtrack(self, lvl):
        if len(self.trail_lim) <= lvl:
            return
        stop = self.trail_lim[lvl]
        val, heap, act = self.val, self.heap, self.activity
        for code in self.trail[stop:]:
            val[code] = 0
            val[code ^ 1] = 0
            v = code >> 1
            self.reason[v] = None
            heapq.heappush(heap, (-act[v], v))
        del self.trail[stop:]
        del self.trail_lim[lvl:]
        self.qhead = len(self.trail)

    def _pick(self):
        heap, val, act = self.heap, self.val, self.activity
        while heap:
            a, v = heapq.heappop(heap)
            if val[2 * v] == 0 and -a == act[v]:
                return v
        return None

    # -- search --------------------------------------------------------------

    def solve(self, conflict_limit=None, timeout_s=None):
        """Return SAT, UNSAT or UNKNOWN (budget tripped; see ``reason_text``)."""
        if not self.ok:
            return UNSAT
        if self._propagate() is not None:
            self.ok = False
            return UNSAT
        deadline = None if timeout_s is None else time.monotonic() + timeout_s
        restart_i = 1
        until_restart = _RESTART_BASE * _luby(restart_i)
        while True:
            confl = self._propagate()
            if confl is not None:
                self.conflicts += 1
                if not self.trail_lim:
                    self.ok = False
                    return UNSAT
                learnt, back = self._analyze(confl)
                self._backtrack(back)
                if len(learnt) == 1:
                    self._enqueue(learnt[0], None)
                else:
                    self.watches[learnt[0]].append(learnt)
                    self.watches[learnt[1]].append(learnt)
                    self._enqueue(learnt[0], learnt)
                self.var_inc /= _DECAY
                if conflict_limit is not None and self.conflicts >= conflict_limit:
                    self.reason_text = "budget"
                    return UNKNOWN
                if deadline is not None and time.monotonic() > deadline:
                    self.reason_text = "timeout"
                    return UNKNOWN
                until_restart -= 1
                if until_restart <= 0:
                    restart_i += 1
                    until_restart = _RESTART_BASE * _luby(restart_i)
                    self._backtrack(0)
                continue
            v = self._pick()
            if v is None:
                return SAT
            self.decisions += 1
            if deadline is not None and self.decisions % 1024 == 0 and time.monotonic() > deadline:
                self.reason_text = "timeout"
                return UNKNOWN
            self.trail_lim.append(len(self.trail))
            self._enqueue(2 * v + 1, None)

    def model(self):
        """Truth value per variable (index 0 unused); unassigned variables read false."""
        return [False] + [self.val[2 * v] == 1 for v in range(1, self.n + 1)]


def solve_cnf(num_vars, clauses, conflict_limit=None, timeout_s=None, seed=0):
    """Convenience wrapper: returns ``(status, model_or_None, reason)``."""
    s = SatSolver(num_vars, clauses, seed=seed)
    status = s.solve(conflict_limit, timeout_s)
    return status, (s.model() if status == SAT else None), s.reason_text
