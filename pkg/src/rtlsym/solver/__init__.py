"""Satisfiability checking for conjunctions of width-1 bitvector constraints.

Two backends share one contract: the built-in path bit-blasts to CNF and
runs :class:`~rtlsym.solver.sat.SatSolver`; the external path pipes an
SMT-LIB2 script into a solver command and parses its answer.
"""

from __future__ import annotations

import re
import shlex
import subprocess
from dataclasses import dataclass
from typing import Optional

from .. import bv
from ..errors import ExternalSolverError
from .bitblast import Cnf, bitblast
from .sat import SAT, UNKNOWN, UNSAT, SatSolver

__all__ = ["SolverConfig", "SolveResult", "Cnf", "bitblast", "sat_solve", "check",
           "SAT", "UNSAT", "UNKNOWN"]


@dataclass(frozen=True)
class SolverConfig:
    backend: str = "builtin"            # "builtin" | "external"
    command: str = "z3 -in"
    timeout_ms: Optional[int] = None
    conflict_limit: Optional[int] = None
    seed: int = 0
    verify_models: bool = False


@dataclass
class SolveResult:
    status: str                          # SAT | UNSAT | UNKNOWN
    model: Optional[dict] = None         # {(name, cycle): value} when SAT
    reason: Optional[str] = None         # "timeout" | "budget" when UNKNOWN

    @property
    def sat(self):
        return self.status == SAT

    @property
    def unsat(self):
        return self.status == UNSAT

    @property
    def unknown(self):
        return self.status == UNKNOWN


def sat_solve(cnf: Cnf, conflict_limit=None, timeout_s=None, seed=0) -> SolveResult:
    solver = SatSolver(cnf.num_vars, cnf.clauses, seed=seed)
    status = solver.solve(conflict_limit, timeout_s)
    if status == SAT:
        return SolveResult(SAT, cnf.decode(solver.model()))
    if status == UNSAT:
        return SolveResult(UNSAT)
    return SolveResult(UNKNOWN, reason=solver.reason_text)


_MODEL_RE = re.compile(
    r"\(define-fun\s+(\|[^|]*\||[^\s()]+)\s+\(\)\s+\(_\s+BitVec\s+(\d+)\)\s+"
    r"(#b[01]+|#x[0-9a-fA-F]+|\(_\s+bv(\d+)\s+\d+\))\s*\)")


def parse_model(text, names):
    """Parse ``define-fun`` entries of a get-model response into an assignment."""
    model = {}
    for m in _MODEL_RE.finditer(text):
        sym, _, lit, dec = m.groups()
        sym = sym.strip("|")
        if sym not in names:
            continue
        if dec is not None:
            value = int(dec)
        elif lit.startswith("#b"):
            value = int(lit[2:], 2)
        else:
            value = int(lit[2:], 16)
        model[names[sym]] = value
    return model


def _check_external(constraints, config: SolverConfig) -> SolveResult:
    script, names = bv.smtlib_script(constraints)
    timeout = None if config.timeout_ms is None else config.timeout_ms / 1000
    try:
        proc = subprocess.run(shlex.split(config.command), input=script, text=True,
                              capture_output=True, timeout=timeout)
    except subprocess.TimeoutExpired:
        return SolveResult(UNKNOWN, reason="timeout")
    except OSError as exc:
        raise ExternalSolverError(f"cannot run solver {config.command!r}: {exc}") from exc
    lines = [l.strip() for l in proc.stdout.splitlines() if l.strip()]
    if not lines:
        raise ExternalSolverError(f"solver produced no output (stderr: {proc.stderr.strip()!r})")
    verdict = lines[0]
    if verdict == "unsat":
        return SolveResult(UNSAT)
    if verdict == "unknown":
        return SolveResult(UNKNOWN, reason="timeout")
    if verdict != "sat":
        raise ExternalSolverError(f"unparseable solver verdict {verdict!r}")
    model = parse_model(proc.stdout, names)
    for sym, key in names.items():
        model.setdefault(key, 0)
    return SolveResult(SAT, model)


def check(constraints, config: SolverConfig = SolverConfig()) -> SolveResult:
    """Decide the conjunction of width-1 ``constraints`` under ``config``."""
    constraints = list(constraints)
    if config.backend == "external":
        result = _check_external(constraints, config)
    elif config.backend == "builtin":
        timeout = None if config.timeout_ms is None else config.timeout_ms / 1000
        result = sat_solve(bitblast(constraints), config.conflict_limit, timeout, config.seed)
    else:
        raise ValueError(f"unknown solver backend {config.backend!r}")
    if config.verify_models and result.sat:
        for c in constraints:
            if bv.eval_concrete(c, result.model, default=0) != 1:
                raise AssertionError(f"solver model {result.model} violates constraint {c}")
    return result
