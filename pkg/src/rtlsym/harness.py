"""Test harness: which inputs are symbolic, which are fixed, and for how long.

Harness files are YAML mappings::

    top: counter
    clock: clk
    reset: {signal: rst, active: 1, cycles: 1}
    symbolic:
      - {signal: en, bits: 1, mode: fresh_per_cycle}
    fixed:
      load: 0
    max_cycles: 3
    budgets: {max_paths: 10000, max_solver_calls: 100000, wall_clock_s: 600}

``mode`` is ``hold`` (one symbol held for the whole run, the default) or
``fresh_per_cycle`` (a new symbol every cycle).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import yaml

from .errors import HarnessError

MODES = ("hold", "fresh_per_cycle")


@dataclass(frozen=True)
class SymbolicInput:
    signal: str
    bits: int
    mode: str = "hold"


@dataclass(frozen=True)
class Reset:
    signal: str
    active: int = 1
    cycles: int = 1


@dataclass(frozen=True)
class Budgets:
    max_paths: int = 100_000
    max_solver_calls: int = 1_000_000
    wall_clock_s: float = 3600.0


@dataclass(frozen=True)
class Harness:
    top: str
    max_cycles: int = 1
    clock: Optional[str] = None
    reset: Optional[Reset] = None
    symbolic_inputs: tuple = ()
    fixed_inputs: tuple = ()       # of (signal, value)
    budgets: Budgets = field(default_factory=Budgets)

    def with_overrides(self, max_cycles=None, max_paths=None, max_solver_calls=None,
                       wall_clock_s=None):
        b = self.budgets
        b = Budgets(max_paths if max_paths is not None else b.max_paths,
                    max_solver_calls if max_solver_calls is not None else b.max_solver_calls,
                    wall_clock_s if wall_clock_s is not None else b.wall_clock_s)
        return replace(self, budgets=b,
                       max_cycles=max_cycles if max_cycles is not None else self.max_cycles)


def _int(d, key, where, default=None):
    v = d.get(key, default)
    if v is None:
        raise HarnessError(f"{where}: missing {key!r}")
    if isinstance(v, bool) or not isinstance(v, int):
        raise HarnessError(f"{where}: {key!r} must be an integer, got {v!r}")
    return v


def harness_from_dict(d) -> Harness:
    if not isinstance(d, dict):
        raise HarnessError("harness must be a mapping")
    unknown = set(d) - {"top", "clock", "reset", "symbolic", "fixed", "max_cycles", "budgets"}
    if unknown:
        raise HarnessError(f"unknown harness keys: {', '.join(sorted(unknown))}")
    if "top" not in d:
        raise HarnessError("harness: missing 'top'")
    syms = []
    for i, s in enumerate(d.get("symbolic") or []):
        where = f"symbolic[{i}]"
        if not isinstance(s, dict) or "signal" not in s:
            raise HarnessError(f"{where}: expected a mapping with 'signal'")
        mode = s.get("mode", "hold")
        if mode not in MODES:
            raise HarnessError(f"{where}: mode must be one of {MODES}, got {mode!r}")
        syms.append(SymbolicInput(str(s["signal"]), _int(s, "bits", where), mode))
    fixed = []
    for name, value in (d.get("fixed") or {}).items():
        if isinstance(value, bool) or not isinstance(value, int) or value < 0:
            raise HarnessError(f"fixed input {name!r} must be a non-negative integer")
        fixed.append((str(name), value))
    reset = None
    if d.get("reset") is not None:
        r = d["reset"]
        if not isinstance(r, dict) or "signal" not in r:
            raise HarnessError("reset: expected a mapping with 'signal'")
        reset = Reset(str(r["signal"]), _int(r, "active", "reset", 1), _int(r, "cycles", "reset", 1))
    b = d.get("budgets") or {}
    budgets = Budgets(_int(b, "max_paths", "budgets", Budgets.max_paths),
                      _int(b, "max_solver_calls", "budgets", Budgets.max_solver_calls),
                      float(b.get("wall_clock_s", Budgets.wall_clock_s)))
    return Harness(
        top=str(d["top"]),
        max_cycles=_int(d, "max_cycles", "harness", 1),
        clock=None if d.get("clock") is None else str(d["clock"]),
        reset=reset,
        symbolic_inputs=tuple(syms),
        fixed_inputs=tuple(fixed),
        budgets=budgets,
    )


def load_harness(path) -> Harness:
    with open(path, encoding="utf-8") as fh:
        try:
            data = yaml.safe_load(fh)
        except yaml.YAMLError as exc:
            raise HarnessError(f"{path}: {exc}") from None
    return harness_from_dict(data)


def validate_harness(design, harness: Harness):
    """Check ``harness`` against the design's ports; raises HarnessError."""
    if harness.top != design.name:
        raise HarnessError(f"harness top {harness.top!r} does not match module {design.name!r}")
    if harness.max_cycles < 1:
        raise HarnessError("max_cycles must be at least 1")
    b = harness.budgets
    if b.max_paths < 1 or b.max_solver_calls < 1 or b.wall_clock_s <= 0:
        raise HarnessError("budgets must be positive")

    owner = {}

    def claim(name, role):
        if not design.has_signal(name):
            raise HarnessError(f"unknown signal {name!r}")
        sig = design.signal(name)
        if sig.kind != "input":
            raise HarnessError(f"{name!r} is not an input of {design.name!r}")
        if name in owner:
            raise HarnessError(f"input {name!r} is both {owner[name]} and {role}")
        owner[name] = role
        return sig

    if harness.clock is not None:
        claim(harness.clock, "clock")
    if design.clock is not None:
        clk = design.signals[design.clock].name
        if harness.clock != clk:
            raise HarnessError(f"design is clocked by {clk!r}; harness clock is {harness.clock!r}")
    elif harness.clock is not None:
        raise HarnessError(f"harness names clock {harness.clock!r} but the design has no clocked logic")
    if harness.reset is not None:
        sig = claim(harness.reset.signal, "reset")
        if sig.width != 1:
            raise HarnessError(f"reset {sig.name!r} must be 1 bit wide")
        if harness.reset.active not in (0, 1) or harness.reset.cycles < 0:
            raise HarnessError("reset active level must be 0 or 1 and cycles non-negative")
    for s in harness.symbolic_inputs:
        sig = claim(s.signal, "symbolic")
        if s.bits != sig.width:
            raise HarnessError(f"width mismatch for {s.signal!r}: harness gives {s.bits}, "
                               f"declared {sig.width}")
    for name, value in harness.fixed_inputs:
        sig = claim(name, "fixed")
        if value >= 1 << sig.width:
            raise HarnessError(f"fixed value {value} does not fit {name!r} ({sig.width} bits)")
    uncovered = [s.name for s in design.inputs if s.name not in owner]
    if uncovered:
        raise HarnessError(f"inputs not covered by the harness: {', '.join(uncovered)}")


def controlled_inputs(design, harness):
    """Inputs that appear in test vectors (every input except the clock), in declaration order."""
    return [s for s in design.inputs if s.name != harness.clock]


def reset_value(harness, cycle):
    r = harness.reset
    return r.active if cycle < r.cycles else 1 - r.active
