"""rtlsym: symbolic test generation and coverage replay for synthesizable Verilog."""

from .elaborate import RtlDesign, elaborate
from .frontend import parse_file, parse_source
from .harness import Harness, harness_from_dict, load_harness
from .replay import CoverageData, merge, report, simulate
from .solver import SolverConfig, check
from .symexec import TestCase, TestSuite, run

__version__ = "0.1.0"

__all__ = ["parse_file", "parse_source", "elaborate", "RtlDesign", "Harness",
           "harness_from_dict", "load_harness", "SolverConfig", "check", "run",
           "TestCase", "TestSuite", "simulate", "merge", "report", "CoverageData"]
