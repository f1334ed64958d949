"""Line-oriented test-suite files.

::

    testsuite mux tests=2
    test 0
    trace 0:0
    cycle 0: din_0=0x1 din_1=0x0 sel=0x0
    end

The ``trace`` line (branch id : arm pairs of the path the test was
generated for) is optional on input.
"""

from __future__ import annotations

import json
import re

from .errors import VectorError
from .symexec import TestCase, TestSuite

_CYCLE_RE = re.compile(r"cycle (\d+):(.*)$")


def format_suite(suite: TestSuite) -> str:
    digits = {name: max(1, (w + 3) // 4) for name, w in suite.inputs}
    lines = [f"testsuite {suite.design} tests={len(suite.tests)}"]
    for t in suite.tests:
        lines.append(f"test {t.id}")
        if t.expected_trace is not None:
            lines.append(" ".join(["trace"] + [f"{b}:{a}" for b, a in t.expected_trace]))
        for k, vec in enumerate(t.vectors):
            fields = [f"{name}=0x{vec[name]:0{digits[name]}x}" for name, _ in suite.inputs]
            lines.append(" ".join([f"cycle {k}:"] + fields))
        lines.append("end")
    return "\n".join(lines) + "\n"


def write_suite(suite, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_suite(suite))


def parse_suite(text: str, inputs=None) -> TestSuite:
    """Parse suite text. ``inputs`` ([(name, width)]) enables value checks."""
    lines = [l.strip() for l in text.splitlines() if l.strip()]
    if not lines:
        raise VectorError("empty test-suite file")
    head = lines[0].split()
    if len(head) != 3 or head[0] != "testsuite" or not head[2].startswith("tests="):
        raise VectorError(f"bad header line {lines[0]!r}")
    design = head[1]
    count = int(head[2][len("tests="):])
    widths = dict(inputs) if inputs is not None else None
    tests, cur = [], None
    for no, line in enumerate(lines[1:], start=2):
        if line.startswith("test "):
            if cur is not None:
                raise VectorError(f"line {no}: 'test' before 'end'")
            cur = TestCase(int(line.split()[1]), [], None)
        elif cur is None:
            raise VectorError(f"line {no}: expected 'test <id>'")
        elif line == "end":
            tests.append(cur)
            cur = None
        elif line == "trace" or line.startswith("trace "):
            pairs = line.split()[1:]
            try:
                cur.expected_trace = [tuple(int(x) for x in p.split(":")) for p in pairs]
            except ValueError:
                raise VectorError(f"line {no}: malformed trace") from None
        else:
            m = _CYCLE_RE.match(line)
            if not m or int(m.group(1)) != len(cur.vectors):
                raise VectorError(f"line {no}: expected 'cycle {len(cur.vectors)}: ...'")
            vec = {}
            for field in m.group(2).split():
                name, _, val = field.partition("=")
                if not val.startswith("0x"):
                    raise VectorError(f"line {no}: value for {name!r} must be hex (0x...)")
                try:
                    value = int(val[2:], 16)
                except ValueError:
                    raise VectorError(f"line {no}: bad hex value {val!r}") from None
                if widths is not None:
                    if name not in widths:
                        raise VectorError(f"line {no}: unknown input {name!r}")
                    if value >= 1 << widths[name]:
                        raise VectorError(f"line {no}: {name}={val} exceeds {widths[name]} bits")
                vec[name] = value
            cur.vectors.append(vec)
    if cur is not None:
        raise VectorError("missing final 'end'")
    if len(tests) != count:
        raise VectorError(f"header announces {count} tests, file has {len(tests)}")
    return TestSuite(design, list(inputs) if inputs is not None else [], tests)


def read_suite(path, inputs=None) -> TestSuite:
    with open(path, encoding="utf-8") as fh:
        return parse_suite(fh.read(), inputs)


def dump_json(data, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(data, fh, indent=2, sort_keys=True)
        fh.write("\n")
