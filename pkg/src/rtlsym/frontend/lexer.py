"""Tokenizer for the Verilog subset."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from ..errors import LexError
from .syntax import SourceLoc

KEYWORDS = frozenset("""
    module endmodule input output inout wire reg assign always posedge negedge
    or begin end if else case casex casez endcase default signed integer
    parameter localparam generate endgenerate function endfunction initial
""".split())

# longest first
OPERATORS = ("<<", ">>", "<=", ">=", "==", "!=", "&&", "||",
             "+", "-", "*", "/", "%", "&", "|", "^", "~", "!", "<", ">",
             "=", "?", ":", ";", ",", "(", ")", "[", "]", "{", "}", "@", "#")

MAX_UNSIZED_WIDTH = 32
_BASES = {"b": 2, "o": 8, "d": 10, "h": 16}

_ident_re = re.compile(r"[A-Za-z_][A-Za-z0-9_$]*")
_based_re = re.compile(r"(\d[\d_]*)?'([bBoOdDhH])([0-9a-zA-Z_]+)")
_decimal_re = re.compile(r"\d[\d_]*")
_space_re = re.compile(r"[ \t\r\f\v]+")


@dataclass(frozen=True)
class Token:
    kind: str  # "ident" | "kw" | "const" | "op"
    text: str
    loc: SourceLoc
    width: Optional[int] = None
    value: Optional[int] = None
    sized: bool = False

    def __repr__(self):
        if self.kind == "const":
            return f"Const(width={self.width}, value={self.value})"
        return f"{self.kind.capitalize()}({self.text})"


def _parse_digits(digits: str, base: int, loc: SourceLoc) -> int:
    digits = digits.replace("_", "")
    if not digits:
        raise LexError(loc, "literal has no digits")
    if any(c in "xXzZ?" for c in digits):
        raise LexError(loc, "x/z digits are not supported (two-state logic only)")
    try:
        return int(digits, base)
    except ValueError:
        raise LexError(loc, f"malformed base-{base} literal {digits!r}") from None


def tokenize(source: str, file: str = "<input>") -> list:
    """Split ``source`` into tokens, dropping whitespace and comments."""
    tokens = []
    pos, line, line_start = 0, 1, 0
    n = len(source)

    while pos < n:
        ch = source[pos]
        loc = SourceLoc(file, line, pos - line_start + 1)
        if ch == "\n":
            pos += 1
            line += 1
            line_start = pos
            continue
        m = _space_re.match(source, pos)
        if m:
            pos = m.end()
            continue
        if source.startswith("//", pos):
            end = source.find("\n", pos)
            pos = n if end < 0 else end
            continue
        if source.startswith("/*", pos):
            end = source.find("*/", pos + 2)
            if end < 0:
                raise LexError(loc, "unterminated block comment")
            chunk = source[pos:end + 2]
            nl = chunk.count("\n")
            if nl:
                line += nl
                line_start = pos + chunk.rfind("\n") + 1
            pos = end + 2
            continue

        m = _based_re.match(source, pos)
        if m:
            size, base, digits = m.groups()
            value = _parse_digits(digits, _BASES[base.lower()], loc)
            if size is not None:
                width = int(size.replace("_", ""))
                if width < 1:
                    raise LexError(loc, "literal width must be at least 1")
                sized = True
            else:
                width, sized = MAX_UNSIZED_WIDTH, False
            tokens.append(Token("const", m.group(0), loc, width, value, sized))
            pos = m.end()
            continue
        m = _decimal_re.match(source, pos)
        if m:
            if m.end() < n and (source[m.end()].isalpha() or source[m.end()] == "_"):
                raise LexError(loc, f"malformed literal {source[pos:m.end() + 1]!r}")
            value = int(m.group(0).replace("_", ""))
            if value >= 1 << MAX_UNSIZED_WIDTH:
                raise LexError(loc, "unsized literal does not fit in 32 bits")
            tokens.append(Token("const", m.group(0), loc, MAX_UNSIZED_WIDTH, value, False))
            pos = m.end()
            continue
        m = _ident_re.match(source, pos)
        if m:
            text = m.group(0)
            tokens.append(Token("kw" if text in KEYWORDS else "ident", text, loc))
            pos = m.end()
            continue
        if ch == "`":
            raise LexError(loc, "preprocessor directives are not supported")
        for op in OPERATORS:
            if source.startswith(op, pos):
                tokens.append(Token("op", op, loc))
                pos += len(op)
                break
        else:
            raise LexError(loc, f"illegal character {ch!r}")
    return tokens
