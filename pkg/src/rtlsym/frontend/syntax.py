"""AST node types for the supported Verilog subset.

Every node carries a ``loc``; locations are excluded from equality so two
parses of differently formatted text compare structurally.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union


@dataclass(frozen=True, order=True)
class SourceLoc:
    file: str
    line: int
    col: int

    def __post_init__(self):
        if self.line < 1 or self.col < 1:
            raise ValueError(f"invalid source location {self.line}:{self.col}")

    def __str__(self):
        return f"{self.file}:{self.line}:{self.col}"


def _loc():
    return field(default=None, compare=False, repr=False)


# -- expressions -------------------------------------------------------------

@dataclass(frozen=True)
class Const:
    width: int
    value: int
    sized: bool = True
    loc: Optional[SourceLoc] = _loc()


@dataclass(frozen=True)
class Ref:
    name: str
    loc: Optional[SourceLoc] = _loc()


@dataclass(frozen=True)
class BitSelect:
    name: str
    index: "Expr"
    loc: Optional[SourceLoc] = _loc()


@dataclass(frozen=True)
class PartSelect:
    name: str
    hi: int
    lo: int
    loc: Optional[SourceLoc] = _loc()


@dataclass(frozen=True)
class Unary:
    op: str
    operand: "Expr"
    loc: Optional[SourceLoc] = _loc()


@dataclass(frozen=True)
class Binary:
    op: str
    lhs: "Expr"
    rhs: "Expr"
    loc: Optional[SourceLoc] = _loc()


@dataclass(frozen=True)
class Concat:
    parts: tuple
    loc: Optional[SourceLoc] = _loc()


@dataclass(frozen=True)
class Ternary:
    cond: "Expr"
    then: "Expr"
    else_: "Expr"
    loc: Optional[SourceLoc] = _loc()


Expr = Union[Const, Ref, BitSelect, PartSelect, Unary, Binary, Concat, Ternary]
# Assignment targets reuse Ref / BitSelect (constant index) / PartSelect / Concat.
LValue = Union[Ref, BitSelect, PartSelect, Concat]

UNARY_OPS = ("~", "!", "-", "+", "&", "|", "^")
BINARY_OPS = ("+", "-", "*", "/", "%", "&", "|", "^", "<<", ">>",
              "==", "!=", "<", "<=", ">", ">=", "&&", "||")


# -- statements --------------------------------------------------------------

@dataclass(frozen=True)
class Block:
    stmts: tuple
    loc: Optional[SourceLoc] = _loc()


@dataclass(frozen=True)
class If:
    cond: Expr
    then: "Stmt"
    else_: Optional["Stmt"] = None
    loc: Optional[SourceLoc] = _loc()


@dataclass(frozen=True)
class CaseArm:
    labels: tuple  # of Const
    body: "Stmt"
    loc: Optional[SourceLoc] = _loc()


@dataclass(frozen=True)
class Case:
    subject: Expr
    arms: tuple  # of CaseArm
    default: Optional["Stmt"] = None
    loc: Optional[SourceLoc] = _loc()


@dataclass(frozen=True)
class BlockingAssign:
    lhs: LValue
    rhs: Expr
    loc: Optional[SourceLoc] = _loc()


@dataclass(frozen=True)
class NonblockingAssign:
    lhs: LValue
    rhs: Expr
    loc: Optional[SourceLoc] = _loc()


Stmt = Union[Block, If, Case, BlockingAssign, NonblockingAssign]


# -- module items ------------------------------------------------------------

@dataclass(frozen=True)
class PortDecl:
    name: str
    direction: str  # "input" | "output"
    width: int
    loc: Optional[SourceLoc] = _loc()


@dataclass(frozen=True)
class NetDecl:
    name: str
    kind: str  # "reg" | "wire"
    width: int
    loc: Optional[SourceLoc] = _loc()


@dataclass(frozen=True)
class Sensitivity:
    """``kind`` is "star" (``@*``), "level" or "edge".

    Level entries are signal names; edge entries are ``(edge, name)`` pairs.
    """

    kind: str
    entries: tuple = ()
    loc: Optional[SourceLoc] = _loc()


@dataclass(frozen=True)
class ContinuousAssign:
    lhs: LValue
    rhs: Expr
    loc: Optional[SourceLoc] = _loc()


@dataclass(frozen=True)
class AlwaysBlock:
    sensitivity: Sensitivity
    body: Stmt
    loc: Optional[SourceLoc] = _loc()


Item = Union[ContinuousAssign, AlwaysBlock]


@dataclass(frozen=True)
class ModuleAst:
    name: str
    ports: tuple = ()
    nets: tuple = ()
    items: tuple = ()
    loc: Optional[SourceLoc] = _loc()

    def port(self, name):
        for p in self.ports:
            if p.name == name:
                return p
        return None
