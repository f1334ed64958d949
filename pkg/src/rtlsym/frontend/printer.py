"""Pretty-printer for ModuleAst; output re-parses to an equal AST."""

from __future__ import annotations

from .syntax import (
    AlwaysBlock, Binary, BitSelect, Block, BlockingAssign, Case, Concat,
    Const, ContinuousAssign, If, NonblockingAssign, PartSelect, Ref, Ternary,
    Unary,
)


def _range(width):
    return f"[{width - 1}:0] " if width > 1 else ""


def format_expr(e) -> str:
    if isinstance(e, Const):
        return f"{e.width}'h{e.value:x}" if e.sized else str(e.value)
    if isinstance(e, Ref):
        return e.name
    if isinstance(e, BitSelect):
        return f"{e.name}[{format_expr(e.index)}]"
    if isinstance(e, PartSelect):
        return f"{e.name}[{e.hi}:{e.lo}]"
    if isinstance(e, Unary):
        return f"({e.op}{format_expr(e.operand)})"
    if isinstance(e, Binary):
        return f"({format_expr(e.lhs)} {e.op} {format_expr(e.rhs)})"
    if isinstance(e, Concat):
        return "{" + ", ".join(format_expr(p) for p in e.parts) + "}"
    if isinstance(e, Ternary):
        return f"({format_expr(e.cond)} ? {format_expr(e.then)} : {format_expr(e.else_)})"
    raise TypeError(f"not an expression: {e!r}")


def _stmt(s, depth, out):
    pad = "  " * depth
    if isinstance(s, Block):
        out.append(pad + "begin")
        for sub in s.stmts:
            _stmt(sub, depth + 1, out)
        out.append(pad + "end")
    elif isinstance(s, If):
        out.append(f"{pad}if ({format_expr(s.cond)})")
        _stmt(s.then, depth + 1, out)
        if s.else_ is not None:
            out.append(pad + "else")
            _stmt(s.else_, depth + 1, out)
    elif isinstance(s, Case):
        out.append(f"{pad}case ({format_expr(s.subject)})")
        for arm in s.arms:
            out.append(pad + "  " + ", ".join(format_expr(l) for l in arm.labels) + ":")
            _stmt(arm.body, depth + 2, out)
        if s.default is not None:
            out.append(pad + "  default:")
            _stmt(s.default, depth + 2, out)
        out.append(pad + "endcase")
    elif isinstance(s, BlockingAssign):
        out.append(f"{pad}{format_expr(s.lhs)} = {format_expr(s.rhs)};")
    elif isinstance(s, NonblockingAssign):
        out.append(f"{pad}{format_expr(s.lhs)} <= {format_expr(s.rhs)};")
    else:
        raise TypeError(f"not a statement: {s!r}")


def format_module(m) -> str:
    out = [f"module {m.name}(" + ", ".join(p.name for p in m.ports) + ");"]
    for p in m.ports:
        out.append(f"  {p.direction} {_range(p.width)}{p.name};")
    for n in m.nets:
        out.append(f"  {n.kind} {_range(n.width)}{n.name};")
    for item in m.items:
        if isinstance(item, ContinuousAssign):
            out.append(f"  assign {format_expr(item.lhs)} = {format_expr(item.rhs)};")
        elif isinstance(item, AlwaysBlock):
            sens = item.sensitivity
            if sens.kind == "star":
                head = "@*"
            elif sens.kind == "edge":
                head = "@(" + " or ".join(f"{e} {n}" for e, n in sens.entries) + ")"
            else:
                head = "@(" + " or ".join(sens.entries) + ")"
            out.append(f"  always {head}")
            _stmt(item.body, 2, out)
    out.append("endmodule")
    return "\n".join(out) + "\n"
