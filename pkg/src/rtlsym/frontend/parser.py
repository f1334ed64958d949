"""Recursive-descent parser producing a :class:`ModuleAst`."""

from __future__ import annotations

from ..errors import ParseError
from .lexer import Token, tokenize
from .syntax import (
    AlwaysBlock, Binary, BitSelect, Block, BlockingAssign, Case, CaseArm,
    Concat, Const, ContinuousAssign, If, ModuleAst, NetDecl,
    NonblockingAssign, PartSelect, PortDecl, Ref, Sensitivity, SourceLoc,
    Ternary, Unary,
)

MAX_WIDTH = 128

# binary operator precedence, loosest first
_PRECEDENCE = [
    ("||",),
    ("&&",),
    ("|",),
    ("^",),
    ("&",),
    ("==", "!="),
    ("<", "<=", ">", ">="),
    ("<<", ">>"),
    ("+", "-"),
    ("*", "/", "%"),
]
_UNARY = ("~", "!", "-", "+", "&", "|", "^")


def _describe(tok: Token) -> str:
    if tok.kind == "eof":
        return "end of input"
    return repr(tok.text)


class Parser:
    def __init__(self, tokens, file="<input>"):
        self.tokens = list(tokens)
        if self.tokens:
            last = self.tokens[-1].loc
            eof_loc = SourceLoc(last.file, last.line, last.col + len(self.tokens[-1].text))
        else:
            eof_loc = SourceLoc(file, 1, 1)
        self.tokens.append(Token("eof", "", eof_loc))
        self.pos = 0

    # -- token helpers -------------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def peek(self, k=1) -> Token:
        return self.tokens[min(self.pos + k, len(self.tokens) - 1)]

    def error(self, expected, tok=None):
        tok = tok or self.tok
        return ParseError(tok.loc, expected, _describe(tok))

    def at(self, text) -> bool:
        return self.tok.kind in ("op", "kw") and self.tok.text == text

    def accept(self, text):
        if self.at(text):
            tok = self.tok
            self.pos += 1
            return tok
        return None

    def expect(self, text) -> Token:
        tok = self.accept(text)
        if tok is None:
            raise self.error(repr(text))
        return tok

    def ident(self) -> Token:
        tok = self.tok
        if tok.kind != "ident":
            raise self.error("identifier")
        self.pos += 1
        return tok

    def number(self) -> Token:
        tok = self.tok
        if tok.kind != "const":
            raise self.error("constant")
        self.pos += 1
        return tok

    # -- module structure ------------------------------------------------------

    def parse_module(self) -> ModuleAst:
        start = self.expect("module")
        name = self.ident().text
        ports = {}      # name -> PortDecl (None while only listed in the header)
        order = []
        nets = {}

        def add_port(tok, direction, width):
            if tok.text in ports and ports[tok.text] is not None:
                raise ParseError(tok.loc, "unique port name", repr(tok.text))
            if tok.text not in ports:
                order.append(tok.text)
            ports[tok.text] = PortDecl(tok.text, direction, width, tok.loc)

        def add_net(tok, kind, width):
            if tok.text in nets:
                raise ParseError(tok.loc, "unique net name", repr(tok.text))
            port = ports.get(tok.text)
            if port is not None and port.width != width:
                raise ParseError(tok.loc, f"width {port.width} matching the port declaration",
                                 f"width {width}")
            nets[tok.text] = NetDecl(tok.text, kind, width, tok.loc)

        if self.accept("("):
            if self.at("input") or self.at("output"):
                self._ansi_ports(add_port, add_net)
            elif not self.at(")"):
                while True:
                    tok = self.ident()
                    if tok.text in ports:
                        raise ParseError(tok.loc, "unique port name", repr(tok.text))
                    ports[tok.text] = None
                    order.append(tok.text)
                    if not self.accept(","):
                        break
            self.expect(")")
        self.expect(";")

        items = []
        while not self.at("endmodule"):
            tok = self.tok
            if self.at("input") or self.at("output"):
                self._port_decl(ports, add_port, add_net)
            elif self.at("wire") or self.at("reg"):
                self._net_decl(add_net)
            elif self.at("assign"):
                items.extend(self._assign())
            elif self.at("always"):
                items.append(self._always())
            else:
                raise self.error("module item", tok)
        end = self.expect("endmodule")
        for pname in order:
            if ports[pname] is None:
                raise ParseError(end.loc, f"direction declaration for port {pname!r}",
                                 "'endmodule'")
        # net declarations may precede the port's direction declaration
        for net in nets.values():
            port = ports.get(net.name)
            if port is not None and port.width != net.width:
                raise ParseError(net.loc, f"width {port.width} matching the port declaration",
                                 f"width {net.width}")
            if port is not None and port.direction == "input" and net.kind == "reg":
                raise ParseError(net.loc, "wire for input port", "'reg'")
        if self.tok.kind != "eof":
            raise self.error("end of input (one module per file)")
        return ModuleAst(name, tuple(ports[p] for p in order), tuple(nets.values()),
                         tuple(items), start.loc)

    def _range(self) -> int:
        if not self.at("["):
            return 1
        lb = self.expect("[")
        msb = self.number()
        self.expect(":")
        lsb = self.number()
        self.expect("]")
        if lsb.value != 0 or msb.sized or lsb.sized:
            raise ParseError(lb.loc, "range of the form [N-1:0]",
                             f"[{msb.text}:{lsb.text}]")
        width = msb.value + 1
        if width > MAX_WIDTH:
            raise ParseError(msb.loc, f"width at most {MAX_WIDTH}", str(width))
        return width

    def _net_kind(self):
        if self.at("signed"):
            raise self.error("unsigned declaration")
        kind = None
        if self.accept("reg"):
            kind = "reg"
        elif self.accept("wire"):
            kind = "wire"
        if self.at("signed"):
            raise self.error("unsigned declaration")
        return kind

    def _ansi_ports(self, add_port, add_net):
        direction = kind = None
        width = 1
        while True:
            if self.at("input") or self.at("output"):
                direction = self.tok.text
                self.pos += 1
                kind = self._net_kind()
                width = self._range()
            tok = self.ident()
            add_port(tok, direction, width)
            if kind == "reg":
                if direction == "input":
                    raise ParseError(tok.loc, "wire for input port", "'reg'")
                add_net(tok, "reg", width)
            if not self.accept(","):
                return

    def _port_decl(self, ports, add_port, add_net):
        direction = self.tok.text
        self.pos += 1
        kind = self._net_kind()
        width = self._range()
        while True:
            tok = self.ident()
            if tok.text not in ports:
                raise ParseError(tok.loc, "name listed in the module header", repr(tok.text))
            add_port(tok, direction, width)
            if kind == "reg":
                if direction == "input":
                    raise ParseError(tok.loc, "wire for input port", "'reg'")
                add_net(tok, "reg", width)
            if not self.accept(","):
                break
        self.expect(";")

    def _net_decl(self, add_net):
        kind = self._net_kind()
        width = self._range()
        while True:
            add_net(self.ident(), kind, width)
            if not self.accept(","):
                break
        self.expect(";")

    def _assign(self):
        self.expect("assign")
        items = []
        while True:
            loc = self.tok.loc
            lhs = self.lvalue()
            self.expect("=")
            rhs = self.expr()
            items.append(ContinuousAssign(lhs, rhs, loc))
            if not self.accept(","):
                break
        self.expect(";")
        return items

    def _always(self):
        start = self.expect("always")
        at = self.expect("@")
        if self.accept("*"):
            sens = Sensitivity("star", (), at.loc)
        else:
            self.expect("(")
            if self.accept("*"):
                sens = Sensitivity("star", (), at.loc)
            else:
                sens = self._sensitivity(at.loc)
            self.expect(")")
        body = self.stmt()
        return AlwaysBlock(sens, body, start.loc)

    def _sensitivity(self, loc):
        entries = []
        kinds = set()
        while True:
            if self.at("posedge") or self.at("negedge"):
                edge = self.tok.text
                self.pos += 1
                entries.append((edge, self.ident().text))
                kinds.add("edge")
            else:
                entries.append(self.ident().text)
                kinds.add("level")
            if len(kinds) > 1:
                raise self.error("sensitivity list that is all-level or all-edge",
                                 self.tokens[self.pos - 1])
            if not (self.accept("or") or self.accept(",")):
                break
        return Sensitivity(kinds.pop(), tuple(entries), loc)

    # -- statements ----------------------------------------------------------

    def stmt(self):
        tok = self.tok
        if self.accept("begin"):
            if self.accept(":"):
                self.ident()
            stmts = []
            while not self.accept("end"):
                if self.tok.kind == "eof":
                    raise self.error("'end'")
                stmts.append(self.stmt())
            return Block(tuple(stmts), tok.loc)
        if self.accept("if"):
            self.expect("(")
            cond = self.expr()
            self.expect(")")
            then = self.stmt()
            else_ = self.stmt() if self.accept("else") else None
            return If(cond, then, else_, tok.loc)
        if self.accept("case"):
            return self._case(tok)
        if self.at("casex") or self.at("casez"):
            raise self.error("'case' (casex/casez are not supported)")
        if tok.kind == "ident" or self.at("{"):
            lhs = self.lvalue()
            if self.accept("="):
                cls = BlockingAssign
            elif self.accept("<="):
                cls = NonblockingAssign
            else:
                raise self.error("'=' or '<='")
            rhs = self.expr()
            self.expect(";")
            return cls(lhs, rhs, tok.loc)
        raise self.error("statement")

    def _case(self, start):
        self.expect("(")
        subject = self.expr()
        self.expect(")")
        arms, default = [], None
        seen = set()
        while not self.accept("endcase"):
            tok = self.tok
            if self.accept("default"):
                if default is not None:
                    raise ParseError(tok.loc, "a single default arm", "'default'")
                self.accept(":")
                default = self.stmt()
                continue
            labels = []
            while True:
                lab = self.number()
                if lab.value in seen:
                    raise ParseError(lab.loc, "distinct case label", repr(lab.text))
                seen.add(lab.value)
                labels.append(Const(lab.width, lab.value, lab.sized, lab.loc))
                if not self.accept(","):
                    break
            self.expect(":")
            arms.append(CaseArm(tuple(labels), self.stmt(), tok.loc))
        return Case(subject, tuple(arms), default, start.loc)

    def lvalue(self):
        tok = self.tok
        if self.accept("{"):
            parts = [self.lvalue()]
            while self.accept(","):
                parts.append(self.lvalue())
            self.expect("}")
            return Concat(tuple(parts), tok.loc)
        name = self.ident()
        if self.accept("["):
            hi = self.number()
            if self.accept(":"):
                lo = self.number()
                self.expect("]")
                return PartSelect(name.text, hi.value, lo.value, name.loc)
            self.expect("]")
            return BitSelect(name.text, Const(hi.width, hi.value, hi.sized, hi.loc), name.loc)
        return Ref(name.text, name.loc)

    # -- expressions ---------------------------------------------------------

    def expr(self):
        cond = self._binary(0)
        tok = self.accept("?")
        if tok is None:
            return cond
        then = self.expr()
        self.expect(":")
        else_ = self.expr()
        return Ternary(cond, then, else_, tok.loc)

    def _binary(self, level):
        if level == len(_PRECEDENCE):
            return self._unary()
        lhs = self._binary(level + 1)
        ops = _PRECEDENCE[level]
        while self.tok.kind == "op" and self.tok.text in ops:
            op = self.tok
            self.pos += 1
            rhs = self._binary(level + 1)
            lhs = Binary(op.text, lhs, rhs, op.loc)
        return lhs

    def _unary(self):
        tok = self.tok
        if tok.kind == "op" and tok.text in _UNARY:
            self.pos += 1
            return Unary(tok.text, self._unary(), tok.loc)
        return self._primary()

    def _primary(self):
        tok = self.tok
        if tok.kind == "const":
            self.pos += 1
            return Const(tok.width, tok.value, tok.sized, tok.loc)
        if self.accept("("):
            e = self.expr()
            self.expect(")")
            return e
        if self.accept("{"):
            parts = [self.expr()]
            while self.accept(","):
                parts.append(self.expr())
            self.expect("}")
            return Concat(tuple(parts), tok.loc)
        if tok.kind == "ident":
            self.pos += 1
            if self.accept("["):
                if self.tok.kind == "const" and self.peek().kind == "op" and self.peek().text == ":":
                    hi = self.number()
                    self.expect(":")
                    lo = self.number()
                    self.expect("]")
                    if hi.value < lo.value:
                        raise ParseError(hi.loc, "hi >= lo in part select",
                                         f"[{hi.text}:{lo.text}]")
                    return PartSelect(tok.text, hi.value, lo.value, tok.loc)
                index = self.expr()
                self.expect("]")
                return BitSelect(tok.text, index, tok.loc)
            return Ref(tok.text, tok.loc)
        raise self.error("expression")


def parse_module(tokens, file="<input>") -> ModuleAst:
    return Parser(tokens, file).parse_module()


def parse_source(source: str, file: str = "<input>") -> ModuleAst:
    return parse_module(tokenize(source, file), file)


def parse_file(path) -> ModuleAst:
    with open(path, encoding="utf-8") as fh:
        return parse_source(fh.read(), str(path))
