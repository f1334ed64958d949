import pytest

from rtlsym.elaborate import Assign, BlockStmt, CaseStmt, IfStmt, XOp, elaborate, width_of
from rtlsym.errors import ElabError
from rtlsym.frontend import parse_file, parse_source
from rtlsym.frontend import syntax as ast

from conftest import ALL, corpus_path, design_from, load


def test_mux_tables():
    d, _ = load("mux")
    assert [s.name for s in d.signals] == ["din_0", "din_1", "sel", "mux_out"]
    assert [p.kind for p in d.processes] == ["comb"]
    assert len(d.stmt_table) == 2
    assert d.arm_counts == (2,)
    assert d.clock is None
    assert d.warnings == []


W = {"a": 4, "b": 8, "c": 1}


@pytest.mark.parametrize("expr,width", [
    ("a + b", 8), ("a == b", 1), ("{a, b}", 12), ("c ? a : b", 8), ("a << b", 4),
    ("b / a", 8), ("a % b", 4), ("~a", 4), ("&b", 1), ("!a", 1), ("a && b", 1),
    ("a - 1", 32), ("b[3:1]", 3), ("b[a]", 1), ("4'd3 * a", 4),
])
def test_width_rules(expr, width):
    m = parse_source(f"module m(input [3:0] a, input [7:0] b, input c, output y); "
                     f"assign y = {expr}; endmodule")
    assert width_of(m.items[0].rhs, W) == width


def test_literal_overflow():
    with pytest.raises(ElabError, match="overflows"):
        design_from("module m(output [1:0] y); assign y = 2'b111; endmodule")


@pytest.mark.parametrize("src,msg", [
    ("module m(input a, b, output y); assign y = a; assign y = b; endmodule", "multiple drivers"),
    ("module m(output y); wire a, b; assign a = b; assign b = a; assign y = a; endmodule",
     "combinational cycle"),
    ("module m(input a, output reg y); always @* y = y + a; endmodule", "combinational cycle"),
    ("module m(input a, output y); assign y = q; endmodule", "undeclared"),
    ("module m(input a, output y); assign a = 1'b0; assign y = a; endmodule", "input"),
    ("module m(input clk, a, output reg y); always @(posedge clk) begin y = a; y <= a; end endmodule",
     "nonblocking"),
    ("module m(input a, output reg y); always @* y <= a; endmodule", "blocking"),
    ("module m(input c1, c2, a, output reg y, z); always @(posedge c1) y <= a; "
     "always @(posedge c2) z <= a; endmodule", "multiple clocks"),
    ("module m(input a, output reg [3:0] y); always @* y[4] = a; endmodule", "range"),
])
def test_elab_errors(src, msg):
    with pytest.raises(ElabError, match=msg):
        design_from(src)


def test_incomplete_sensitivity_warns():
    d = design_from("module m(input a, b, output reg y); always @(a) y = a & b; endmodule")
    assert len(d.warnings) == 1 and "b" in d.warnings[0]
    assert d.comb[0].read_set == {d.signal("a").index, d.signal("b").index}


def test_topological_order_ignores_source_order():
    d = design_from("""
module m(input a, output y);
  wire t1, t2;
  assign y = t2;
  assign t2 = ~t1;
  assign t1 = a;
endmodule""")
    order = [next(iter(p.write_set)) for p in d.comb]
    names = [d.signals[i].name for i in order]
    assert names == ["t1", "t2", "y"]


def test_clock_identified_and_processes_ordered():
    d, _ = load("rcounter")
    assert d.signals[d.clock].name == "clk"
    kinds = [p.kind for p in d.processes]
    assert kinds == sorted(kinds, key=lambda k: k != "comb")


def _walk(stmt, stmts, branches):
    if stmt is None:
        return
    if isinstance(stmt, Assign):
        stmts.append(stmt.sid)
    elif isinstance(stmt, BlockStmt):
        for s in stmt.stmts:
            _walk(s, stmts, branches)
    elif isinstance(stmt, IfStmt):
        branches.append((stmt.bid, 2))
        _walk(stmt.then, stmts, branches)
        _walk(stmt.else_, stmts, branches)
    elif isinstance(stmt, CaseStmt):
        branches.append((stmt.bid, len(stmt.bodies) + 1))
        for b in stmt.bodies:
            _walk(b, stmts, branches)
        _walk(stmt.default, stmts, branches)


def _ast_counts(s):
    if s is None:
        return 0, 0
    if isinstance(s, (ast.BlockingAssign, ast.NonblockingAssign)):
        return 1, 0
    if isinstance(s, ast.Block):
        parts = [_ast_counts(x) for x in s.stmts]
    elif isinstance(s, ast.If):
        parts = [_ast_counts(s.then), _ast_counts(s.else_), (0, 2)]
    else:
        parts = [_ast_counts(a.body) for a in s.arms] + [_ast_counts(s.default), (0, len(s.arms) + 1)]
    return sum(p[0] for p in parts), sum(p[1] for p in parts)


@pytest.mark.parametrize("name", ALL)
def test_tables_cover_each_statement_once(name):
    m = parse_file(corpus_path(name))
    d = elaborate(m)
    stmts, branches = [], []
    for p in d.processes:
        _walk(p.body, stmts, branches)
    assert sorted(stmts) == list(range(len(d.stmt_table)))
    assert sorted(b for b, _ in branches) == list(range(len(d.branch_table)))
    assert all(d.branch_table[b].arms == n for b, n in branches)
    # AST oracle: count statements and arms directly on the syntax tree
    n_stmt = n_arm = 0
    for item in m.items:
        if isinstance(item, ast.ContinuousAssign):
            n_stmt += 1
        else:
            s, a = _ast_counts(item.body)
            n_stmt, n_arm = n_stmt + s, n_arm + a
    assert (len(d.stmt_table), sum(d.arm_counts)) == (n_stmt, n_arm)


@pytest.mark.parametrize("name", ALL)
def test_elaboration_is_deterministic(name):
    a = elaborate(parse_file(corpus_path(name)))
    b = elaborate(parse_file(corpus_path(name)))
    assert a.signals == b.signals
    assert a.processes == b.processes
    assert a.stmt_table == b.stmt_table and a.branch_table == b.branch_table


def test_expressions_are_width_explicit():
    d = design_from("module m(input [3:0] a, input [7:0] b, output [7:0] y); "
                    "assign y = a + b; endmodule")
    rhs = d.comb[0].body.rhs
    assert isinstance(rhs, XOp) and rhs.op == "add" and rhs.width == 8
    assert all(x.width == 8 for x in rhs.args)


def test_concat_lvalue_targets():
    d = design_from("module m(input [3:0] a, b, output [3:0] s, output c); "
                    "assign {c, s} = {1'b0, a} + {1'b0, b}; endmodule")
    assert len(d.comb) == 1
    st = d.comb[0].body
    assert [(d.signals[t.sig].name, t.width) for t in st.targets] == [("c", 1), ("s", 4)]
