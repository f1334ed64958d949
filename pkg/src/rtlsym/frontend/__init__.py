"""Verilog subset frontend: tokenizer, parser and pretty-printer."""

from .lexer import Token, tokenize
from .parser import parse_file, parse_module, parse_source
from .printer import format_expr, format_module
from .syntax import ModuleAst, SourceLoc

__all__ = ["Token", "tokenize", "parse_module", "parse_source", "parse_file",
           "format_module", "format_expr", "ModuleAst", "SourceLoc"]
