"""Lexer, parser and pretty-printer for the textual fairness-spec language."""

from .lexer import Token, tokenize
from .parser import ParseResult, parse_predicate, parse_spec
from .pretty import pretty_function, pretty_predicate, pretty_row_expr, pretty_spec

__all__ = [
    "Token",
    "tokenize",
    "ParseResult",
    "parse_spec",
    "parse_predicate",
    "pretty_spec",
    "pretty_predicate",
    "pretty_row_expr",
    "pretty_function",
]
