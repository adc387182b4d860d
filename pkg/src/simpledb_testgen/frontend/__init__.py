"""Lexing, parsing, static checking and printing of SimpleDB models."""
from .ast import ModelDecl, TableDecl
from .checker import CheckedModel, CheckError, CheckFailed, check
from .lexer import LexError, Token, tokenize
from .parser import ParseError, parse, parse_source
from .printer import pretty_print


def load_model(source: str, bitwidth: int = 4) -> CheckedModel:
    """Tokenize, parse and check ``source`` in one go."""
    return check(parse(tokenize(source)), bitwidth=bitwidth)


__all__ = [
    "CheckError", "CheckFailed", "CheckedModel", "LexError", "ModelDecl", "ParseError",
    "TableDecl", "Token", "check", "load_model", "parse", "parse_source", "pretty_print", "tokenize",
]
