"""EBNF grammar reading and validation."""

from comodi.grammar.ebnf import load_grammar, parse_ebnf, pretty_print
from comodi.grammar.model import Grammar
from comodi.grammar.validate import validate_grammar

__all__ = ["Grammar", "load_grammar", "parse_ebnf", "pretty_print", "validate_grammar"]
