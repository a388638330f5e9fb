"""Automata network construction, lexing and recognition."""

from comodi.automata.engine import ParseTree, Token
from comodi.automata.lexer import LexResult, lex, tokenize
from comodi.automata.network import AutomatonNetwork, build_network
from comodi.automata.pda import network_to_single_pda, simulate_pda
from comodi.automata.recognizer import accepts, recognize, tokens_from_symbols

__all__ = [
    "AutomatonNetwork",
    "LexResult",
    "ParseTree",
    "Token",
    "accepts",
    "build_network",
    "lex",
    "network_to_single_pda",
    "recognize",
    "simulate_pda",
    "tokenize",
    "tokens_from_symbols",
]
