"""Recognition of token sequences by the syntax automata."""

import logging
from typing import Iterable

from comodi.automata.engine import AutomataEngine, ParseTree, Result, Token
from comodi.automata.network import AutomatonNetwork, MatchClass
from comodi.core.errors import ParseError
from comodi.utils.constants import DEFAULT_FUEL, END_OF_INPUT

logger = logging.getLogger("comodi.automata")


class _TokenEngine(AutomataEngine):
    def __init__(self, net: AutomatonNetwork, tokens: list[Token], fuel: int, memoize: bool):
        super().__init__(net.automata, fuel, memoize=memoize, build_trees=True)
        self.tokens = tokens

    def _leaf(self, position: int) -> Result:
        token = self.tokens[position]
        return position + 1, ParseTree(token.kind, (), (position, position + 1), token)

    def match_terminal(self, text: str, position: int) -> list[Result]:
        token = self.tokens[position]
        if not token.is_eoi and token.text == text:
            return [self._leaf(position)]
        self.fail(position, f'"{text}"')
        return []

    def match_class(self, condition: MatchClass, position: int) -> list[Result]:
        token = self.tokens[position]
        if len(token.text) == 1 and condition.accepts(token.text):
            return [self._leaf(position)]
        self.fail(position, f"? {condition.name} ?")
        return []

    def match_token_kind(self, kind: str, position: int) -> list[Result]:
        token = self.tokens[position]
        if token.kind == kind:
            return [self._leaf(position)]
        self.fail(position, kind)
        return []


def recognize(
    net: AutomatonNetwork,
    tokens: list[Token],
    memoize: bool = True,
    fuel: int = DEFAULT_FUEL,
) -> ParseTree:
    """Parse a token sequence with the start symbol's automaton.

    The root spans every token before end-of-input. Among several parses the
    first one found by ordered depth-first search is returned.

    Args:
        net: Automaton network
        tokens: Tokens ending with the end-of-input token
        memoize: Cache (rule, position) results
        fuel: Step budget

    Returns:
        Parse tree rooted at the start symbol

    Raises:
        ParseError: Input is not in the language (furthest failure and expectations)
        FuelExhaustedError: Step budget exhausted
    """
    if not tokens or not tokens[-1].is_eoi:
        raise ValueError("token list must end with the end-of-input token")

    engine = _TokenEngine(net, tokens, fuel, memoize)
    last = len(tokens) - 1
    for end, tree in engine.run(net.start_symbol, 0):
        if end == last:
            assert tree is not None
            logger.debug(f"Accepted {last} tokens with {net.start_symbol}")
            return tree
        engine.fail(end, END_OF_INPUT)

    position = max(engine.furthest, 0)
    raise ParseError(position, tokens[position], engine.expected)


def accepts(
    net: AutomatonNetwork,
    tokens: list[Token],
    memoize: bool = True,
    fuel: int = DEFAULT_FUEL,
) -> bool:
    """Membership decision without the error details."""
    try:
        recognize(net, tokens, memoize=memoize, fuel=fuel)
    except ParseError:
        return False
    return True


def tokens_from_symbols(symbols: Iterable[str]) -> list[Token]:
    """Token list for a purely syntactic grammar whose terminals are the symbols."""
    tokens = [Token(symbol, symbol, 1, index + 1, index) for index, symbol in enumerate(symbols)]
    tokens.append(Token(END_OF_INPUT, "", 1, len(tokens) + 1, len(tokens)))
    return tokens
