"""Lexical analysis with the network's lexical automata."""

import logging
from dataclasses import dataclass, field

from comodi.automata.engine import AutomataEngine, Result, Token
from comodi.automata.network import AutomatonNetwork, MatchClass
from comodi.core.errors import GrammarError, LexicalError
from comodi.utils.constants import DEFAULT_FUEL, END_OF_INPUT

logger = logging.getLogger("comodi.automata")


LINE_BREAK = MatchClass("eol")


class _CharEngine(AutomataEngine):
    """Runs lexical automata over characters; trees are not built.

    The start of input counts as a line break, so line-anchored lexemes such
    as fixed-form comment lines also match on the first line.
    """

    def __init__(self, net: AutomatonNetwork, text: str, fuel: int):
        super().__init__(net.lexical_automata(), fuel, memoize=True, build_trees=False)
        self.text = text

    def match_terminal(self, text: str, position: int) -> list[Result]:
        if self.text.startswith(text, position):
            return [(position + len(text), None)]
        return []

    def match_class(self, condition: MatchClass, position: int) -> list[Result]:
        results: list[Result] = []
        if position == 0 and condition == LINE_BREAK:
            results.append((0, None))
        if position < len(self.text) and condition.accepts(self.text[position]):
            results.append((position + 1, None))
        return results


@dataclass
class LexResult:
    """Tokens plus what the lexer consumed without emitting."""

    tokens: list[Token]
    comments: list[Token] = field(default_factory=list)
    skipped: list[Token] = field(default_factory=list)


def is_comment_kind(kind: str) -> bool:
    return "comment" in kind


def lex(net: AutomatonNetwork, text: str, fuel: int = DEFAULT_FUEL) -> LexResult:
    """Split text into tokens by longest match; the first-declared rule wins ties.

    Skipped lexemes are dropped from ``tokens``; those of comment kinds are
    also kept in ``comments``. The token list ends with an end-of-input token.

    Raises:
        LexicalError: No lexical automaton matches at a position
    """
    if not net.lexical:
        raise GrammarError(f"grammar {net.grammar.origin} has no lexical rules")

    engine = _CharEngine(net, text, fuel)
    result = LexResult(tokens=[])
    position, line, column = 0, 1, 1

    while position < len(text):
        engine.refuel()
        best_end, best = position, None
        for entry in net.lexical:
            ends = [end for end, _ in engine.run(entry.kind, position)]
            if ends and max(ends) > best_end:
                best_end, best = max(ends), entry

        if best is None:
            raise LexicalError(line, column, text[position])

        lexeme = text[position:best_end]
        token = Token(best.kind, lexeme, line, column, position)
        if best.skip:
            result.skipped.append(token)
            if is_comment_kind(best.kind):
                result.comments.append(token)
        else:
            result.tokens.append(token)

        newlines = lexeme.count("\n")
        if newlines:
            line += newlines
            column = len(lexeme) - lexeme.rfind("\n")
        else:
            column += len(lexeme)
        position = best_end

    result.tokens.append(Token(END_OF_INPUT, "", line, column, len(text)))
    logger.debug(
        f"Lexed {len(text)} characters: {len(result.tokens) - 1} tokens, {len(result.comments)} comments"
    )
    return result


def tokenize(net: AutomatonNetwork, text: str, fuel: int = DEFAULT_FUEL) -> list[Token]:
    """Token list of ``text``, ending with the end-of-input token."""
    return lex(net, text, fuel).tokens
