"""Reader and printer for the supported ISO/IEC 14977 EBNF subset.

Supported notation: terminals in either quote style, ``,`` ``|`` ``[ ]``
``{ }`` ``( )`` ``;``, comments ``(* *)``, repetition factors ``n *``,
special sequences ``? class ?`` from a fixed catalog and exceptions ``-``
between terminal or class operands.

Three comments act as directives: ``(*LEXICAL*)`` and ``(*SYNTAX*)`` open
the token and syntax sections, ``(*SKIP*)`` marks the following lexical
rule as skipped. A file with no section marker is purely syntactic.
"""

import bisect
import logging
import re
from importlib import resources
from pathlib import Path
from typing import NamedTuple, Optional, Union

from comodi.core.errors import (
    DuplicateRuleError,
    GrammarError,
    GrammarSyntaxError,
    MissingSectionMarkerError,
)
from comodi.grammar.model import (
    Alternation,
    Empty,
    Exclusion,
    Grammar,
    Group,
    LexicalRule,
    NonTerminal,
    OptionalPart,
    Repetition,
    RuleExpr,
    Sequence,
    SpecialClass,
    Terminal,
)
from comodi.utils.constants import (
    CHARACTER_CLASSES,
    LEXICAL_MARKER,
    SKIP_MARKER,
    SYNTAX_MARKER,
)

logger = logging.getLogger("comodi.grammar")

_TOKEN_RE = re.compile(
    r"""
      (?P<ws>\s+)
    | (?P<comment>\(\*.*?\*\))
    | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
    | (?P<integer>[0-9]+)
    | (?P<terminal>"[^"\n]*"|'[^'\n]*')
    | (?P<special>\?[^?]*\?)
    | (?P<symbol>[=,|;\[\]{}()\-*])
    """,
    re.VERBOSE | re.DOTALL,
)

_DIRECTIVES = {LEXICAL_MARKER, SYNTAX_MARKER, SKIP_MARKER}

_CLOSERS = {"[": "]", "{": "}", "(": ")"}


class _Tok(NamedTuple):
    kind: str  # ident, integer, terminal, special, symbol, directive, eof
    text: str
    line: int
    column: int


def _scan(text: str, origin: str) -> list[_Tok]:
    line_starts = [0] + [m.end() for m in re.finditer("\n", text)]

    def where(offset: int) -> tuple[int, int]:
        line = bisect.bisect_right(line_starts, offset)
        return line, offset - line_starts[line - 1] + 1

    tokens: list[_Tok] = []
    pos = 0
    while pos < len(text):
        match = _TOKEN_RE.match(text, pos)
        if match is None:
            line, column = where(pos)
            if text.startswith("(*", pos):
                raise GrammarSyntaxError("unterminated comment", line, column, origin)
            if text[pos] in "\"'":
                raise GrammarSyntaxError("unterminated terminal string", line, column, origin)
            if text[pos] == "?":
                raise GrammarSyntaxError("unterminated special sequence", line, column, origin)
            raise GrammarSyntaxError(f"unexpected character {text[pos]!r}", line, column, origin)

        kind = match.lastgroup or ""
        lexeme = match.group()
        line, column = where(pos)
        if kind == "comment":
            body = lexeme[2:-2].strip()
            if body in _DIRECTIVES:
                tokens.append(_Tok("directive", body, line, column))
        elif kind == "terminal":
            if len(lexeme) == 2:
                raise GrammarSyntaxError("empty terminal string", line, column, origin)
            tokens.append(_Tok(kind, lexeme[1:-1], line, column))
        elif kind == "special":
            name = lexeme[1:-1].strip()
            if name not in CHARACTER_CLASSES:
                raise GrammarSyntaxError(
                    f"unknown special sequence '? {name} ?' (supported: {', '.join(CHARACTER_CLASSES)})",
                    line,
                    column,
                    origin,
                )
            tokens.append(_Tok(kind, name, line, column))
        elif kind != "ws":
            tokens.append(_Tok(kind, lexeme, line, column))
        pos = match.end()

    line, column = where(len(text))
    tokens.append(_Tok("eof", "", line, column))
    return tokens


class _Parser:
    """Recursive descent over the scanned EBNF tokens."""

    def __init__(self, tokens: list[_Tok], origin: str):
        self.tokens = tokens
        self.origin = origin
        self.index = 0

    # ------------------------------------------------------------------
    # Token helpers
    # ------------------------------------------------------------------

    def _peek(self) -> _Tok:
        return self.tokens[self.index]

    def _advance(self) -> _Tok:
        tok = self.tokens[self.index]
        if tok.kind != "eof":
            self.index += 1
        return tok

    def _at_symbol(self, symbol: str) -> bool:
        tok = self._peek()
        return tok.kind == "symbol" and tok.text == symbol

    def _error(self, message: str, tok: Optional[_Tok] = None) -> GrammarSyntaxError:
        tok = tok or self._peek()
        return GrammarSyntaxError(message, tok.line, tok.column, self.origin)

    def _expect(self, symbol: str) -> _Tok:
        if not self._at_symbol(symbol):
            raise self._error(f"expected '{symbol}', found {_describe(self._peek())}")
        return self._advance()

    # ------------------------------------------------------------------
    # Grammar structure
    # ------------------------------------------------------------------

    def parse(self) -> Grammar:
        rules: dict[str, RuleExpr] = {}
        lexical: list[LexicalRule] = []
        defined: set[str] = set()
        unsectioned: list[str] = []
        section: Optional[str] = None
        saw_lexical = saw_syntax = False
        pending_skip = False

        if self._peek().kind == "eof":
            raise self._error("grammar is empty")

        while self._peek().kind != "eof":
            tok = self._peek()
            if tok.kind == "directive":
                self._advance()
                if pending_skip:
                    raise MissingSectionMarkerError(
                        f"{self.origin}:{tok.line}:{tok.column}: (*SKIP*) must precede a lexical rule"
                    )
                if tok.text == LEXICAL_MARKER:
                    section, saw_lexical = LEXICAL_MARKER, True
                elif tok.text == SYNTAX_MARKER:
                    section, saw_syntax = SYNTAX_MARKER, True
                else:
                    if section != LEXICAL_MARKER:
                        raise MissingSectionMarkerError(
                            f"{self.origin}:{tok.line}:{tok.column}: (*SKIP*) outside the lexical section"
                        )
                    pending_skip = True
                continue

            name_tok, expr = self._rule()
            if name_tok.text in defined:
                raise DuplicateRuleError(name_tok.text, name_tok.line, name_tok.column)
            defined.add(name_tok.text)

            if section == LEXICAL_MARKER:
                lexical.append(LexicalRule(name_tok.text, expr, pending_skip))
            else:
                rules[name_tok.text] = expr
                if section is None:
                    unsectioned.append(name_tok.text)
            pending_skip = False

        if pending_skip:
            raise MissingSectionMarkerError(f"{self.origin}: (*SKIP*) is not followed by a lexical rule")
        if saw_lexical and not saw_syntax:
            raise MissingSectionMarkerError(f"{self.origin}: lexical section without a (*SYNTAX*) section")
        if (saw_lexical or saw_syntax) and unsectioned:
            raise MissingSectionMarkerError(
                f"{self.origin}: rule '{unsectioned[0]}' precedes the first section marker"
            )
        if not rules:
            raise self._error("grammar defines no syntax rules")

        return Grammar(
            rules=rules,
            start_symbol=next(iter(rules)),
            lexical_rules=tuple(lexical),
            origin=self.origin,
        )

    def _rule(self) -> tuple[_Tok, RuleExpr]:
        name_tok = self._peek()
        if name_tok.kind != "ident":
            raise self._error(f"expected rule name, found {_describe(name_tok)}")
        self._advance()
        self._expect("=")
        expr = self._definitions(";")
        self._expect(";")
        return name_tok, expr

    def _definitions(self, closer: str) -> RuleExpr:
        options = [self._single_definition(closer)]
        while self._at_symbol("|"):
            self._advance()
            options.append(self._single_definition(closer))

        if len(options) == 1:
            if options[0] is None:
                raise self._error("empty definition")
            return options[0]
        return Alternation(tuple(Empty() if option is None else option for option in options))

    def _single_definition(self, closer: str) -> Optional[RuleExpr]:
        if self._at_symbol("|") or self._at_symbol(closer):
            return None

        items = self._term()
        while self._at_symbol(","):
            self._advance()
            items.extend(self._term())

        if len(items) == 1:
            return items[0]
        return Sequence(tuple(items))

    def _term(self) -> list[RuleExpr]:
        items = self._factor()
        while self._at_symbol("-"):
            minus = self._advance()
            subtrahend = self._factor()
            if (
                len(items) != 1
                or len(subtrahend) != 1
                or not isinstance(items[0], (Terminal, SpecialClass, Exclusion))
                or not isinstance(subtrahend[0], (Terminal, SpecialClass))
            ):
                raise self._error("exception operands must be terminals or character classes", minus)
            items = [Exclusion(items[0], subtrahend[0])]
        return items

    def _factor(self) -> list[RuleExpr]:
        if self._peek().kind != "integer":
            return [self._primary()]

        count_tok = self._advance()
        count = int(count_tok.text)
        self._expect("*")
        primary = self._primary()
        if isinstance(primary, Repetition) and primary.min_count == 0:
            return [Repetition(primary.inner, count)]
        if count == 0:
            raise self._error("repetition factor must be positive", count_tok)
        return [primary] * count

    def _primary(self) -> RuleExpr:
        tok = self._peek()
        if tok.kind == "ident":
            self._advance()
            return NonTerminal(tok.text)
        if tok.kind == "terminal":
            self._advance()
            return Terminal(tok.text)
        if tok.kind == "special":
            self._advance()
            return SpecialClass(tok.text)
        if tok.kind == "symbol" and tok.text in _CLOSERS:
            self._advance()
            closer = _CLOSERS[tok.text]
            inner = self._definitions(closer)
            self._expect(closer)
            if tok.text == "[":
                return OptionalPart(inner)
            if tok.text == "{":
                return Repetition(inner)
            return Group(inner)
        raise self._error(f"expected expression, found {_describe(tok)}")


def _describe(tok: _Tok) -> str:
    if tok.kind == "eof":
        return "end of grammar"
    return f"'{tok.text}'"


def parse_ebnf(text: str, origin: str = "<grammar>") -> Grammar:
    """Parse EBNF text into a Grammar.

    Args:
        text: Grammar source
        origin: File path or label used in error messages

    Returns:
        Parsed grammar

    Raises:
        GrammarSyntaxError: Text is not well-formed (with line and column)
        DuplicateRuleError: A rule name is defined twice
        MissingSectionMarkerError: Section directives are missing or misplaced
    """
    grammar = _Parser(_scan(text, origin), origin).parse()
    logger.debug(
        f"Parsed grammar {origin}: {len(grammar.rules)} syntax rules, "
        f"{len(grammar.lexical_rules)} lexical rules"
    )
    return grammar


def load_grammar(name_or_path: Union[str, Path]) -> Grammar:
    """Load a grammar file, or a shipped grammar by name (e.g. ``c_subset``).

    Raises:
        GrammarError: No such file or shipped grammar
    """
    path = Path(name_or_path)
    if path.is_file():
        return parse_ebnf(path.read_text(encoding="utf-8"), str(path))

    stem = path.name.removesuffix(".ebnf")
    shipped = resources.files("comodi.grammar").joinpath("data", f"{stem}.ebnf")
    if not shipped.is_file():
        raise GrammarError(f"unknown grammar '{name_or_path}'")
    return parse_ebnf(shipped.read_text(encoding="utf-8"), f"{stem}.ebnf")


# ============================================================================
# Printing
# ============================================================================


def pretty_print(grammar: Grammar) -> str:
    """Render a grammar as EBNF text that parses back to an equal Grammar."""
    lines: list[str] = []
    if grammar.lexical_rules:
        lines.append(f"(*{LEXICAL_MARKER}*)")
        for rule in grammar.lexical_rules:
            if rule.skip:
                lines.append(f"(*{SKIP_MARKER}*)")
            lines.append(f"{rule.name} = {format_expr(rule.expr)};")
        lines.append("")
        lines.append(f"(*{SYNTAX_MARKER}*)")
    for name, expr in grammar.rules.items():
        lines.append(f"{name} = {format_expr(expr)};")
    return "\n".join(lines) + "\n"


def format_expr(expr: RuleExpr) -> str:
    """Render one rule expression in EBNF notation."""
    if isinstance(expr, Alternation):
        return " | ".join(_format_definition(option) for option in expr.options)
    return _format_definition(expr)


def _format_definition(expr: RuleExpr) -> str:
    if isinstance(expr, Empty):
        return ""
    if isinstance(expr, Sequence):
        return ", ".join(_format_term(item) for item in expr.items)
    return _format_term(expr)


def _format_term(expr: RuleExpr) -> str:
    if isinstance(expr, Exclusion):
        return f"{_format_term(expr.base)} - {_format_primary(expr.subtrahend)}"
    if isinstance(expr, Repetition) and expr.min_count > 0:
        return f"{expr.min_count} * {{ {format_expr(expr.inner)} }}"
    return _format_primary(expr)


def _format_primary(expr: RuleExpr) -> str:
    if isinstance(expr, Terminal):
        quote = "'" if '"' in expr.text else '"'
        return f"{quote}{expr.text}{quote}"
    if isinstance(expr, NonTerminal):
        return expr.name
    if isinstance(expr, SpecialClass):
        return f"? {expr.name} ?"
    if isinstance(expr, OptionalPart):
        return f"[ {format_expr(expr.inner)} ]"
    if isinstance(expr, Repetition):
        return f"{{ {format_expr(expr.inner)} }}"
    if isinstance(expr, Group):
        return f"( {format_expr(expr.inner)} )"
    return f"( {format_expr(expr)} )"
