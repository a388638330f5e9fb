"""Grammar value types.

Rule expressions are immutable trees; a ``Grammar`` keeps syntax rules in
source order (the first one is the start symbol) and lexical rules as an
ordered list, since declaration order breaks ties between token kinds.
"""

from dataclasses import dataclass, field
from typing import Iterator, Optional, Union


@dataclass(frozen=True)
class Terminal:
    text: str


@dataclass(frozen=True)
class NonTerminal:
    name: str


@dataclass(frozen=True)
class Sequence:
    items: tuple["RuleExpr", ...]


@dataclass(frozen=True)
class Alternation:
    options: tuple["RuleExpr", ...]


@dataclass(frozen=True)
class OptionalPart:
    inner: "RuleExpr"


@dataclass(frozen=True)
class Repetition:
    inner: "RuleExpr"
    min_count: int = 0


@dataclass(frozen=True)
class Group:
    inner: "RuleExpr"


@dataclass(frozen=True)
class SpecialClass:
    """A character class from the fixed catalog (letter, digit, any, eol, whitespace)."""

    name: str


@dataclass(frozen=True)
class Exclusion:
    """``base - subtrahend``; operands are terminals, classes or chained exclusions."""

    base: "RuleExpr"
    subtrahend: "RuleExpr"


@dataclass(frozen=True)
class Empty:
    """The empty alternative, as in ``s = "(", s, ")" | ;``."""


RuleExpr = Union[
    Terminal,
    NonTerminal,
    Sequence,
    Alternation,
    OptionalPart,
    Repetition,
    Group,
    SpecialClass,
    Exclusion,
    Empty,
]


@dataclass(frozen=True)
class LexicalRule:
    name: str
    expr: RuleExpr
    skip: bool = False


@dataclass(frozen=True)
class Grammar:
    """A parsed rule set.

    Attributes:
        rules: syntax rules by name, in source order
        start_symbol: first syntax rule
        lexical_rules: token rules in declaration order
        origin: file path or label the grammar was read from
    """

    rules: dict[str, RuleExpr]
    start_symbol: str
    lexical_rules: tuple[LexicalRule, ...] = ()
    origin: str = field(default="<grammar>", compare=False)

    def lexical_names(self) -> list[str]:
        return [rule.name for rule in self.lexical_rules]

    def lexical_rule(self, name: str) -> Optional[LexicalRule]:
        for rule in self.lexical_rules:
            if rule.name == name:
                return rule
        return None

    def is_lexical(self, name: str) -> bool:
        return self.lexical_rule(name) is not None

    def all_rules(self) -> dict[str, RuleExpr]:
        """Lexical and syntax rules together, lexical first."""
        merged: dict[str, RuleExpr] = {rule.name: rule.expr for rule in self.lexical_rules}
        merged.update(self.rules)
        return merged

    def defines(self, name: str) -> bool:
        return name in self.rules or self.is_lexical(name)


def iter_subexpressions(expr: RuleExpr) -> Iterator[RuleExpr]:
    """Yield ``expr`` and every expression nested inside it, depth first."""
    yield expr
    if isinstance(expr, Sequence):
        for item in expr.items:
            yield from iter_subexpressions(item)
    elif isinstance(expr, Alternation):
        for option in expr.options:
            yield from iter_subexpressions(option)
    elif isinstance(expr, (OptionalPart, Repetition, Group)):
        yield from iter_subexpressions(expr.inner)
    elif isinstance(expr, Exclusion):
        yield from iter_subexpressions(expr.base)
        yield from iter_subexpressions(expr.subtrahend)


def referenced_names(expr: RuleExpr) -> list[str]:
    """Nonterminal names referenced by an expression, first occurrence order."""
    seen: dict[str, None] = {}
    for sub in iter_subexpressions(expr):
        if isinstance(sub, NonTerminal):
            seen.setdefault(sub.name, None)
    return list(seen)
