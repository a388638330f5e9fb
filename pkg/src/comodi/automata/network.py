"""Automata network construction.

Each rule becomes one automaton with a private marker stack. State 0 is
initial and state 1 is the single final state. Alternatives share their
entry and exit states, optional parts add an epsilon bypass, repetitions
get a fresh loop state with a back edge, and group boundaries compile to a
``push`` on entry and a matching ``popExpect`` on exit.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Union

from comodi.core.diagnostics import errors_only
from comodi.core.errors import GrammarRejectedError
from comodi.grammar.model import (
    Alternation,
    Empty,
    Exclusion,
    Grammar,
    Group,
    NonTerminal,
    OptionalPart,
    Repetition,
    RuleExpr,
    Sequence,
    SpecialClass,
    Terminal,
)
from comodi.grammar.validate import validate_grammar

logger = logging.getLogger("comodi.automata")

INITIAL_STATE = 0
FINAL_STATE = 1


# ============================================================================
# Transition conditions and stack operations
# ============================================================================


@dataclass(frozen=True)
class MatchTerminal:
    text: str


@dataclass(frozen=True)
class MatchClass:
    """One character of a class, minus excluded texts and classes."""

    name: str
    excluded_texts: tuple[str, ...] = ()
    excluded_classes: tuple[str, ...] = ()

    def accepts(self, char: str) -> bool:
        if not char_in_class(char, self.name):
            return False
        if char in self.excluded_texts:
            return False
        return not any(char_in_class(char, other) for other in self.excluded_classes)


@dataclass(frozen=True)
class CallNonterminal:
    name: str


@dataclass(frozen=True)
class Epsilon:
    pass


Condition = Union[MatchTerminal, MatchClass, CallNonterminal, Epsilon]


class StackOpKind(str, Enum):
    NONE = "none"
    PUSH = "push"
    POP_EXPECT = "popExpect"


@dataclass(frozen=True)
class StackOp:
    kind: StackOpKind = StackOpKind.NONE
    marker: str = ""


NO_STACK_OP = StackOp()


@dataclass(frozen=True)
class Transition:
    source: int
    target: int
    condition: Condition
    stack_op: StackOp = NO_STACK_OP


@dataclass(frozen=True)
class Automaton:
    """Pushdown automaton for one rule."""

    owner: str
    state_count: int
    transitions: tuple[Transition, ...]
    initial_state: int = INITIAL_STATE
    final_states: frozenset[int] = frozenset({FINAL_STATE})
    outgoing: tuple[tuple[Transition, ...], ...] = field(default=(), compare=False, repr=False)

    def __post_init__(self) -> None:
        if not self.outgoing:
            buckets: list[list[Transition]] = [[] for _ in range(self.state_count)]
            for transition in self.transitions:
                buckets[transition.source].append(transition)
            object.__setattr__(self, "outgoing", tuple(tuple(bucket) for bucket in buckets))

    @property
    def markers(self) -> list[str]:
        return sorted(
            {t.stack_op.marker for t in self.transitions if t.stack_op.kind == StackOpKind.PUSH}
        )


@dataclass(frozen=True)
class LexicalAutomaton:
    kind: str
    automaton: Automaton
    skip: bool


@dataclass(frozen=True)
class AutomatonNetwork:
    """Syntax automata by rule name plus the ordered lexical automata."""

    automata: dict[str, Automaton]
    start_symbol: str
    lexical: tuple[LexicalAutomaton, ...]
    grammar: Grammar = field(compare=False, repr=False)

    def is_token_kind(self, name: str) -> bool:
        return any(entry.kind == name for entry in self.lexical)

    def lexical_automata(self) -> dict[str, Automaton]:
        return {entry.kind: entry.automaton for entry in self.lexical}


# ============================================================================
# Character classes
# ============================================================================


def char_in_class(char: str, name: str) -> bool:
    """Check membership in one of the catalog character classes."""
    if name == "any":
        return True
    if name == "letter":
        return char.isascii() and char.isalpha()
    if name == "digit":
        return char in "0123456789"
    if name == "eol":
        return char == "\n"
    if name == "whitespace":
        return char in " \t\r\n\f\v"
    raise ValueError(f"unknown character class: {name}")


# ============================================================================
# Construction
# ============================================================================


class _AutomatonBuilder:
    def __init__(self, owner: str):
        self.owner = owner
        self.state_count = 2
        self.transitions: list[Transition] = []
        self.group_count = 0

    def new_state(self) -> int:
        self.state_count += 1
        return self.state_count - 1

    def add(self, source: int, target: int, condition: Condition, stack_op: StackOp = NO_STACK_OP) -> None:
        self.transitions.append(Transition(source, target, condition, stack_op))

    def build(self, expr: RuleExpr) -> Automaton:
        self.compile(expr, INITIAL_STATE, FINAL_STATE)
        return Automaton(self.owner, self.state_count, tuple(self.transitions))

    def compile(self, expr: RuleExpr, start: int, end: int) -> None:
        if isinstance(expr, Terminal):
            self.add(start, end, MatchTerminal(expr.text))
        elif isinstance(expr, NonTerminal):
            self.add(start, end, CallNonterminal(expr.name))
        elif isinstance(expr, SpecialClass):
            self.add(start, end, MatchClass(expr.name))
        elif isinstance(expr, Exclusion):
            condition = resolve_exclusion(expr)
            if condition is not None:
                self.add(start, end, condition)
        elif isinstance(expr, Empty):
            self.add(start, end, Epsilon())
        elif isinstance(expr, Sequence):
            current = start
            for item in expr.items[:-1]:
                following = self.new_state()
                self.compile(item, current, following)
                current = following
            self.compile(expr.items[-1], current, end)
        elif isinstance(expr, Alternation):
            for option in expr.options:
                self.compile(option, start, end)
        elif isinstance(expr, OptionalPart):
            self.compile(expr.inner, start, end)
            self.add(start, end, Epsilon())
        elif isinstance(expr, Repetition):
            current = start
            for _ in range(expr.min_count):
                following = self.new_state()
                self.compile(expr.inner, current, following)
                current = following
            loop_start, loop_end = self.new_state(), self.new_state()
            self.add(current, loop_start, Epsilon())
            self.compile(expr.inner, loop_start, loop_end)
            self.add(loop_end, loop_start, Epsilon())
            self.add(loop_start, end, Epsilon())
        elif isinstance(expr, Group):
            self.group_count += 1
            marker = f"G{self.group_count}"
            inner_start, inner_end = self.new_state(), self.new_state()
            self.add(start, inner_start, Epsilon(), StackOp(StackOpKind.PUSH, marker))
            self.compile(expr.inner, inner_start, inner_end)
            self.add(inner_end, end, Epsilon(), StackOp(StackOpKind.POP_EXPECT, marker))
        else:
            raise TypeError(f"unknown rule expression: {expr!r}")


def resolve_exclusion(expr: Exclusion) -> Optional[Condition]:
    """Turn an exclusion into a single condition, or None when nothing remains."""
    subtrahend = expr.subtrahend
    base: Optional[Condition]
    if isinstance(expr.base, Exclusion):
        base = resolve_exclusion(expr.base)
    elif isinstance(expr.base, Terminal):
        base = MatchTerminal(expr.base.text)
    elif isinstance(expr.base, SpecialClass):
        base = MatchClass(expr.base.name)
    else:
        raise TypeError(f"unsupported exclusion base: {expr.base!r}")

    if base is None:
        return None
    if isinstance(base, MatchTerminal):
        text = base.text
        if isinstance(subtrahend, Terminal) and subtrahend.text == text:
            return None
        if isinstance(subtrahend, SpecialClass) and len(text) == 1 and char_in_class(text, subtrahend.name):
            return None
        return base
    assert isinstance(base, MatchClass)
    if isinstance(subtrahend, Terminal):
        if len(subtrahend.text) != 1:
            return base
        return MatchClass(base.name, base.excluded_texts + (subtrahend.text,), base.excluded_classes)
    return MatchClass(base.name, base.excluded_texts, base.excluded_classes + (subtrahend.name,))


def build_automaton(owner: str, expr: RuleExpr) -> Automaton:
    return _AutomatonBuilder(owner).build(expr)


def build_network(grammar: Grammar) -> AutomatonNetwork:
    """Build one automaton per rule.

    Raises:
        GrammarRejectedError: validate_grammar reports errors
    """
    errors = errors_only(validate_grammar(grammar))
    if errors:
        raise GrammarRejectedError(errors)

    automata = {name: build_automaton(name, expr) for name, expr in grammar.rules.items()}
    lexical = tuple(
        LexicalAutomaton(rule.name, build_automaton(rule.name, rule.expr), rule.skip)
        for rule in grammar.lexical_rules
    )
    logger.debug(
        f"Built network for {grammar.origin}: {len(automata)} syntax automata, "
        f"{len(lexical)} lexical automata"
    )
    return AutomatonNetwork(automata, grammar.start_symbol, lexical, grammar)
