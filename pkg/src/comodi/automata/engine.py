"""Ordered depth-first simulation shared by the lexer and the recognizer.

A run of automaton ``A`` from input position ``p`` explores configurations
``(state, position, marker stack)`` depth first, trying transitions in
declaration order, and returns every reachable end position together with
the first tree found for it. Call transitions start nested runs; with
memoization on, each ``(A, p)`` is explored at most once per engine.
"""

from dataclasses import dataclass
from typing import Iterator, Optional

from comodi.automata.network import (
    Automaton,
    CallNonterminal,
    Condition,
    Epsilon,
    MatchClass,
    MatchTerminal,
    StackOpKind,
    Transition,
)
from comodi.core.errors import FuelExhaustedError
from comodi.utils.constants import END_OF_INPUT


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    column: int
    offset: int = 0

    @property
    def is_eoi(self) -> bool:
        return self.kind == END_OF_INPUT

    @property
    def end_offset(self) -> int:
        return self.offset + len(self.text)


@dataclass(frozen=True)
class ParseTree:
    """Parse tree node; ``span`` is a half-open range of token indices."""

    label: str
    children: tuple["ParseTree", ...] = ()
    span: tuple[int, int] = (0, 0)
    token: Optional[Token] = None

    @property
    def is_leaf(self) -> bool:
        return self.token is not None

    def depth(self) -> int:
        """Nesting depth counted in nonterminal nodes."""
        if self.is_leaf:
            return 0
        return 1 + max((child.depth() for child in self.children), default=0)

    def leaves(self) -> Iterator[Token]:
        if self.token is not None:
            yield self.token
        for child in self.children:
            yield from child.leaves()

    def walk(self) -> Iterator["ParseTree"]:
        """Preorder traversal."""
        yield self
        for child in self.children:
            yield from child.walk()

    def find_all(self, label: str) -> list["ParseTree"]:
        return [node for node in self.walk() if node.label == label]

    def first(self, label: str) -> Optional["ParseTree"]:
        for node in self.walk():
            if node.label == label:
                return node
        return None


# Children are accumulated as a linked list of (node, rest) pairs
_Children = Optional[tuple[ParseTree, "_Children"]]
Result = tuple[int, Optional[ParseTree]]


class AutomataEngine:
    """Base engine; subclasses decide how conditions consume input."""

    def __init__(
        self,
        automata: dict[str, Automaton],
        fuel: int,
        memoize: bool = True,
        build_trees: bool = True,
    ):
        self.automata = automata
        self.initial_fuel = fuel
        self.fuel = fuel
        self.memoize = memoize
        self.build_trees = build_trees
        self.memo: dict[tuple[str, int], list[Result]] = {}
        self.active: set[tuple[str, int]] = set()
        self.furthest = -1
        self.expected: set[str] = set()

    def refuel(self) -> None:
        self.fuel = self.initial_fuel

    def fail(self, position: int, expectation: str) -> None:
        """Record a failed expectation for furthest-failure reporting."""
        if position > self.furthest:
            self.furthest = position
            self.expected = {expectation}
        elif position == self.furthest:
            self.expected.add(expectation)

    def run(self, name: str, position: int) -> list[Result]:
        """All end positions of rule ``name`` from ``position``, in discovery order."""
        key = (name, position)
        if self.memoize and key in self.memo:
            return self.memo[key]
        if key in self.active:
            # Re-entry without consuming input; validated grammars never get here
            return []

        self.active.add(key)
        try:
            results = self._explore(self.automata[name], name, position)
        finally:
            self.active.discard(key)

        if self.memoize:
            self.memo[key] = results
        return results

    def _explore(self, automaton: Automaton, name: str, start: int) -> list[Result]:
        results: list[Result] = []
        seen_ends: set[int] = set()
        visited: set[tuple[int, int, tuple[str, ...]]] = set()
        agenda: list[tuple[int, int, tuple[str, ...], _Children]] = [
            (automaton.initial_state, start, (), None)
        ]

        while agenda:
            state, position, stack, children = agenda.pop()
            config = (state, position, stack)
            if config in visited:
                continue
            visited.add(config)

            self.fuel -= 1
            if self.fuel < 0:
                raise FuelExhaustedError(f"step budget of {self.initial_fuel} exhausted in rule '{name}'")

            if state in automaton.final_states:
                assert not stack, f"rule '{name}' reached a final state with markers {stack}"
                if position not in seen_ends:
                    seen_ends.add(position)
                    results.append((position, self._node(name, start, position, children)))

            successors = []
            for transition in automaton.outgoing[state]:
                new_stack = _apply_stack_op(transition, stack)
                if new_stack is None:
                    continue
                for end, child in self._step(transition.condition, position):
                    successors.append(
                        (transition.target, end, new_stack, children if child is None else (child, children))
                    )
            agenda.extend(reversed(successors))

        return results

    def _node(self, name: str, start: int, end: int, children: _Children) -> Optional[ParseTree]:
        if not self.build_trees:
            return None
        ordered: list[ParseTree] = []
        while children is not None:
            node, children = children
            ordered.append(node)
        ordered.reverse()
        return ParseTree(name, tuple(ordered), (start, end))

    def _step(self, condition: Condition, position: int) -> list[Result]:
        if isinstance(condition, Epsilon):
            return [(position, None)]
        if isinstance(condition, CallNonterminal):
            if condition.name in self.automata:
                return self.run(condition.name, position)
            return self.match_token_kind(condition.name, position)
        if isinstance(condition, MatchTerminal):
            return self.match_terminal(condition.text, position)
        if isinstance(condition, MatchClass):
            return self.match_class(condition, position)
        raise TypeError(f"unknown condition: {condition!r}")

    # Input-specific hooks

    def match_terminal(self, text: str, position: int) -> list[Result]:
        raise NotImplementedError

    def match_class(self, condition: MatchClass, position: int) -> list[Result]:
        raise NotImplementedError

    def match_token_kind(self, kind: str, position: int) -> list[Result]:
        return []


def _apply_stack_op(transition: Transition, stack: tuple[str, ...]) -> Optional[tuple[str, ...]]:
    op = transition.stack_op
    if op.kind == StackOpKind.PUSH:
        return stack + (op.marker,)
    if op.kind == StackOpKind.POP_EXPECT:
        if not stack or stack[-1] != op.marker:
            return None
        return stack[:-1]
    return stack


def describe_condition(condition: Condition) -> str:
    """Human-readable expectation for error messages."""
    if isinstance(condition, MatchTerminal):
        return f'"{condition.text}"'
    if isinstance(condition, MatchClass):
        return f"? {condition.name} ?"
    if isinstance(condition, CallNonterminal):
        return condition.name
    return "epsilon"
