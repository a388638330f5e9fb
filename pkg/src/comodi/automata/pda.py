"""Flattening of an automata network into one nondeterministic PDA.

Automaton states are renumbered into one global state space. A call
transition pushes a return marker and jumps to the callee's initial state;
each callee final state pops the return marker and continues at the
caller's target state. Group markers are qualified by their owner rule.
Calls to token kinds become plain read transitions.
"""

import logging
from dataclasses import dataclass, field
from typing import Optional

from comodi.automata.engine import Token
from comodi.automata.network import (
    AutomatonNetwork,
    CallNonterminal,
    Epsilon,
    MatchClass,
    MatchTerminal,
    StackOpKind,
)
from comodi.core.errors import FuelExhaustedError
from comodi.utils.constants import DEFAULT_FUEL

logger = logging.getLogger("comodi.automata")

BOTTOM_MARKER = "Z"


@dataclass(frozen=True)
class Read:
    """Input condition of a PDA transition: a terminal text, token kind or class."""

    kind: str  # "text", "token" or "class"
    value: str
    excluded_texts: tuple[str, ...] = ()
    excluded_classes: tuple[str, ...] = ()


@dataclass(frozen=True)
class PdaTransition:
    source: int
    target: int
    read: Optional[Read] = None
    pop: Optional[str] = None
    push: Optional[str] = None


@dataclass(frozen=True)
class Pda:
    """Single pushdown automaton; accepts in ``accept_state`` with empty stack at end of input."""

    state_count: int
    initial_state: int
    accept_state: int
    stack_alphabet: tuple[str, ...]
    transitions: tuple[PdaTransition, ...]
    state_names: tuple[str, ...] = field(default=(), compare=False, repr=False)

    def outgoing(self) -> list[list[PdaTransition]]:
        buckets: list[list[PdaTransition]] = [[] for _ in range(self.state_count)]
        for transition in self.transitions:
            buckets[transition.source].append(transition)
        return buckets


def network_to_single_pda(net: AutomatonNetwork) -> Pda:
    """Flatten the syntax automata of a network into one PDA."""
    offsets: dict[str, int] = {}
    names: list[str] = []
    total = 0
    for rule, automaton in net.automata.items():
        offsets[rule] = total
        names.extend(f"{rule}.{state}" for state in range(automaton.state_count))
        total += automaton.state_count

    accept_state = total
    names.append("accept")

    transitions: list[PdaTransition] = []
    alphabet: dict[str, None] = {BOTTOM_MARKER: None}
    returns_by_callee: dict[str, list[tuple[str, int]]] = {}

    for rule, automaton in net.automata.items():
        base = offsets[rule]
        for t in automaton.transitions:
            source, target = base + t.source, base + t.target
            condition = t.condition
            if isinstance(condition, CallNonterminal) and condition.name in net.automata:
                marker = f"R{target}"
                alphabet.setdefault(marker, None)
                callee = net.automata[condition.name]
                transitions.append(
                    PdaTransition(source, offsets[condition.name] + callee.initial_state, push=marker)
                )
                returns_by_callee.setdefault(condition.name, []).append((marker, target))
                continue

            read: Optional[Read] = None
            if isinstance(condition, MatchTerminal):
                read = Read("text", condition.text)
            elif isinstance(condition, MatchClass):
                read = Read("class", condition.name, condition.excluded_texts, condition.excluded_classes)
            elif isinstance(condition, CallNonterminal):
                read = Read("token", condition.name)
            else:
                assert isinstance(condition, Epsilon)

            push = pop = None
            if t.stack_op.kind == StackOpKind.PUSH:
                push = f"{rule}#{t.stack_op.marker}"
                alphabet.setdefault(push, None)
            elif t.stack_op.kind == StackOpKind.POP_EXPECT:
                pop = f"{rule}#{t.stack_op.marker}"
            transitions.append(PdaTransition(source, target, read, pop, push))

    for callee, returns in returns_by_callee.items():
        automaton = net.automata[callee]
        for final in sorted(automaton.final_states):
            for marker, target in returns:
                transitions.append(PdaTransition(offsets[callee] + final, target, pop=marker))

    start = net.automata[net.start_symbol]
    for final in sorted(start.final_states):
        transitions.append(
            PdaTransition(offsets[net.start_symbol] + final, accept_state, pop=BOTTOM_MARKER)
        )

    pda = Pda(
        state_count=total + 1,
        initial_state=offsets[net.start_symbol] + start.initial_state,
        accept_state=accept_state,
        stack_alphabet=tuple(alphabet),
        transitions=tuple(transitions),
        state_names=tuple(names),
    )
    logger.debug(f"Flattened network into a PDA with {pda.state_count} states")
    return pda


def _reads(read: Read, token: Token) -> bool:
    if token.is_eoi:
        return False
    if read.kind == "text":
        return token.text == read.value
    if read.kind == "token":
        return token.kind == read.value
    condition = MatchClass(read.value, read.excluded_texts, read.excluded_classes)
    return len(token.text) == 1 and condition.accepts(token.text)


def simulate_pda(pda: Pda, tokens: list[Token], fuel: int = DEFAULT_FUEL) -> bool:
    """Decide acceptance by exhaustive search over PDA configurations.

    Raises:
        FuelExhaustedError: Step budget exhausted
    """
    outgoing = pda.outgoing()
    last = len(tokens) - 1
    visited: set[tuple[int, int, tuple[str, ...]]] = set()
    agenda = [(pda.initial_state, 0, (BOTTOM_MARKER,))]

    while agenda:
        config = agenda.pop()
        if config in visited:
            continue
        visited.add(config)
        fuel -= 1
        if fuel < 0:
            raise FuelExhaustedError("PDA simulation step budget exhausted")

        state, position, stack = config
        if state == pda.accept_state and position == last and not stack:
            return True

        for t in outgoing[state]:
            next_position = position
            if t.read is not None:
                if not _reads(t.read, tokens[position]):
                    continue
                next_position += 1
            next_stack = stack
            if t.pop is not None:
                if not next_stack or next_stack[-1] != t.pop:
                    continue
                next_stack = next_stack[:-1]
            if t.push is not None:
                next_stack = next_stack + (t.push,)
            agenda.append((t.target, next_position, next_stack))

    return False
