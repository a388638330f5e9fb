"""Static checks that a grammar can be turned into a terminating recognizer."""

import logging

from comodi.core.diagnostics import Diagnostic
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
    iter_subexpressions,
    referenced_names,
)

logger = logging.getLogger("comodi.grammar")

UNDEFINED_NONTERMINAL = "UndefinedNonterminal"
UNREACHABLE_RULE = "UnreachableRule"
LEFT_RECURSION = "LeftRecursion"
NULLABLE_REPETITION = "NullableRepetition"
CROSS_LEVEL_REFERENCE = "CrossLevelReference"


def nullable_rules(grammar: Grammar) -> set[str]:
    """Names of all rules (lexical and syntax) that can derive the empty string."""
    rules = grammar.all_rules()
    nullable: set[str] = set()
    changed = True
    while changed:
        changed = False
        for name, expr in rules.items():
            if name not in nullable and is_nullable(expr, nullable):
                nullable.add(name)
                changed = True
    return nullable


def is_nullable(expr: RuleExpr, nullable: set[str]) -> bool:
    """Check whether an expression derives the empty string, given nullable rule names."""
    if isinstance(expr, (Terminal, SpecialClass, Exclusion)):
        return False
    if isinstance(expr, NonTerminal):
        return expr.name in nullable
    if isinstance(expr, Sequence):
        return all(is_nullable(item, nullable) for item in expr.items)
    if isinstance(expr, Alternation):
        return any(is_nullable(option, nullable) for option in expr.options)
    if isinstance(expr, (OptionalPart, Empty)):
        return True
    if isinstance(expr, Repetition):
        return expr.min_count == 0 or is_nullable(expr.inner, nullable)
    if isinstance(expr, Group):
        return is_nullable(expr.inner, nullable)
    raise TypeError(f"unknown rule expression: {expr!r}")


def leftmost_references(expr: RuleExpr, nullable: set[str]) -> set[str]:
    """Nonterminals that can be entered before any input is consumed."""
    if isinstance(expr, NonTerminal):
        return {expr.name}
    if isinstance(expr, Sequence):
        found: set[str] = set()
        for item in expr.items:
            found |= leftmost_references(item, nullable)
            if not is_nullable(item, nullable):
                break
        return found
    if isinstance(expr, Alternation):
        found = set()
        for option in expr.options:
            found |= leftmost_references(option, nullable)
        return found
    if isinstance(expr, (OptionalPart, Repetition, Group)):
        return leftmost_references(expr.inner, nullable)
    return set()


def left_recursive_rules(grammar: Grammar) -> list[str]:
    """Rules lying on a cycle of the nullable-prefix call graph, in rule order."""
    rules = grammar.all_rules()
    nullable = nullable_rules(grammar)
    edges = {
        name: {ref for ref in leftmost_references(expr, nullable) if ref in rules}
        for name, expr in rules.items()
    }

    recursive = []
    for name in rules:
        # Depth-first search for a path back to ``name``
        stack = list(edges[name])
        seen: set[str] = set()
        while stack:
            current = stack.pop()
            if current == name:
                recursive.append(name)
                break
            if current in seen:
                continue
            seen.add(current)
            stack.extend(edges[current])
    return recursive


def validate_grammar(grammar: Grammar) -> list[Diagnostic]:
    """Check a grammar before automata construction.

    Errors: UndefinedNonterminal, LeftRecursion, CrossLevelReference.
    Warnings: UnreachableRule, NullableRepetition.

    Returns:
        Diagnostics; no errors means the automata builder accepts the grammar
    """
    diagnostics: list[Diagnostic] = []
    rules = grammar.all_rules()

    for name, expr in rules.items():
        for ref in referenced_names(expr):
            if not grammar.defines(ref):
                diagnostics.append(
                    Diagnostic.error(
                        UNDEFINED_NONTERMINAL,
                        f"rule '{name}' references undefined nonterminal '{ref}'",
                        ref,
                    )
                )

    for rule in grammar.lexical_rules:
        for ref in referenced_names(rule.expr):
            if ref in grammar.rules:
                diagnostics.append(
                    Diagnostic.error(
                        CROSS_LEVEL_REFERENCE,
                        f"lexical rule '{rule.name}' references syntax rule '{ref}'",
                        rule.name,
                    )
                )

    for name in left_recursive_rules(grammar):
        diagnostics.append(
            Diagnostic.error(LEFT_RECURSION, f"rule '{name}' is left-recursive", name)
        )

    reachable = _reachable_syntax_rules(grammar)
    for name in grammar.rules:
        if name not in reachable:
            diagnostics.append(
                Diagnostic.warning(
                    UNREACHABLE_RULE,
                    f"rule '{name}' is not reachable from '{grammar.start_symbol}'",
                    name,
                )
            )

    nullable = nullable_rules(grammar)
    for name, expr in rules.items():
        for sub in iter_subexpressions(expr):
            if isinstance(sub, Repetition) and is_nullable(sub.inner, nullable):
                diagnostics.append(
                    Diagnostic.warning(
                        NULLABLE_REPETITION,
                        f"rule '{name}' repeats an expression that can match nothing",
                        name,
                    )
                )
                break

    logger.debug(f"Validated {grammar.origin}: {len(diagnostics)} diagnostics")
    return diagnostics


def _reachable_syntax_rules(grammar: Grammar) -> set[str]:
    reachable = {grammar.start_symbol}
    pending = [grammar.start_symbol]
    while pending:
        name = pending.pop()
        for ref in referenced_names(grammar.rules[name]):
            if ref in grammar.rules and ref not in reachable:
                reachable.add(ref)
                pending.append(ref)
    return reachable
