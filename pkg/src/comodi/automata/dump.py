"""XML debug dumps of automata networks and parse trees."""

import xml.etree.ElementTree as ET

from comodi.automata.engine import ParseTree
from comodi.automata.network import (
    Automaton,
    AutomatonNetwork,
    CallNonterminal,
    MatchClass,
    MatchTerminal,
    StackOpKind,
)
from comodi.utils.xml_helpers import to_xml_text


def _automaton_element(tag: str, name: str, automaton: Automaton, **extra: str) -> ET.Element:
    element = ET.Element(
        tag,
        {
            "name": name,
            "states": str(automaton.state_count),
            "initial": str(automaton.initial_state),
            "final": " ".join(str(s) for s in sorted(automaton.final_states)),
            **extra,
        },
    )
    for t in automaton.transitions:
        attrs = {"from": str(t.source), "to": str(t.target)}
        condition = t.condition
        if isinstance(condition, MatchTerminal):
            attrs["terminal"] = condition.text
        elif isinstance(condition, MatchClass):
            attrs["class"] = condition.name
            if condition.excluded_texts:
                attrs["except"] = " ".join(condition.excluded_texts)
            if condition.excluded_classes:
                attrs["exceptClass"] = " ".join(condition.excluded_classes)
        elif isinstance(condition, CallNonterminal):
            attrs["call"] = condition.name
        else:
            attrs["epsilon"] = "true"
        if t.stack_op.kind == StackOpKind.PUSH:
            attrs["push"] = t.stack_op.marker
        elif t.stack_op.kind == StackOpKind.POP_EXPECT:
            attrs["popExpect"] = t.stack_op.marker
        ET.SubElement(element, "transition", attrs)
    return element


def network_to_xml(net: AutomatonNetwork) -> str:
    """Dump every automaton of a network, lexical ones first."""
    root = ET.Element("network", {"start": net.start_symbol, "origin": net.grammar.origin})
    lexical = ET.SubElement(root, "lexical")
    for entry in net.lexical:
        lexical.append(
            _automaton_element("automaton", entry.kind, entry.automaton, skip="true" if entry.skip else "false")
        )
    syntax = ET.SubElement(root, "syntax")
    for name, automaton in net.automata.items():
        syntax.append(_automaton_element("automaton", name, automaton))
    return to_xml_text(root)


def _tree_element(tree: ParseTree) -> ET.Element:
    if tree.token is not None:
        element = ET.Element(
            "token",
            {
                "kind": tree.token.kind,
                "line": str(tree.token.line),
                "column": str(tree.token.column),
            },
        )
        element.text = tree.token.text
        return element
    element = ET.Element("node", {"label": tree.label, "span": f"{tree.span[0]}:{tree.span[1]}"})
    for child in tree.children:
        element.append(_tree_element(child))
    return element


def tree_to_xml(tree: ParseTree) -> str:
    """Dump a parse tree with nonterminal nodes and token leaves."""
    return to_xml_text(_tree_element(tree))
