"""Mock implementations: port bodies written as small arithmetic expressions.

Expressions are parsed with the toolchain's own automata engine and
compiled to postfix code for the stack machine in ``runtime``.
"""

import logging
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from typing import Mapping, Sequence, Union

from comodi.automata import AutomatonNetwork, ParseTree, build_network, recognize, tokenize
from comodi.cdl.model import ComponentDescriptor
from comodi.core.errors import ComodiError, MockDefinitionError, SchemaError
from comodi.grammar import parse_ebnf
from comodi.utils.xml_helpers import parse_xml, require_attr

logger = logging.getLogger("comodi.wiring")

# Opcodes
PUSH = "push"
LOAD = "load"
NEG = "neg"
CALL = "call"
BINARY_OPS = {"+": "add", "-": "sub", "*": "mul", "/": "div"}


@dataclass(frozen=True)
class Instr:
    op: str
    arg: Union[float, int, str, None] = None
    argc: int = 0


@dataclass(frozen=True)
class MockProgram:
    instance: str
    port: str
    source: str
    code: tuple[Instr, ...]


# instance id -> provides port -> expression
MockImplementations = dict[str, dict[str, str]]


@lru_cache(maxsize=1)
def mock_network() -> AutomatonNetwork:
    text = resources.files("comodi.wiring").joinpath("data", "mock_expr.ebnf").read_text(encoding="utf-8")
    return build_network(parse_ebnf(text, "mock_expr.ebnf"))


def load_mocks(text: Union[str, bytes]) -> MockImplementations:
    """Read ``<mocks><mock instance="..." port="...">expr</mock></mocks>``.

    Raises:
        MockDefinitionError: Malformed document or a port given twice
    """
    try:
        root = parse_xml(text)
        if root.tag != "mocks":
            raise MockDefinitionError(f"expected <mocks>, found <{root.tag}>")
        mocks: MockImplementations = {}
        for index, node in enumerate(root):
            path = f"/mocks/{node.tag}[{index}]"
            if node.tag != "mock":
                raise MockDefinitionError(f"{path}: unknown element")
            instance = require_attr(node, "instance", path)
            port = require_attr(node, "port", path)
            ports = mocks.setdefault(instance, {})
            if port in ports:
                raise MockDefinitionError(f"{path}: {instance}.{port} is defined twice")
            ports[port] = (node.text or "").strip()
        return mocks
    except SchemaError as e:
        raise MockDefinitionError(str(e)) from e


class _Compiler:
    def __init__(self, where: str, params: Sequence[str], uses: set[str]):
        self.where = where
        self.params = {name: index for index, name in enumerate(params)}
        self.uses = uses
        self.code: list[Instr] = []

    def leaf_text(self, node: ParseTree) -> str:
        return next(node.leaves()).text

    def emit(self, node: ParseTree) -> None:
        label = node.label
        if label in ("expression", "term"):
            self.emit(node.children[0])
            for operation in node.children[1:]:
                operator, operand = operation.children
                self.emit(operand)
                self.code.append(Instr(BINARY_OPS[self.leaf_text(operator)]))
        elif label == "factor":
            self.emit(node.children[0])
        elif label == "negation":
            self.emit(node.children[1])
            self.code.append(Instr(NEG))
        elif label == "primary":
            inner = [child for child in node.children if not child.is_leaf]
            self.emit(inner[0])
        elif label == "call":
            port = self.leaf_text(next(c for c in node.children if c.label == "port_ref"))
            if port not in self.uses:
                raise MockDefinitionError(f"{self.where}: '{port}' is not a uses port")
            args = [child for child in node.children if child.label == "expression"]
            for arg in args:
                self.emit(arg)
            self.code.append(Instr(CALL, port, len(args)))
        elif label == "number_literal":
            self.code.append(Instr(PUSH, float(self.leaf_text(node))))
        elif label == "parameter":
            name = self.leaf_text(node)
            if name not in self.params:
                raise MockDefinitionError(f"{self.where}: '{name}' is not a parameter")
            self.code.append(Instr(LOAD, self.params[name]))
        else:
            raise MockDefinitionError(f"{self.where}: unexpected '{label}'")


def compile_mock(expression: str, where: str, params: Sequence[str], uses: set[str]) -> tuple[Instr, ...]:
    """Compile an expression to postfix code.

    Raises:
        MockDefinitionError: Syntax error, or a name that is neither a
            parameter nor a uses port
    """
    net = mock_network()
    try:
        tree = recognize(net, tokenize(net, expression))
    except ComodiError as e:
        raise MockDefinitionError(f"{where}: {e}") from e
    compiler = _Compiler(where, params, uses)
    compiler.emit(tree)
    return tuple(compiler.code)


def compile_mocks(
    mocks: MockImplementations,
    instances: Mapping[str, ComponentDescriptor],
) -> dict[tuple[str, str], MockProgram]:
    """Compile the mocks of every instance, keyed by (instance, provides port).

    Raises:
        MockDefinitionError: A mock names an unknown instance or port, or does not compile
    """
    programs = {}
    for instance, ports in sorted(mocks.items()):
        descriptor = instances.get(instance)
        if descriptor is None:
            raise MockDefinitionError(f"mock for unknown instance '{instance}'")
        uses = {port.local_name for port in descriptor.uses}
        for port_name, expression in sorted(ports.items()):
            port = descriptor.provided(port_name)
            if port is None:
                raise MockDefinitionError(f"{instance}.{port_name} is not a provides port")
            where = f"{instance}.{port.local_name}"
            code = compile_mock(expression, where, [p.name for p in port.params], uses)
            programs[(instance, port.local_name)] = MockProgram(instance, port.local_name, expression, code)
    logger.debug(f"Compiled {len(programs)} mock programs")
    return programs
