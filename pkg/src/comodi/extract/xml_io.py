"""Interface model XML reader and writer."""

import xml.etree.ElementTree as ET
from typing import Union

from comodi.core.errors import InterfaceSchemaError
from comodi.core.types import PassingMode
from comodi.extract.model import (
    DirectiveInfo,
    FieldInfo,
    FunctionSig,
    InterfaceModel,
    ParamInfo,
    TypeDefInfo,
    ValueDecl,
)
from comodi.utils.xml_helpers import (
    add_text_child,
    expect_tag,
    format_bool,
    parse_bool,
    parse_xml,
    require_attr,
    to_xml_text,
)


def _span_text(span: tuple[int, int]) -> str:
    return f"{span[0]}:{span[1]}"


def _parse_span(text: str, path: str) -> tuple[int, int]:
    start, sep, end = text.partition(":")
    if not sep or not start.isdigit() or not end.isdigit():
        raise InterfaceSchemaError(path, f"span must be 'start:end', found '{text}'")
    return int(start), int(end)


def _value_element(parent: ET.Element, tag: str, decl: ValueDecl) -> None:
    attrs = {"name": decl.name, "type": decl.type_name}
    if decl.literal:
        attrs["value"] = decl.literal
    ET.SubElement(parent, tag, attrs)


def interface_to_xml(model: InterfaceModel) -> str:
    """Serialize an interface model; categories in fixed order, entries in source order."""
    root = ET.Element("interface", {"source": model.source, "language": model.language})

    functions = ET.SubElement(root, "functions")
    for sig in model.functions:
        node = ET.SubElement(
            functions,
            "function",
            {
                "name": sig.name,
                "return": sig.return_type,
                "defined": format_bool(sig.defined),
                "span": _span_text(sig.span),
            },
        )
        if sig.doc is not None:
            add_text_child(node, "doc", sig.doc)
        for param in sig.params:
            ET.SubElement(
                node,
                "param",
                {
                    "name": param.name,
                    "type": param.type_name,
                    "passing": param.passing.value,
                    "position": str(param.position),
                },
            )
        for directive in sig.directives:
            add_text_child(node, "directive", directive)

    types = ET.SubElement(root, "types")
    for type_def in model.type_defs:
        node = ET.SubElement(types, "type", {"name": type_def.name})
        for f in type_def.fields:
            ET.SubElement(node, "field", {"name": f.name, "type": f.type_name})

    constants = ET.SubElement(root, "constants")
    for decl in model.constants:
        _value_element(constants, "constant", decl)

    variables = ET.SubElement(root, "variables")
    for decl in model.variables:
        _value_element(variables, "variable", decl)

    directives = ET.SubElement(root, "directives")
    for info in model.directives:
        add_text_child(directives, "directive", info.text, line=str(info.line), column=str(info.column))

    unresolved = ET.SubElement(root, "unresolved")
    for name in model.unresolved:
        ET.SubElement(unresolved, "type", {"name": name})

    return to_xml_text(root)


def _read_function(node: ET.Element, path: str) -> FunctionSig:
    params = []
    for index, param in enumerate(node.iterfind("param")):
        param_path = f"{path}/param[{index}]"
        passing = require_attr(param, "passing", param_path, InterfaceSchemaError)
        try:
            mode = PassingMode(passing)
        except ValueError:
            raise InterfaceSchemaError(f"{param_path}@passing", f"unknown passing mode '{passing}'") from None
        position = require_attr(param, "position", param_path, InterfaceSchemaError)
        if not position.isdigit():
            raise InterfaceSchemaError(f"{param_path}@position", "position must be a non-negative integer")
        params.append(
            ParamInfo(
                name=require_attr(param, "name", param_path, InterfaceSchemaError),
                type_name=require_attr(param, "type", param_path, InterfaceSchemaError),
                passing=mode,
                position=int(position),
            )
        )

    doc = node.find("doc")
    return FunctionSig(
        name=require_attr(node, "name", path, InterfaceSchemaError),
        return_type=require_attr(node, "return", path, InterfaceSchemaError),
        params=params,
        defined=parse_bool(node.get("defined", "false"), f"{path}@defined", InterfaceSchemaError),
        doc=(doc.text or "") if doc is not None else None,
        directives=[d.text or "" for d in node.iterfind("directive")],
        span=_parse_span(node.get("span", "0:0"), f"{path}@span"),
    )


def _read_values(root: ET.Element, section: str, tag: str) -> list[ValueDecl]:
    values = []
    for index, node in enumerate(root.iterfind(f"{section}/{tag}")):
        path = f"/interface/{section}/{tag}[{index}]"
        values.append(
            ValueDecl(
                name=require_attr(node, "name", path, InterfaceSchemaError),
                type_name=require_attr(node, "type", path, InterfaceSchemaError),
                literal=node.get("value", ""),
            )
        )
    return values


def xml_to_interface(text: Union[str, bytes]) -> InterfaceModel:
    """Read an interface model document.

    Raises:
        InterfaceSchemaError: Document is malformed, with the offending element path
    """
    root = parse_xml(text, InterfaceSchemaError)
    expect_tag(root, "interface", "/interface", InterfaceSchemaError)

    functions = [
        _read_function(node, f"/interface/functions/function[{index}]")
        for index, node in enumerate(root.iterfind("functions/function"))
    ]

    type_defs = []
    for index, node in enumerate(root.iterfind("types/type")):
        path = f"/interface/types/type[{index}]"
        type_defs.append(
            TypeDefInfo(
                name=require_attr(node, "name", path, InterfaceSchemaError),
                fields=[
                    FieldInfo(
                        name=require_attr(f, "name", f"{path}/field", InterfaceSchemaError),
                        type_name=require_attr(f, "type", f"{path}/field", InterfaceSchemaError),
                    )
                    for f in node.iterfind("field")
                ],
            )
        )

    directives = []
    for index, node in enumerate(root.iterfind("directives/directive")):
        path = f"/interface/directives/directive[{index}]"
        line = require_attr(node, "line", path, InterfaceSchemaError)
        column = require_attr(node, "column", path, InterfaceSchemaError)
        if not (line.isdigit() and column.isdigit()):
            raise InterfaceSchemaError(path, "line and column must be integers")
        directives.append(DirectiveInfo(text=node.text or "", line=int(line), column=int(column)))

    return InterfaceModel(
        source=require_attr(root, "source", "/interface", InterfaceSchemaError),
        language=require_attr(root, "language", "/interface", InterfaceSchemaError),
        functions=functions,
        type_defs=type_defs,
        constants=_read_values(root, "constants", "constant"),
        variables=_read_values(root, "variables", "variable"),
        directives=directives,
        unresolved=[
            require_attr(node, "name", "/interface/unresolved/type", InterfaceSchemaError)
            for node in root.iterfind("unresolved/type")
        ],
    )
