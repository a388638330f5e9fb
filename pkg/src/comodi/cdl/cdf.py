"""CDF reader and writer.

Unknown child elements of ``<component>`` and of ``<port>`` are extensions:
they are kept verbatim and written back at the same position. Unknown
attributes are schema errors.
"""

import xml.etree.ElementTree as ET
from typing import Callable, Union

from comodi.cdl.model import ComponentDescriptor, Extension, ParamSpec, PortKind, PortSpec
from comodi.core.errors import CdfSchemaError
from comodi.core.types import PassingMode
from comodi.extract.model import FieldInfo, TypeDefInfo
from comodi.utils.constants import CDL_VERSION
from comodi.utils.xml_helpers import (
    ElementPath,
    add_text_child,
    check_attrs,
    element_spans,
    expect_tag,
    format_bool,
    parse_bool,
    parse_xml,
    require_attr,
    to_xml_text,
)

_COMPONENT_ATTRS = {"cdl-version", "name", "version", "language", "author", "license", "open-source"}
_COMPONENT_CHILDREN = {"documentation", "representation", "platforms", "types", "provides", "uses"}
_PORT_ATTRS = {"name", "global", "return", "remote"}
_PARAM_ATTRS = {"name", "type", "passing", "default"}
_TYPE_ATTRS = {"name"}
_FIELD_ATTRS = {"name", "type"}
_HINT_ATTRS = {"key", "value"}
_PLATFORM_ATTRS = {"name"}

_PLACEHOLDER = "comodi-extension-{}"


# ============================================================================
# Writing
# ============================================================================


class _Placeholders:
    """Extension slots filled in after serialization."""

    def __init__(self):
        self.raw: list[str] = []

    def insert(self, parent: ET.Element, extensions: list[Extension]) -> None:
        for extension in sorted(extensions, key=lambda e: e.position):
            marker = ET.Element(_PLACEHOLDER.format(len(self.raw)))
            parent.insert(min(extension.position, len(parent)), marker)
            self.raw.append(extension.xml)

    def fill(self, text: str) -> str:
        for index, raw in enumerate(self.raw):
            text = text.replace(f"<{_PLACEHOLDER.format(index)} />", raw, 1)
        return text


def _port_element(port: PortSpec, placeholders: _Placeholders) -> ET.Element:
    node = ET.Element(
        "port",
        {
            "name": port.local_name,
            "global": port.global_name,
            "return": port.return_type,
            "remote": format_bool(port.remote),
        },
    )
    if port.doc is not None:
        add_text_child(node, "doc", port.doc)
    for param in port.params:
        attrs = {"name": param.name, "type": param.type_name, "passing": param.passing.value}
        if param.default is not None:
            attrs["default"] = param.default
        param_node = ET.SubElement(node, "param", attrs)
        if param.doc is not None:
            add_text_child(param_node, "doc", param.doc)
    placeholders.insert(node, port.extensions)
    return node


def write_cdf(descriptor: ComponentDescriptor) -> str:
    """Serialize a descriptor; equal descriptors give identical bytes."""
    placeholders = _Placeholders()
    root = ET.Element(
        "component",
        {
            "cdl-version": descriptor.cdl_version,
            "name": descriptor.name,
            "version": descriptor.version,
            "language": descriptor.language,
            "author": descriptor.author,
            "license": descriptor.license,
            "open-source": format_bool(descriptor.open_source),
        },
    )
    if descriptor.documentation:
        add_text_child(root, "documentation", descriptor.documentation)
    if descriptor.representation:
        representation = ET.SubElement(root, "representation")
        for key in sorted(descriptor.representation):
            ET.SubElement(representation, "hint", {"key": key, "value": descriptor.representation[key]})
    if descriptor.platform_targets:
        platforms = ET.SubElement(root, "platforms")
        for platform in descriptor.platform_targets:
            ET.SubElement(platforms, "platform", {"name": platform})
    if descriptor.type_defs:
        types = ET.SubElement(root, "types")
        for type_def in descriptor.type_defs:
            type_node = ET.SubElement(types, "type", {"name": type_def.name})
            for f in type_def.fields:
                ET.SubElement(type_node, "field", {"name": f.name, "type": f.type_name})

    for kind, ports in ((PortKind.PROVIDES, descriptor.provides), (PortKind.USES, descriptor.uses)):
        section = ET.SubElement(root, kind.value)
        for port in ports:
            section.append(_port_element(port, placeholders))

    placeholders.insert(root, descriptor.extensions)
    return placeholders.fill(to_xml_text(root))


# ============================================================================
# Reading
# ============================================================================


class _Source:
    """Original document bytes, for copying extension elements unchanged."""

    def __init__(self, text: Union[str, bytes]):
        self.data = text.encode("utf-8") if isinstance(text, str) else text
        self.spans = element_spans(self.data)

    def extension(self, path: ElementPath) -> Extension:
        begin, end = self.spans[path]
        return Extension(position=path[-1], xml=self.data[begin:end].decode("utf-8"))


def _each(
    parent: ET.Element, tag: str, path: str, allowed: set[str]
) -> list[tuple[int, ET.Element, str]]:
    """Children of a list container, all of which must carry ``tag`` and only ``allowed`` attributes."""
    check_attrs(parent, set(), path, CdfSchemaError)
    found = []
    for index, child in enumerate(parent):
        child_path = f"{path}/{child.tag}[{index}]"
        expect_tag(child, tag, child_path, CdfSchemaError)
        check_attrs(child, allowed, child_path, CdfSchemaError)
        found.append((index, child, child_path))
    return found


def _read_param(node: ET.Element, path: str) -> ParamSpec:
    check_attrs(node, _PARAM_ATTRS, path, CdfSchemaError)
    passing = node.get("passing", PassingMode.BY_VALUE.value)
    try:
        mode = PassingMode(passing)
    except ValueError:
        raise CdfSchemaError(f"{path}@passing", f"unknown passing mode '{passing}'") from None
    doc = node.find("doc")
    return ParamSpec(
        name=require_attr(node, "name", path, CdfSchemaError),
        type_name=require_attr(node, "type", path, CdfSchemaError),
        passing=mode,
        default=node.get("default"),
        doc=(doc.text or "") if doc is not None else None,
    )


def _read_port(node: ET.Element, kind: PortKind, path: str, source: _Source, where: ElementPath) -> PortSpec:
    params, extensions = [], []
    doc = None
    for index, child in enumerate(node):
        if child.tag == "param":
            params.append(_read_param(child, f"{path}/param[{len(params)}]"))
        elif child.tag == "doc":
            doc = child.text or ""
        else:
            extensions.append(source.extension(where + (index,)))
    return PortSpec(
        local_name=require_attr(node, "name", path, CdfSchemaError),
        global_name=require_attr(node, "global", path, CdfSchemaError),
        kind=kind,
        return_type=node.get("return", "void"),
        params=params,
        doc=doc,
        remote=parse_bool(node.get("remote", "false"), f"{path}@remote", CdfSchemaError),
        extensions=extensions,
    )


def _read_types(node: ET.Element, path: str) -> list[TypeDefInfo]:
    type_defs = []
    for _, type_node, type_path in _each(node, "type", path, _TYPE_ATTRS):
        fields = [
            FieldInfo(
                name=require_attr(f, "name", f_path, CdfSchemaError),
                type_name=require_attr(f, "type", f_path, CdfSchemaError),
            )
            for _, f, f_path in _each(type_node, "field", type_path, _FIELD_ATTRS)
        ]
        type_defs.append(TypeDefInfo(name=require_attr(type_node, "name", type_path, CdfSchemaError), fields=fields))
    return type_defs


def read_cdf(text: Union[str, bytes]) -> ComponentDescriptor:
    """Read a CDF document.

    Raises:
        CdfSchemaError: Schema violation, with the path of the offending element or attribute
    """
    root = parse_xml(text, CdfSchemaError)
    expect_tag(root, "component", "/component", CdfSchemaError)
    check_attrs(root, _COMPONENT_ATTRS, "/component", CdfSchemaError)
    source = _Source(text)

    version = require_attr(root, "cdl-version", "/component", CdfSchemaError)
    if version != CDL_VERSION:
        raise CdfSchemaError("/component@cdl-version", f"unsupported CDL version '{version}'")

    descriptor = ComponentDescriptor(
        name=require_attr(root, "name", "/component", CdfSchemaError),
        version=require_attr(root, "version", "/component", CdfSchemaError),
        language=require_attr(root, "language", "/component", CdfSchemaError),
        author=root.get("author", ""),
        license=root.get("license", ""),
        open_source=parse_bool(root.get("open-source", "false"), "/component@open-source", CdfSchemaError),
        cdl_version=version,
    )

    def read_ports(node: ET.Element, path: str, where: ElementPath, kind: PortKind) -> list[PortSpec]:
        return [
            _read_port(p, kind, p_path, source, where + (index,))
            for index, p, p_path in _each(node, "port", path, _PORT_ATTRS)
        ]

    readers: dict[str, Callable[[ET.Element, str, ElementPath], None]] = {
        "documentation": lambda node, path, where: setattr(descriptor, "documentation", (node.text or "").strip()),
        "representation": lambda node, path, where: descriptor.representation.update(
            {
                require_attr(hint, "key", hint_path, CdfSchemaError): require_attr(
                    hint, "value", hint_path, CdfSchemaError
                )
                for _, hint, hint_path in _each(node, "hint", path, _HINT_ATTRS)
            }
        ),
        "platforms": lambda node, path, where: descriptor.platform_targets.extend(
            require_attr(p, "name", p_path, CdfSchemaError)
            for _, p, p_path in _each(node, "platform", path, _PLATFORM_ATTRS)
        ),
        "types": lambda node, path, where: descriptor.type_defs.extend(_read_types(node, path)),
        "provides": lambda node, path, where: descriptor.provides.extend(
            read_ports(node, path, where, PortKind.PROVIDES)
        ),
        "uses": lambda node, path, where: descriptor.uses.extend(read_ports(node, path, where, PortKind.USES)),
    }

    for index, child in enumerate(root):
        if child.tag in _COMPONENT_CHILDREN:
            if child.tag == "documentation":
                check_attrs(child, set(), "/component/documentation", CdfSchemaError)
            readers[child.tag](child, f"/component/{child.tag}", (index,))
        else:
            descriptor.extensions.append(source.extension((index,)))
    return descriptor
