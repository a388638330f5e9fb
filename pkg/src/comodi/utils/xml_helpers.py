"""Helpers shared by the XML readers and writers."""

import xml.etree.ElementTree as ET
from typing import Optional, Type, Union
from xml.parsers import expat

from comodi.core.errors import SchemaError


def to_xml_text(root: ET.Element) -> str:
    """Serialize an element tree deterministically.

    Two-space indentation, double-quoted attributes in insertion order, an
    XML declaration and a trailing newline.
    """
    ET.indent(root, space="  ")
    body = ET.tostring(root, encoding="unicode", short_empty_elements=True)
    return '<?xml version="1.0" encoding="UTF-8"?>\n' + body + "\n"


def parse_xml(
    text: Union[str, bytes],
    error_cls: Type[SchemaError] = SchemaError,
) -> ET.Element:
    """Parse XML text, converting syntax errors to the given schema error."""
    try:
        return ET.fromstring(text)
    except ET.ParseError as e:
        raise error_cls("/", f"not well-formed XML: {e}") from e


def expect_tag(
    element: ET.Element,
    tag: str,
    path: str,
    error_cls: Type[SchemaError] = SchemaError,
) -> None:
    if element.tag != tag:
        raise error_cls(path, f"expected <{tag}>, found <{element.tag}>")


def require_attr(
    element: ET.Element,
    name: str,
    path: str,
    error_cls: Type[SchemaError] = SchemaError,
) -> str:
    """Get a mandatory attribute.

    Raises:
        error_cls: attribute is missing, reported as ``path@name``
    """
    value = element.get(name)
    if value is None:
        raise error_cls(f"{path}@{name}", "missing required attribute")
    return value


def check_attrs(
    element: ET.Element,
    allowed: set[str],
    path: str,
    error_cls: Type[SchemaError] = SchemaError,
) -> None:
    """Reject attributes outside the allowed set."""
    for name in sorted(element.attrib):
        if name not in allowed:
            raise error_cls(f"{path}@{name}", "unknown attribute")


def parse_bool(value: str, path: str, error_cls: Type[SchemaError] = SchemaError) -> bool:
    if value in ("true", "1"):
        return True
    if value in ("false", "0"):
        return False
    raise error_cls(path, f"expected true or false, found '{value}'")


def format_bool(value: bool) -> str:
    return "true" if value else "false"


def add_text_child(parent: ET.Element, tag: str, text: str, **attrs: str) -> ET.Element:
    child = ET.SubElement(parent, tag, attrs)
    child.text = text
    return child


ElementPath = tuple[int, ...]


def _start_tag_end(data: bytes, begin: int) -> int:
    """Offset just past the ``>`` closing the tag that starts at ``begin``."""
    quote = 0
    for offset in range(begin, len(data)):
        byte = data[offset]
        if quote:
            if byte == quote:
                quote = 0
        elif byte in b"\"'":
            quote = byte
        elif byte == ord(">"):
            return offset + 1
    raise ValueError(f"unterminated tag at byte {begin}")


def element_spans(data: bytes) -> dict[ElementPath, tuple[int, int]]:
    """Byte range of every element in a well-formed document.

    Elements are keyed by child indices from the root: the root is ``()``
    and ``(2, 0)`` is the first child element of the root's third child.
    Comments and text do not count as children.
    """
    spans: dict[ElementPath, tuple[int, int]] = {}
    open_elements: list[tuple[ElementPath, int]] = []
    child_counts: list[int] = []
    parser = expat.ParserCreate()

    def start(name: str, attrs: dict) -> None:
        path: ElementPath = ()
        if open_elements:
            path = open_elements[-1][0] + (child_counts[-1],)
            child_counts[-1] += 1
        begin = parser.CurrentByteIndex
        tag_end = _start_tag_end(data, begin)
        if data[tag_end - 2 : tag_end] == b"/>":
            spans[path] = (begin, tag_end)
        open_elements.append((path, begin))
        child_counts.append(0)

    def end(name: str) -> None:
        path, begin = open_elements.pop()
        child_counts.pop()
        if path not in spans:
            spans[path] = (begin, data.index(b">", parser.CurrentByteIndex) + 1)

    parser.StartElementHandler = start
    parser.EndElementHandler = end
    parser.Parse(data, True)
    return spans
