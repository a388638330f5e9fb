"""Primitive type catalog shared by extraction, descriptors and glue."""

from dataclasses import dataclass
from enum import Enum
from typing import Optional, Union

from comodi.core.errors import DefaultLiteralError


class PassingMode(str, Enum):
    """How a parameter crosses the call boundary."""

    BY_VALUE = "byValue"
    BY_REFERENCE = "byReference"


@dataclass(frozen=True)
class WireType:
    """Fixed-width little-endian wire representation."""

    name: str
    width: int
    code: str  # struct format character
    numeric: str  # "int" or "float"


WIRE_CHAR = WireType("char", 1, "b", "int")
WIRE_UCHAR = WireType("unsigned char", 1, "B", "int")
WIRE_SHORT = WireType("short", 2, "h", "int")
WIRE_USHORT = WireType("unsigned short", 2, "H", "int")
WIRE_INT = WireType("int", 4, "i", "int")
WIRE_UINT = WireType("unsigned int", 4, "I", "int")
WIRE_LONG = WireType("long", 8, "q", "int")
WIRE_ULONG = WireType("unsigned long", 8, "Q", "int")
WIRE_FLOAT = WireType("float", 4, "f", "float")
WIRE_DOUBLE = WireType("double", 8, "d", "float")

# Base type name -> wire type (None: known type without a wire form)
PRIMITIVE_TYPES: dict[str, Optional[WireType]] = {
    "void": None,
    "char": WIRE_CHAR,
    "signed char": WIRE_CHAR,
    "unsigned char": WIRE_UCHAR,
    "short": WIRE_SHORT,
    "short int": WIRE_SHORT,
    "signed short": WIRE_SHORT,
    "unsigned short": WIRE_USHORT,
    "unsigned short int": WIRE_USHORT,
    "int": WIRE_INT,
    "signed": WIRE_INT,
    "signed int": WIRE_INT,
    "unsigned": WIRE_UINT,
    "unsigned int": WIRE_UINT,
    "long": WIRE_LONG,
    "long int": WIRE_LONG,
    "long long": WIRE_LONG,
    "long long int": WIRE_LONG,
    "unsigned long": WIRE_ULONG,
    "unsigned long int": WIRE_ULONG,
    "unsigned long long": WIRE_ULONG,
    "float": WIRE_FLOAT,
    "double": WIRE_DOUBLE,
    # Fortran 77
    "INTEGER": WIRE_INT,
    "REAL": WIRE_FLOAT,
    "DOUBLE PRECISION": WIRE_DOUBLE,
    "LOGICAL": WIRE_INT,
    "CHARACTER": WIRE_CHAR,
    "COMPLEX": None,
}

_FORTRAN_LOGICALS = {".TRUE.": 1, ".FALSE.": 0}


def normalize_type(name: str) -> str:
    """Collapse whitespace inside a type name."""
    return " ".join(name.split())


def base_type(name: str) -> str:
    """Strip pointer and array decorations."""
    return normalize_type(name.replace("*", " ").replace("[]", " "))


def is_indirect(name: str) -> bool:
    """Check whether a type is a pointer or array."""
    return "*" in name or "[]" in name


def is_primitive(name: str) -> bool:
    """Check whether the base type is in the primitive catalog."""
    return base_type(name) in PRIMITIVE_TYPES


def is_void(name: str) -> bool:
    return normalize_type(name) == "void"


def wire_type(name: str) -> Optional[WireType]:
    """Get the wire type of a scalar primitive, or None."""
    if is_indirect(name):
        return None
    return PRIMITIVE_TYPES.get(normalize_type(name))


def types_compatible(left: str, right: str) -> bool:
    """Check whether two type names denote the same value representation."""
    if normalize_type(left) == normalize_type(right):
        return True
    left_wire, right_wire = wire_type(left), wire_type(right)
    return left_wire is not None and left_wire == right_wire


def parse_literal(literal: str, type_name: str) -> Union[int, float]:
    """Parse a default literal as a value of the given type.

    Raises:
        DefaultLiteralError: literal is not a valid value of the type, or
            the type does not admit defaults (pointers, aggregates)
    """
    wire = wire_type(type_name)
    text = literal.strip()
    if wire is None:
        raise DefaultLiteralError(f"type '{type_name}' does not admit default values")

    if wire.numeric == "float":
        cleaned = text.rstrip("fFlL").replace("D", "E").replace("d", "e")
        try:
            return float(cleaned)
        except ValueError:
            raise DefaultLiteralError(f"'{literal}' is not a valid {type_name} literal") from None

    upper = text.upper()
    if upper in _FORTRAN_LOGICALS:
        return _FORTRAN_LOGICALS[upper]
    if wire in (WIRE_CHAR, WIRE_UCHAR) and len(text) == 3 and text[0] == text[-1] == "'":
        return ord(text[1])
    try:
        return int(text.rstrip("uUlL"), 0)
    except ValueError:
        raise DefaultLiteralError(f"'{literal}' is not a valid {type_name} literal") from None
