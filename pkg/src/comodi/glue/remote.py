"""Remote call layouts and the stub/skeleton pair that uses them.

Messages are fixed-width little-endian records: a request holds the
parameters in order with aggregates decomposed into their fields, a
response holds the return value.
"""

import logging
import struct
from dataclasses import dataclass
from typing import Any, Callable, Optional, Sequence, Union

from comodi.cdl.model import PortSpec
from comodi.core.errors import UnsupportedRemoteType
from comodi.core.types import WireType, base_type, is_indirect, is_void, wire_type
from comodi.extract.model import TypeDefInfo

logger = logging.getLogger("comodi.glue")


@dataclass(frozen=True)
class RemoteField:
    name: str  # parameter name, or "param.field" for decomposed aggregates
    wire: WireType
    offset: int

    @property
    def width(self) -> int:
        return self.wire.width


@dataclass(frozen=True)
class RemoteLayout:
    port: str
    request: tuple[RemoteField, ...]
    response: tuple[RemoteField, ...]
    # Parameter name -> field names when the parameter is an aggregate
    aggregates: tuple[tuple[str, tuple[str, ...]], ...] = ()
    return_fields: tuple[str, ...] = ()

    @property
    def request_size(self) -> int:
        return sum(f.width for f in self.request)

    @property
    def response_size(self) -> int:
        return sum(f.width for f in self.response)

    @staticmethod
    def format_of(fields: Sequence[RemoteField]) -> str:
        return "<" + "".join(f.wire.code for f in fields)


def _decompose(
    prefix: str,
    type_name: str,
    type_defs: dict[str, TypeDefInfo],
) -> list[tuple[str, WireType]]:
    if is_indirect(type_name):
        raise UnsupportedRemoteType(f"'{prefix}' has indirect type '{type_name}'")
    wire = wire_type(type_name)
    if wire is not None:
        return [(prefix, wire)]
    type_def = type_defs.get(base_type(type_name))
    if type_def is None:
        raise UnsupportedRemoteType(f"'{prefix}' has type '{type_name}' without a wire form")
    parts = []
    for f in type_def.fields:
        field_wire = wire_type(f.type_name)
        if field_wire is None:
            raise UnsupportedRemoteType(f"field {type_def.name}.{f.name} of type '{f.type_name}' is not a scalar")
        parts.append((f"{prefix}.{f.name}", field_wire))
    return parts


def _with_offsets(parts: list[tuple[str, WireType]]) -> tuple[RemoteField, ...]:
    fields, offset = [], 0
    for name, wire in parts:
        fields.append(RemoteField(name, wire, offset))
        offset += wire.width
    return tuple(fields)


def plan_remote(port: PortSpec, type_defs: Sequence[TypeDefInfo] = ()) -> RemoteLayout:
    """Message layout of a port.

    Raises:
        UnsupportedRemoteType: A parameter or the return type has no fixed-width decomposition
    """
    known = {t.name: t for t in type_defs}
    request: list[tuple[str, WireType]] = []
    aggregates = []
    for param in port.params:
        parts = _decompose(param.name, param.type_name, known)
        if base_type(param.type_name) in known:
            aggregates.append((param.name, tuple(name.split(".", 1)[1] for name, _ in parts)))
        request.extend(parts)

    response: list[tuple[str, WireType]] = []
    return_fields: tuple[str, ...] = ()
    if not is_void(port.return_type):
        response = _decompose("return", port.return_type, known)
        if base_type(port.return_type) in known:
            return_fields = tuple(name.split(".", 1)[1] for name, _ in response)

    return RemoteLayout(
        port=port.local_name,
        request=_with_offsets(request),
        response=_with_offsets(response),
        aggregates=tuple(aggregates),
        return_fields=return_fields,
    )


def _flatten(layout: RemoteLayout, args: Sequence[Any]) -> list[Any]:
    aggregates = dict(layout.aggregates)
    values: list[Any] = []
    names = []
    for field in layout.request:
        name = field.name.split(".", 1)[0]
        if name not in names:
            names.append(name)
    if len(args) != len(names):
        raise ValueError(f"{layout.port} expects {len(names)} arguments, got {len(args)}")
    for name, arg in zip(names, args):
        if name in aggregates:
            values.extend(arg[f] if isinstance(arg, dict) else arg[i] for i, f in enumerate(aggregates[name]))
        else:
            values.append(arg)
    return values


def _coerce(values: Sequence[Any], fields: Sequence[RemoteField]) -> list[Union[int, float]]:
    return [int(v) if f.wire.numeric == "int" else float(v) for v, f in zip(values, fields)]


def encode_request(layout: RemoteLayout, args: Sequence[Any]) -> bytes:
    values = _coerce(_flatten(layout, args), layout.request)
    return struct.pack(RemoteLayout.format_of(layout.request), *values)


def decode_request(layout: RemoteLayout, data: bytes) -> list[Any]:
    if len(data) != layout.request_size:
        raise ValueError(f"{layout.port}: request of {len(data)} bytes, expected {layout.request_size}")
    flat = list(struct.unpack(RemoteLayout.format_of(layout.request), data))
    aggregates = dict(layout.aggregates)
    args: list[Any] = []
    index = 0
    seen: list[str] = []
    for field in layout.request:
        name = field.name.split(".", 1)[0]
        if name in seen:
            continue
        seen.append(name)
        if name in aggregates:
            count = len(aggregates[name])
            args.append(dict(zip(aggregates[name], flat[index : index + count])))
            index += count
        else:
            args.append(flat[index])
            index += 1
    return args


def encode_response(layout: RemoteLayout, value: Any) -> bytes:
    if not layout.response:
        return b""
    if layout.return_fields:
        values = [value[f] if isinstance(value, dict) else value[i] for i, f in enumerate(layout.return_fields)]
    else:
        values = [value]
    return struct.pack(RemoteLayout.format_of(layout.response), *_coerce(values, layout.response))


def decode_response(layout: RemoteLayout, data: bytes) -> Any:
    if len(data) != layout.response_size:
        raise ValueError(f"{layout.port}: response of {len(data)} bytes, expected {layout.response_size}")
    if not layout.response:
        return None
    values = struct.unpack(RemoteLayout.format_of(layout.response), data)
    if layout.return_fields:
        return dict(zip(layout.return_fields, values))
    return values[0]


class RemoteSkeleton:
    """Server side: decode a request, invoke the handler, encode the result."""

    def __init__(self, layout: RemoteLayout, handler: Callable[..., Any]):
        self.layout = layout
        self.handler = handler

    def handle(self, request: bytes) -> bytes:
        args = decode_request(self.layout, request)
        return encode_response(self.layout, self.handler(*args))


class LoopbackTransport:
    """In-process transport delivering each message straight to a skeleton."""

    def __init__(self, skeleton: RemoteSkeleton):
        self.skeleton = skeleton
        self.messages = 0
        self.bytes_sent = 0

    def send(self, message: bytes) -> bytes:
        self.messages += 1
        self.bytes_sent += len(message)
        return self.skeleton.handle(message)


class RemoteStub:
    """Client side: encode arguments, send them, decode the response."""

    def __init__(self, layout: RemoteLayout, transport: LoopbackTransport):
        self.layout = layout
        self.transport = transport

    def __call__(self, *args: Any) -> Optional[Any]:
        reply = self.transport.send(encode_request(self.layout, args))
        return decode_response(self.layout, reply)
