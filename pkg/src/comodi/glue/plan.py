"""Glue plans: everything the emitter needs, computed from a descriptor alone.

Every inter-component call uses the boxed convention: the caller passes
``argc`` values of the ``cmdi_value`` union, aggregates flattened into one
value per field, and receives the result through a pointer. Trampolines
fill missing trailing arguments from defaults and call the author's
function with its own signature.
"""

import logging
from dataclasses import dataclass, field
from typing import Optional

from comodi.cdl.model import ComponentDescriptor, ParamSpec, PortSpec
from comodi.core.errors import UnsupportedRemoteType
from comodi.core.types import base_type, is_indirect, is_void, normalize_type, parse_literal, wire_type
from comodi.extract.model import TypeDefInfo
from comodi.glue.mangling import link_entry_name
from comodi.glue.remote import RemoteLayout, plan_remote

logger = logging.getLogger("comodi.glue")

FORTRAN_LANGUAGES = {"Fortran77"}

# Union member holding each wire type (unsigned int takes the wider one)
_MEMBERS = {
    "char": "c",
    "unsigned char": "c",
    "short": "i",
    "unsigned short": "i",
    "int": "i",
    "unsigned int": "l",
    "long": "l",
    "unsigned long": "l",
    "float": "f",
    "double": "d",
}

_FORTRAN_C_TYPES = {
    "INTEGER": "int",
    "REAL": "float",
    "DOUBLE PRECISION": "double",
    "LOGICAL": "int",
    "CHARACTER": "char",
}


class _Unsupported(Exception):
    pass


@dataclass(frozen=True)
class ValueSlot:
    """One boxed value of a call: ``argv[index].member``."""

    index: int
    member: str
    c_type: str
    field: str = ""


@dataclass(frozen=True)
class GlueParam:
    name: str
    type_name: str
    c_type: str
    values: tuple[ValueSlot, ...]
    by_reference: bool = False
    aggregate: bool = False
    default: Optional[str] = None  # C literal of the default value


@dataclass(frozen=True)
class Trampoline:
    port: str
    global_name: str
    symbol: str  # author function called by the trampoline
    return_type: str
    return_c_type: str
    return_values: tuple[ValueSlot, ...]
    params: tuple[GlueParam, ...]
    required_argc: int
    total_argc: int
    defaults: tuple[tuple[str, str], ...]

    @property
    def returns_aggregate(self) -> bool:
        return len(self.return_values) > 1 or any(v.field for v in self.return_values)


@dataclass(frozen=True)
class WiringSlot:
    slot_id: str  # uses port local name
    index: int
    global_name: str
    symbol: str  # function the glue defines for the author's calls
    return_type: str
    return_c_type: str
    return_values: tuple[ValueSlot, ...]
    params: tuple[GlueParam, ...]
    total_argc: int


@dataclass(frozen=True)
class PackSpec:
    """Decomposition of an aggregate into ordered scalar fields."""

    type_name: str
    fields: tuple[ValueSlot, ...]


@dataclass(frozen=True)
class GluePlan:
    component: str
    version: str
    major: int
    language: str
    link_entry: str
    mangling: dict[str, str]
    slots: tuple[WiringSlot, ...] = ()
    trampolines: tuple[Trampoline, ...] = ()
    pack_specs: tuple[PackSpec, ...] = ()
    remote_plans: dict[str, RemoteLayout] = field(default_factory=dict)
    # Ports left without glue, with the reason
    unsupported: tuple[tuple[str, str], ...] = ()

    @property
    def is_fortran(self) -> bool:
        return self.language in FORTRAN_LANGUAGES

    def trampoline(self, port: str) -> Optional[Trampoline]:
        for trampoline in self.trampolines:
            if trampoline.port == port:
                return trampoline
        return None


class _Planner:
    def __init__(self, descriptor: ComponentDescriptor):
        self.descriptor = descriptor
        self.fortran = descriptor.language in FORTRAN_LANGUAGES
        self.type_defs = {t.name: t for t in descriptor.type_defs}

    def c_type(self, type_name: str) -> str:
        """C spelling of a type; pointers and arrays become pointers."""
        base = base_type(type_name)
        if self.fortran:
            if base not in _FORTRAN_C_TYPES:
                raise _Unsupported(f"Fortran type '{type_name}' has no C counterpart")
            base = _FORTRAN_C_TYPES[base]
        depth = type_name.count("*") + type_name.count("[]")
        return base + (" " + "*" * depth if depth else "")

    def scalar_member(self, type_name: str) -> str:
        if is_indirect(type_name):
            return "p"
        wire = wire_type(type_name)
        if wire is None:
            raise _Unsupported(f"type '{type_name}' cannot be boxed")
        return _MEMBERS[wire.name]

    def pack_spec(self, type_def: TypeDefInfo) -> PackSpec:
        fields = []
        for index, f in enumerate(type_def.fields):
            fields.append(ValueSlot(index, self.scalar_member(f.type_name), self.c_type(f.type_name), f.name))
        return PackSpec(type_def.name, tuple(fields))

    def boxed(self, type_name: str, start: int) -> tuple[ValueSlot, ...]:
        type_def = self.type_defs.get(base_type(type_name))
        if type_def is not None and not is_indirect(type_name):
            spec = self.pack_spec(type_def)
            return tuple(ValueSlot(start + v.index, v.member, v.c_type, v.field) for v in spec.fields)
        return (ValueSlot(start, self.scalar_member(type_name), self.c_type(type_name)),)

    def param(self, param: ParamSpec, start: int) -> GlueParam:
        values = self.boxed(param.type_name, start)
        aggregate = any(v.field for v in values)
        default = None
        if param.default is not None:
            default = repr(parse_literal(param.default, param.type_name))
        return GlueParam(
            name=param.name,
            type_name=param.type_name,
            c_type=self.c_type(param.type_name),
            values=values,
            by_reference=self.fortran and not is_indirect(param.type_name),
            aggregate=aggregate,
            default=default,
        )

    def signature(self, port: PortSpec) -> tuple[tuple[GlueParam, ...], int, str, tuple[ValueSlot, ...]]:
        params, index = [], 0
        for spec in port.params:
            glue_param = self.param(spec, index)
            params.append(glue_param)
            index += len(glue_param.values)
        if is_void(port.return_type):
            return tuple(params), index, "void", ()
        return tuple(params), index, self.c_type(port.return_type), self.boxed(port.return_type, 0)

    def symbol(self, local_name: str) -> str:
        return f"{local_name.lower()}_" if self.fortran else local_name

    def trampoline(self, port: PortSpec) -> Trampoline:
        params, total, return_c_type, return_values = self.signature(port)
        required = total
        for glue_param in reversed(params):
            if glue_param.default is None:
                break
            required -= len(glue_param.values)
        return Trampoline(
            port=port.local_name,
            global_name=port.global_name,
            symbol=self.symbol(port.local_name),
            return_type=normalize_type(port.return_type),
            return_c_type=return_c_type,
            return_values=return_values,
            params=params,
            required_argc=required,
            total_argc=total,
            defaults=tuple((p.name, p.default) for p in params if p.default is not None),
        )

    def slot(self, port: PortSpec, index: int) -> WiringSlot:
        params, total, return_c_type, return_values = self.signature(port)
        return WiringSlot(
            slot_id=port.local_name,
            index=index,
            global_name=port.global_name,
            symbol=self.symbol(port.local_name),
            return_type=normalize_type(port.return_type),
            return_c_type=return_c_type,
            return_values=return_values,
            params=params,
            total_argc=total,
        )


def plan_glue(descriptor: ComponentDescriptor) -> GluePlan:
    """Compute the glue plan of a validated descriptor.

    Ports whose types cannot be boxed are left out and listed in
    ``unsupported``. Uses-port parameters without defaults are bind-time
    obligations, not errors here.

    Raises:
        UnsupportedRemoteType: A port marked remote has no fixed-width layout
    """
    planner = _Planner(descriptor)
    unsupported: list[tuple[str, str]] = []

    slots = []
    for port in descriptor.uses:
        try:
            slots.append(planner.slot(port, len(slots)))
        except _Unsupported as e:
            unsupported.append((port.local_name, str(e)))

    trampolines = []
    for port in descriptor.provides:
        try:
            trampolines.append(planner.trampoline(port))
        except _Unsupported as e:
            unsupported.append((port.local_name, str(e)))

    pack_specs = []
    for type_def in descriptor.type_defs:
        try:
            pack_specs.append(planner.pack_spec(type_def))
        except _Unsupported as e:
            unsupported.append((type_def.name, str(e)))

    remote_plans = {}
    for port in descriptor.ports:
        if port.remote:
            try:
                remote_plans[port.local_name] = plan_remote(port, descriptor.type_defs)
            except UnsupportedRemoteType as e:
                raise UnsupportedRemoteType(f"remote port {port.local_name}: {e}") from e

    for name, reason in unsupported:
        logger.warning(f"No glue for {descriptor.name}.{name}: {reason}")

    return GluePlan(
        component=descriptor.name,
        version=descriptor.version,
        major=descriptor.major,
        language=descriptor.language,
        link_entry=link_entry_name(descriptor.name, descriptor.major),
        mangling={port.local_name: port.global_name for port in descriptor.ports},
        slots=tuple(slots),
        trampolines=tuple(trampolines),
        pack_specs=tuple(pack_specs),
        remote_plans=remote_plans,
        unsupported=tuple(unsupported),
    )


def pack_aggregate(spec: PackSpec, value: dict) -> list:
    """Decompose an aggregate value into its ordered field values."""
    return [value[f.field] for f in spec.fields]


def unpack_aggregate(spec: PackSpec, values: list) -> dict:
    """Reassemble an aggregate from ordered field values."""
    if len(values) != len(spec.fields):
        raise ValueError(f"{spec.type_name} has {len(spec.fields)} fields, got {len(values)} values")
    return {f.field: v for f, v in zip(spec.fields, values)}
