"""Descriptor validation."""

import re

from comodi.cdl.model import ComponentDescriptor, PortSpec
from comodi.core.diagnostics import Diagnostic
from comodi.core.errors import DefaultLiteralError
from comodi.core.types import base_type, is_primitive, parse_literal
from comodi.glue.mangling import is_shell_safe, mangle_name
from comodi.utils.constants import CDL_VERSION

BAD_NAME = "BadComponentName"
BAD_VERSION = "BadVersion"
UNSUPPORTED_CDL = "UnsupportedCdlVersion"
DUPLICATE_PORT = "DuplicatePort"
DUPLICATE_PARAM = "DuplicateParam"
BAD_GLOBAL_NAME = "BadGlobalName"
GLOBAL_NAME_CLASH = "GlobalNameClash"
BAD_DEFAULT = "BadDefault"
UNRESOLVED_TYPE = "UnresolvedType"
EMPTY_TYPE = "EmptyTypeDef"
DUPLICATE_FIELD = "DuplicateField"
NO_PORTS = "NoPorts"
UNDOCUMENTED_PORT = "UndocumentedPort"
USES_PARAM_WITHOUT_DEFAULT = "UsesParamWithoutDefault"

_SEMVER = re.compile(r"^\d+\.\d+\.\d+$")


def _port_diagnostics(descriptor: ComponentDescriptor, port: PortSpec) -> list[Diagnostic]:
    subject = f"{port.kind.value}:{port.local_name}"
    found: list[Diagnostic] = []
    known_types = {t.name for t in descriptor.type_defs}

    if is_shell_safe(descriptor.name) and _SEMVER.match(descriptor.version):
        try:
            expected = mangle_name(descriptor.name, descriptor.major, port.local_name)
        except ValueError:
            expected = None
        if expected != port.global_name:
            found.append(
                Diagnostic.error(
                    BAD_GLOBAL_NAME,
                    f"port {port.local_name} has global name '{port.global_name}', expected '{expected}'",
                    subject,
                )
            )

    names = [p.name for p in port.params]
    for name in sorted({n for n in names if names.count(n) > 1}):
        found.append(Diagnostic.error(DUPLICATE_PARAM, f"port {port.local_name} repeats parameter {name}", subject))

    for type_name in [port.return_type] + [p.type_name for p in port.params]:
        base = base_type(type_name)
        if not is_primitive(base) and base not in known_types:
            found.append(
                Diagnostic.error(UNRESOLVED_TYPE, f"port {port.local_name} uses unknown type '{type_name}'", subject)
            )

    for param in port.params:
        if param.default is None:
            continue
        try:
            parse_literal(param.default, param.type_name)
        except DefaultLiteralError as e:
            found.append(Diagnostic.error(BAD_DEFAULT, f"port {port.local_name}, parameter {param.name}: {e}", subject))

    if not port.doc:
        found.append(Diagnostic.warning(UNDOCUMENTED_PORT, f"port {port.local_name} has no documentation", subject))
    if port.kind.value == "uses":
        for param in port.params:
            if param.default is None:
                found.append(
                    Diagnostic.warning(
                        USES_PARAM_WITHOUT_DEFAULT,
                        f"uses port {port.local_name}: parameter {param.name} has no default",
                        subject,
                    )
                )
    return found


def validate_cdf(descriptor: ComponentDescriptor) -> list[Diagnostic]:
    """Check descriptor invariants.

    Returns:
        Errors for invariant violations; warnings for portless descriptors,
        undocumented ports and uses-port parameters without defaults
    """
    found: list[Diagnostic] = []

    if not is_shell_safe(descriptor.name):
        found.append(Diagnostic.error(BAD_NAME, f"component name '{descriptor.name}' is not shell-safe", "name"))
    if not _SEMVER.match(descriptor.version):
        found.append(
            Diagnostic.error(BAD_VERSION, f"version '{descriptor.version}' is not MAJOR.MINOR.PATCH", "version")
        )
    if descriptor.cdl_version != CDL_VERSION:
        found.append(
            Diagnostic.error(UNSUPPORTED_CDL, f"unsupported CDL version '{descriptor.cdl_version}'", "cdl-version")
        )

    for type_def in descriptor.type_defs:
        if not type_def.fields:
            found.append(Diagnostic.error(EMPTY_TYPE, f"type {type_def.name} has no fields", type_def.name))
        names = type_def.field_names()
        for name in sorted({n for n in names if names.count(n) > 1}):
            found.append(Diagnostic.error(DUPLICATE_FIELD, f"type {type_def.name} repeats field {name}", type_def.name))

    for ports in (descriptor.provides, descriptor.uses):
        names = [p.local_name for p in ports]
        for name in sorted({n for n in names if names.count(n) > 1}):
            kind = ports[0].kind.value
            found.append(Diagnostic.error(DUPLICATE_PORT, f"{kind} port {name} is declared twice", f"{kind}:{name}"))

    seen_globals: dict[str, str] = {}
    for port in descriptor.ports:
        key = port.global_name.lower()
        if key in seen_globals and seen_globals[key] != port.local_name:
            found.append(
                Diagnostic.error(
                    GLOBAL_NAME_CLASH,
                    f"ports {seen_globals[key]} and {port.local_name} fold to the same global name",
                    port.local_name,
                )
            )
        seen_globals.setdefault(key, port.local_name)
        found.extend(_port_diagnostics(descriptor, port))

    if not descriptor.ports:
        found.append(Diagnostic.warning(NO_PORTS, f"component {descriptor.name} declares no ports", descriptor.name))
    return found
