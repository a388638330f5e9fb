"""Project verification against the component descriptors."""

import logging
from typing import Mapping, Optional

from comodi.cdl.model import ComponentDescriptor, PortSpec
from comodi.core.diagnostics import Diagnostic
from comodi.core.errors import DefaultLiteralError
from comodi.core.types import is_void, parse_literal, types_compatible
from comodi.wiring.project import ProjectDescription

logger = logging.getLogger("comodi.wiring")

# Descriptors of the fetched packages keyed by (package, version)
Descriptors = Mapping[tuple[str, str], ComponentDescriptor]

MISSING_DESCRIPTOR = "MissingDescriptor"
UNKNOWN_USES_PORT = "UnknownUsesPort"
UNKNOWN_PROVIDES_PORT = "UnknownProvidesPort"
DUPLICATE_BINDING = "DuplicateBinding"
SIGNATURE_MISMATCH = "SignatureMismatch"
ARITY_MISMATCH = "ArityMismatch"
UNBOUND_USES_PORT = "UnboundUsesPort"
UNKNOWN_OVERRIDE = "UnknownOverride"
BAD_OVERRIDE = "BadOverride"
BAD_ENTRY = "BadEntryPoint"
REMOTE_MISMATCH = "RemoteMismatch"


def effective_defaults(project: ProjectDescription, instance: str, port: PortSpec) -> list[Optional[str]]:
    """Default literal per parameter, project overrides taking precedence."""
    overrides = project.overrides_for(instance, port.local_name)
    return [overrides.get(param.name, param.default) for param in port.params]


def defaults_cover(defaults: list[Optional[str]], start: int) -> bool:
    return all(default is not None for default in defaults[start:])


def descriptor_of(project: ProjectDescription, descriptors: Descriptors, instance: str) -> Optional[ComponentDescriptor]:
    decl = project.instance(instance)
    return descriptors.get(decl.key) if decl is not None else None


def _check_connection(
    project: ProjectDescription,
    uses: PortSpec,
    provides: PortSpec,
    target_instance: str,
    subject: str,
) -> list[Diagnostic]:
    found = []
    if not (is_void(uses.return_type) and is_void(provides.return_type)) and not types_compatible(
        uses.return_type, provides.return_type
    ):
        found.append(
            Diagnostic.error(
                SIGNATURE_MISMATCH,
                f"{subject}: returns '{uses.return_type}' but target returns '{provides.return_type}'",
                subject,
            )
        )
    for position, (mine, theirs) in enumerate(zip(uses.params, provides.params)):
        if not types_compatible(mine.type_name, theirs.type_name):
            found.append(
                Diagnostic.error(
                    SIGNATURE_MISMATCH,
                    f"{subject}: parameter {position} is '{mine.type_name}' but target expects '{theirs.type_name}'",
                    subject,
                )
            )
    if uses.arity > provides.arity:
        found.append(
            Diagnostic.error(
                ARITY_MISMATCH,
                f"{subject}: passes {uses.arity} arguments to a port taking {provides.arity}",
                subject,
            )
        )
    elif not defaults_cover(effective_defaults(project, target_instance, provides), uses.arity):
        found.append(
            Diagnostic.error(
                ARITY_MISMATCH,
                f"{subject}: target parameters {uses.arity}..{provides.arity - 1} need defaults",
                subject,
            )
        )
    if uses.remote != provides.remote:
        found.append(
            Diagnostic.warning(REMOTE_MISMATCH, f"{subject}: only one side is marked remote", subject)
        )
    return found


def _check_overrides(project: ProjectDescription, descriptors: Descriptors) -> list[Diagnostic]:
    found = []
    for override in project.overrides:
        subject = f"{override.instance}.{override.port}.{override.name}"
        descriptor = descriptor_of(project, descriptors, override.instance)
        if descriptor is None:
            continue
        port = descriptor.provided(override.port) or descriptor.used(override.port)
        param = port.param(override.name) if port is not None else None
        if param is None:
            found.append(Diagnostic.error(UNKNOWN_OVERRIDE, f"no parameter {subject}", subject))
            continue
        try:
            parse_literal(override.value, param.type_name)
        except DefaultLiteralError as e:
            found.append(Diagnostic.error(BAD_OVERRIDE, f"{subject}: {e}", subject))
    return found


def _check_entry(project: ProjectDescription, descriptors: Descriptors) -> list[Diagnostic]:
    entry = project.entry
    subject = f"{entry.instance}.{entry.port}"
    descriptor = descriptor_of(project, descriptors, entry.instance)
    if descriptor is None:
        return []
    port = descriptor.provided(entry.port)
    if port is None:
        return [Diagnostic.error(BAD_ENTRY, f"entry point {subject} is not a provides port", subject)]
    found = []
    if len(entry.args) > port.arity:
        found.append(
            Diagnostic.error(BAD_ENTRY, f"entry point {subject} takes {port.arity} arguments, got {len(entry.args)}", subject)
        )
    elif not defaults_cover(effective_defaults(project, entry.instance, port), len(entry.args)):
        found.append(
            Diagnostic.error(BAD_ENTRY, f"entry point {subject} is missing arguments without defaults", subject)
        )
    for arg, param in zip(entry.args, port.params):
        try:
            parse_literal(arg, param.type_name)
        except DefaultLiteralError as e:
            found.append(Diagnostic.error(BAD_ENTRY, f"entry argument {param.name}: {e}", subject))
    return found


def validate_project(project: ProjectDescription, descriptors: Descriptors) -> list[Diagnostic]:
    """Check ports, signatures and arity of every connection.

    A uses port of arity n may call a provides port of arity m > n when
    parameters n..m-1 carry defaults. Each uses port binds to exactly one
    provides port; an unbound uses port is allowed only when all of its own
    parameters carry defaults.

    Returns:
        Diagnostics; findings never raise
    """
    diagnostics: list[Diagnostic] = []

    for decl in project.instances:
        if decl.key not in descriptors:
            diagnostics.append(
                Diagnostic.error(
                    MISSING_DESCRIPTOR, f"no descriptor for {decl.package} {decl.version} (instance {decl.id})", decl.id
                )
            )

    bound: dict[tuple[str, str], int] = {}
    for connection in project.connections:
        subject = f"{connection.source} -> {connection.target}"
        source = descriptor_of(project, descriptors, connection.source.instance)
        target = descriptor_of(project, descriptors, connection.target.instance)
        if source is None or target is None:
            continue
        uses = source.used(connection.source.port)
        provides = target.provided(connection.target.port)
        if uses is None:
            diagnostics.append(
                Diagnostic.error(UNKNOWN_USES_PORT, f"{connection.source} is not a uses port", str(connection.source))
            )
        if provides is None:
            diagnostics.append(
                Diagnostic.error(
                    UNKNOWN_PROVIDES_PORT, f"{connection.target} is not a provides port", str(connection.target)
                )
            )
        if uses is None or provides is None:
            continue
        key = (connection.source.instance, uses.local_name)
        bound[key] = bound.get(key, 0) + 1
        if bound[key] == 2:
            diagnostics.append(
                Diagnostic.error(
                    DUPLICATE_BINDING, f"{connection.source} is connected more than once", str(connection.source)
                )
            )
        diagnostics.extend(_check_connection(project, uses, provides, connection.target.instance, subject))

    for decl in project.instances:
        descriptor = descriptors.get(decl.key)
        if descriptor is None:
            continue
        for uses in descriptor.uses:
            if (decl.id, uses.local_name) in bound:
                continue
            if not defaults_cover(effective_defaults(project, decl.id, uses), 0):
                diagnostics.append(
                    Diagnostic.error(
                        UNBOUND_USES_PORT,
                        f"{decl.id}.{uses.local_name} is not connected and its parameters lack defaults",
                        f"{decl.id}.{uses.local_name}",
                    )
                )

    diagnostics.extend(_check_overrides(project, descriptors))
    diagnostics.extend(_check_entry(project, descriptors))
    logger.debug(f"Validated project: {len(diagnostics)} diagnostics")
    return diagnostics
