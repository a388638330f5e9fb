"""Project descriptions: component instances and their connections."""

import logging
import re
import xml.etree.ElementTree as ET
from typing import Optional, Union

from pydantic import BaseModel, Field

from comodi.core.errors import ProjectSchemaError
from comodi.utils.xml_helpers import check_attrs, expect_tag, parse_xml, require_attr, to_xml_text

logger = logging.getLogger("comodi.wiring")

_INSTANCE_ID = re.compile(r"^[A-Za-z0-9_][A-Za-z0-9_-]*$")
_PORT = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


class InstanceDecl(BaseModel):
    id: str
    package: str
    version: str

    @property
    def key(self) -> tuple[str, str]:
        return (self.package, self.version)


class PortRef(BaseModel):
    instance: str
    port: str

    def __str__(self) -> str:
        return f"{self.instance}.{self.port}"


class Connection(BaseModel):
    """``source`` is a uses port, ``target`` the provides port it calls."""

    source: PortRef
    target: PortRef


class ParamOverride(BaseModel):
    instance: str
    port: str
    name: str
    value: str


class EntryPoint(BaseModel):
    instance: str
    port: str
    args: list[str] = Field(default_factory=list)


class ProjectDescription(BaseModel):
    instances: list[InstanceDecl]
    connections: list[Connection] = Field(default_factory=list)
    overrides: list[ParamOverride] = Field(default_factory=list)
    entry: EntryPoint

    def instance(self, instance_id: str) -> Optional[InstanceDecl]:
        for decl in self.instances:
            if decl.id == instance_id:
                return decl
        return None

    def connections_from(self, instance_id: str) -> list[Connection]:
        return [c for c in self.connections if c.source.instance == instance_id]

    def overrides_for(self, instance_id: str, port: str) -> dict[str, str]:
        return {o.name: o.value for o in self.overrides if (o.instance, o.port) == (instance_id, port)}


def _port_ref(text: str, path: str) -> PortRef:
    instance, dot, port = text.partition(".")
    if not dot or not _INSTANCE_ID.match(instance) or not _PORT.match(port):
        raise ProjectSchemaError(path, f"expected 'instance.port', found '{text}'")
    return PortRef(instance=instance, port=port)


def _declared(ids: set[str], instance: str, path: str) -> None:
    if instance not in ids:
        raise ProjectSchemaError(path, f"undeclared instance '{instance}'")


def load_project(text: Union[str, bytes]) -> ProjectDescription:
    """Read and structurally check a project description.

    Raises:
        ProjectSchemaError: Malformed document, duplicate instance ids,
            references to undeclared instances, or a missing entry point
    """
    root = parse_xml(text, ProjectSchemaError)
    expect_tag(root, "project", "/project", ProjectSchemaError)

    instances: list[InstanceDecl] = []
    connections: list[Connection] = []
    overrides: list[ParamOverride] = []
    entries: list[EntryPoint] = []
    counts: dict[str, int] = {}

    for child in root:
        index = counts.get(child.tag, 0)
        counts[child.tag] = index + 1
        path = f"/project/{child.tag}[{index}]"

        if child.tag == "instance":
            check_attrs(child, {"id", "pkg", "version"}, path, ProjectSchemaError)
            instance_id = require_attr(child, "id", path, ProjectSchemaError)
            if not _INSTANCE_ID.match(instance_id):
                raise ProjectSchemaError(f"{path}@id", f"invalid instance id '{instance_id}'")
            if any(decl.id == instance_id for decl in instances):
                raise ProjectSchemaError(f"{path}@id", f"duplicate instance id '{instance_id}'")
            instances.append(
                InstanceDecl(
                    id=instance_id,
                    package=require_attr(child, "pkg", path, ProjectSchemaError),
                    version=require_attr(child, "version", path, ProjectSchemaError),
                )
            )
        elif child.tag == "connect":
            check_attrs(child, {"from", "to"}, path, ProjectSchemaError)
            connections.append(
                Connection(
                    source=_port_ref(require_attr(child, "from", path, ProjectSchemaError), f"{path}@from"),
                    target=_port_ref(require_attr(child, "to", path, ProjectSchemaError), f"{path}@to"),
                )
            )
        elif child.tag == "param":
            check_attrs(child, {"instance", "port", "name", "value"}, path, ProjectSchemaError)
            overrides.append(
                ParamOverride(
                    instance=require_attr(child, "instance", path, ProjectSchemaError),
                    port=require_attr(child, "port", path, ProjectSchemaError),
                    name=require_attr(child, "name", path, ProjectSchemaError),
                    value=require_attr(child, "value", path, ProjectSchemaError),
                )
            )
        elif child.tag == "entry":
            check_attrs(child, {"instance", "port"}, path, ProjectSchemaError)
            args = []
            for position, arg in enumerate(child):
                if arg.tag != "arg":
                    raise ProjectSchemaError(f"{path}/{arg.tag}[{position}]", "unknown element")
                args.append((arg.text or "").strip())
            entries.append(
                EntryPoint(
                    instance=require_attr(child, "instance", path, ProjectSchemaError),
                    port=require_attr(child, "port", path, ProjectSchemaError),
                    args=args,
                )
            )
        else:
            raise ProjectSchemaError(path, "unknown element")

    if not entries:
        raise ProjectSchemaError("/project", "no <entry> element")
    if len(entries) > 1:
        raise ProjectSchemaError("/project/entry[1]", "more than one entry point")

    ids = {decl.id for decl in instances}
    for index, connection in enumerate(connections):
        _declared(ids, connection.source.instance, f"/project/connect[{index}]@from")
        _declared(ids, connection.target.instance, f"/project/connect[{index}]@to")
    for index, override in enumerate(overrides):
        _declared(ids, override.instance, f"/project/param[{index}]@instance")
    _declared(ids, entries[0].instance, "/project/entry[0]@instance")

    project = ProjectDescription(instances=instances, connections=connections, overrides=overrides, entry=entries[0])
    logger.debug(f"Loaded project: {len(instances)} instances, {len(connections)} connections")
    return project


def project_to_xml(project: ProjectDescription) -> str:
    root = ET.Element("project")
    for decl in project.instances:
        ET.SubElement(root, "instance", {"id": decl.id, "pkg": decl.package, "version": decl.version})
    for connection in project.connections:
        ET.SubElement(root, "connect", {"from": str(connection.source), "to": str(connection.target)})
    for override in project.overrides:
        ET.SubElement(
            root,
            "param",
            {"instance": override.instance, "port": override.port, "name": override.name, "value": override.value},
        )
    entry = ET.SubElement(root, "entry", {"instance": project.entry.instance, "port": project.entry.port})
    for arg in project.entry.args:
        ET.SubElement(entry, "arg").text = arg
    return to_xml_text(root)
