"""Binding: one paramString per instance and the order of link calls."""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from comodi.cdl.model import ComponentDescriptor
from comodi.core.diagnostics import errors_only
from comodi.core.errors import ProjectValidationError
from comodi.glue.param_string import Binding, ParamString, render_param_string
from comodi.wiring.project import ProjectDescription
from comodi.wiring.validate import Descriptors, effective_defaults, validate_project

logger = logging.getLogger("comodi.wiring")


class Backend(str, Enum):
    MOCK = "mock"
    NATIVE = "native"


@dataclass(frozen=True)
class InstancePlan:
    instance: str
    descriptor: ComponentDescriptor
    param_string: ParamString
    # port local name -> default literal per parameter (None when absent)
    defaults: dict[str, tuple[Optional[str], ...]] = field(default_factory=dict)

    @property
    def param_text(self) -> str:
        return render_param_string(self.param_string)


@dataclass(frozen=True)
class WiringPlan:
    project: ProjectDescription
    instances: dict[str, InstancePlan]
    link_order: tuple[str, ...]
    backend: Backend = Backend.MOCK

    def param_string(self, instance: str) -> str:
        return self.instances[instance].param_text

    def target(self, instance: str, uses_port: str) -> Optional[tuple[str, str]]:
        """(instance, provides local name) a uses port is bound to."""
        binding = self.instances[instance].param_string.target_of(uses_port)
        if binding is None:
            return None
        port = self.instances[binding.instance].descriptor.provided(binding.target)
        return (binding.instance, port.local_name) if port is not None else None


def link_order(project: ProjectDescription) -> tuple[str, ...]:
    """Providers before the instances calling them, in declaration order otherwise.

    Instances on a cycle follow in declaration order; all references are
    allocated before any link entry runs, so a cycle only assigns slots that
    already exist.
    """
    ids = [decl.id for decl in project.instances]
    depends: dict[str, set[str]] = {instance: set() for instance in ids}
    for connection in project.connections:
        if connection.source.instance != connection.target.instance:
            depends[connection.source.instance].add(connection.target.instance)

    order: list[str] = []
    placed: set[str] = set()
    progress = True
    while progress:
        progress = False
        for instance in ids:
            if instance not in placed and depends[instance] <= placed:
                order.append(instance)
                placed.add(instance)
                progress = True
                break
    order.extend(instance for instance in ids if instance not in placed)
    return tuple(order)


def bind(project: ProjectDescription, descriptors: Descriptors, backend: Backend = Backend.MOCK) -> WiringPlan:
    """Compute paramStrings, resolved defaults and link order.

    Raises:
        ProjectValidationError: validate_project reports errors
    """
    errors = errors_only(validate_project(project, descriptors))
    if errors:
        raise ProjectValidationError(errors)

    instances = {}
    for decl in project.instances:
        descriptor = descriptors[decl.key]
        bindings = []
        for uses in descriptor.uses:
            for connection in project.connections_from(decl.id):
                if connection.source.port != uses.local_name:
                    continue
                target = descriptors[project.instance(connection.target.instance).key]
                provides = target.provided(connection.target.port)
                bindings.append(Binding(uses.local_name, connection.target.instance, provides.global_name))
        defaults = {port.local_name: tuple(effective_defaults(project, decl.id, port)) for port in descriptor.ports}
        instances[decl.id] = InstancePlan(decl.id, descriptor, ParamString(tuple(bindings)), defaults)

    plan = WiringPlan(project=project, instances=instances, link_order=link_order(project), backend=backend)
    for instance in plan.link_order:
        logger.debug(f"{instance}: '{plan.param_string(instance)}'")
    return plan
