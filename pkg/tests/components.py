"""Small in-memory component descriptors for wiring tests."""

from typing import Optional

from comodi.cdl import ComponentDescriptor, ParamSpec, PortKind, PortSpec
from comodi.glue import mangle_name

VERSION = "1.0.0"


def param(name: str, type_name: str = "double", default: Optional[str] = None) -> ParamSpec:
    return ParamSpec(name=name, type_name=type_name, default=default)


def _port(kind: PortKind, component: str, name: str, params, returns: str, remote: bool) -> PortSpec:
    return PortSpec(
        local_name=name,
        global_name=mangle_name(component, 1, name),
        kind=kind,
        return_type=returns,
        params=list(params),
        doc=f"{name} of {component}",
        remote=remote,
    )


def provides(component: str, name: str, *params: ParamSpec, returns: str = "double", remote: bool = False) -> PortSpec:
    return _port(PortKind.PROVIDES, component, name, params, returns, remote)


def uses(component: str, name: str, *params: ParamSpec, returns: str = "double", remote: bool = False) -> PortSpec:
    return _port(PortKind.USES, component, name, params, returns, remote)


def component(name: str, *ports: PortSpec) -> ComponentDescriptor:
    return ComponentDescriptor(
        name=name,
        version=VERSION,
        language="C",
        provides=[p for p in ports if p.kind == PortKind.PROVIDES],
        uses=[p for p in ports if p.kind == PortKind.USES],
    )


def descriptors(*components: ComponentDescriptor) -> dict[tuple[str, str], ComponentDescriptor]:
    return {(c.name, c.version): c for c in components}
