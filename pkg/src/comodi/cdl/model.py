"""Component descriptor models."""

from enum import Enum
from typing import Optional

from pydantic import BaseModel, Field

from comodi.core.types import PassingMode
from comodi.extract.model import TypeDefInfo
from comodi.utils.constants import CDL_VERSION


class PortKind(str, Enum):
    PROVIDES = "provides"
    USES = "uses"


class Extension(BaseModel):
    """Foreign element kept verbatim at its position among its siblings."""

    position: int
    xml: str


class ParamSpec(BaseModel):
    name: str
    type_name: str
    passing: PassingMode = PassingMode.BY_VALUE
    default: Optional[str] = None
    doc: Optional[str] = None


class PortSpec(BaseModel):
    local_name: str
    global_name: str
    kind: PortKind
    return_type: str = "void"
    params: list[ParamSpec] = Field(default_factory=list)
    doc: Optional[str] = None
    remote: bool = False
    extensions: list[Extension] = Field(default_factory=list)

    @property
    def arity(self) -> int:
        return len(self.params)

    def param(self, name: str) -> Optional[ParamSpec]:
        for param in self.params:
            if param.name == name:
                return param
        return None

    def defaults_from(self, index: int) -> bool:
        """Check whether every parameter from ``index`` on carries a default."""
        return all(param.default is not None for param in self.params[index:])


class ComponentDescriptor(BaseModel):
    """Contents of a component descriptor file."""

    name: str
    version: str
    language: str
    author: str = ""
    license: str = ""
    open_source: bool = False
    cdl_version: str = CDL_VERSION
    provides: list[PortSpec] = Field(default_factory=list)
    uses: list[PortSpec] = Field(default_factory=list)
    type_defs: list[TypeDefInfo] = Field(default_factory=list)
    # Display hints such as displayName, category, iconRef
    representation: dict[str, str] = Field(default_factory=dict)
    documentation: str = ""
    platform_targets: list[str] = Field(default_factory=list)
    extensions: list[Extension] = Field(default_factory=list)

    @property
    def major(self) -> int:
        head = self.version.split(".", 1)[0]
        return int(head) if head.isdigit() else 0

    @property
    def ports(self) -> list[PortSpec]:
        return self.provides + self.uses

    def provided(self, name: str) -> Optional[PortSpec]:
        """Provides port by local or global name."""
        for port in self.provides:
            if name in (port.local_name, port.global_name):
                return port
        return None

    def used(self, name: str) -> Optional[PortSpec]:
        for port in self.uses:
            if port.local_name == name:
                return port
        return None

    def type_def(self, name: str) -> Optional[TypeDefInfo]:
        for type_def in self.type_defs:
            if type_def.name == name:
                return type_def
        return None
