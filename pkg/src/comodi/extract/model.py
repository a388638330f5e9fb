"""Interface model extracted from one source file."""

from typing import Optional

from pydantic import BaseModel, Field

from comodi.core.types import PassingMode, base_type, is_primitive


class ParamInfo(BaseModel):
    name: str
    type_name: str
    passing: PassingMode = PassingMode.BY_VALUE
    position: int = 0


class FunctionSig(BaseModel):
    """Signature of one function or procedure."""

    name: str
    return_type: str = "void"
    params: list[ParamInfo] = Field(default_factory=list)
    defined: bool = False
    doc: Optional[str] = None
    directives: list[str] = Field(default_factory=list)
    # Character offsets [start, end) of the declaration in the source text
    span: tuple[int, int] = (0, 0)

    @property
    def remote(self) -> bool:
        return any(d.split()[0].lower() == "remote" for d in self.directives if d.split())

    def signature_key(self) -> tuple:
        """Name, return type, defined flag and parameter list, ignoring docs and spans."""
        return (
            self.name,
            self.return_type,
            self.defined,
            tuple((p.name, p.type_name, p.passing, p.position) for p in self.params),
        )


class FieldInfo(BaseModel):
    name: str
    type_name: str


class TypeDefInfo(BaseModel):
    """Aggregate type decomposed into ordered fields."""

    name: str
    fields: list[FieldInfo]

    def field_names(self) -> list[str]:
        return [f.name for f in self.fields]


class ValueDecl(BaseModel):
    """Constant or variable declaration."""

    name: str
    type_name: str
    literal: str = ""


class DirectiveInfo(BaseModel):
    text: str
    line: int
    column: int


class InterfaceModel(BaseModel):
    source: str
    language: str
    functions: list[FunctionSig] = Field(default_factory=list)
    type_defs: list[TypeDefInfo] = Field(default_factory=list)
    constants: list[ValueDecl] = Field(default_factory=list)
    variables: list[ValueDecl] = Field(default_factory=list)
    directives: list[DirectiveInfo] = Field(default_factory=list)
    unresolved: list[str] = Field(default_factory=list)

    def function(self, name: str) -> Optional[FunctionSig]:
        for sig in self.functions:
            if sig.name == name:
                return sig
        return None

    def type_def(self, name: str) -> Optional[TypeDefInfo]:
        for type_def in self.type_defs:
            if type_def.name == name:
                return type_def
        return None

    def is_resolved(self, type_name: str) -> bool:
        """Check whether a type is primitive or one of the model's aggregates."""
        return is_primitive(type_name) or self.type_def(base_type(type_name)) is not None


def detect_uses_candidates(model: InterfaceModel) -> list[FunctionSig]:
    """Functions declared but not defined in the file, in source order."""
    return [sig for sig in model.functions if not sig.defined]
