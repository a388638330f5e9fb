"""Drafting descriptors from an interface model and the author's answers."""

import logging
import re
from typing import Optional, Union

from pydantic import BaseModel, Field, field_validator

from comodi.cdl.model import ComponentDescriptor, ParamSpec, PortKind, PortSpec
from comodi.core.errors import AnswerError, SchemaError
from comodi.core.types import parse_literal
from comodi.extract.model import FunctionSig, InterfaceModel
from comodi.glue.mangling import ManglingRegistry, is_shell_safe, major_of
from comodi.utils.xml_helpers import expect_tag, parse_bool, parse_xml, require_attr

logger = logging.getLogger("comodi.cdl")

_SEMVER = re.compile(r"^\d+\.\d+\.\d+$")


class DescriptorMeta(BaseModel):
    name: str
    version: str
    author: str = ""
    license: str = ""
    open_source: bool = False

    @field_validator("name")
    @classmethod
    def _shell_safe(cls, value: str) -> str:
        if not is_shell_safe(value):
            raise ValueError(f"component name '{value}' must match [A-Za-z0-9_-]+")
        return value

    @field_validator("version")
    @classmethod
    def _semver(cls, value: str) -> str:
        if not _SEMVER.match(value):
            raise ValueError(f"version '{value}' is not MAJOR.MINOR.PATCH")
        return value


class AuthorAnswers(BaseModel):
    """What the author confirms and adds on top of the extracted interface."""

    confirmed_provides: list[str] = Field(default_factory=list)
    confirmed_uses: list[str] = Field(default_factory=list)
    doc_overrides: dict[str, str] = Field(default_factory=dict)
    param_docs: dict[tuple[str, str], str] = Field(default_factory=dict)
    default_overrides: dict[tuple[str, str], str] = Field(default_factory=dict)
    representation: dict[str, str] = Field(default_factory=dict)
    documentation: str = ""
    platform_targets: list[str] = Field(default_factory=list)
    meta: Optional[DescriptorMeta] = None


def load_answers(text: Union[str, bytes]) -> AuthorAnswers:
    """Read an ``answers.xml`` document.

    Raises:
        SchemaError: Document is malformed
    """
    root = parse_xml(text)
    expect_tag(root, "answers", "/answers")
    answers = AuthorAnswers()

    for index, node in enumerate(root):
        path = f"/answers/{node.tag}[{index}]"
        if node.tag == "provides":
            answers.confirmed_provides.append(require_attr(node, "port", path))
        elif node.tag == "uses":
            answers.confirmed_uses.append(require_attr(node, "port", path))
        elif node.tag == "doc":
            port = require_attr(node, "port", path)
            text_value = " ".join((node.text or "").split())
            if node.get("param") is not None:
                answers.param_docs[(port, node.get("param"))] = text_value
            else:
                answers.doc_overrides[port] = text_value
        elif node.tag == "default":
            key = (require_attr(node, "port", path), require_attr(node, "param", path))
            answers.default_overrides[key] = require_attr(node, "value", path)
        elif node.tag == "representation":
            answers.representation[require_attr(node, "key", path)] = require_attr(node, "value", path)
        elif node.tag == "documentation":
            answers.documentation = (node.text or "").strip()
        elif node.tag == "platform":
            answers.platform_targets.append(require_attr(node, "name", path))
        elif node.tag == "meta":
            answers.meta = DescriptorMeta(
                name=require_attr(node, "name", path),
                version=require_attr(node, "version", path),
                author=node.get("author", ""),
                license=node.get("license", ""),
                open_source=parse_bool(node.get("open-source", "false"), f"{path}@open-source"),
            )
        else:
            raise SchemaError(path, f"unknown element <{node.tag}>")
    return answers


def _port_from(
    sig: FunctionSig,
    kind: PortKind,
    answers: AuthorAnswers,
    global_name: str,
) -> PortSpec:
    params = []
    for param in sig.params:
        default = answers.default_overrides.get((sig.name, param.name))
        if default is not None:
            # Raises DefaultLiteralError for literals of the wrong type
            parse_literal(default, param.type_name)
        params.append(
            ParamSpec(
                name=param.name,
                type_name=param.type_name,
                passing=param.passing,
                default=default,
                doc=answers.param_docs.get((sig.name, param.name)),
            )
        )
    return PortSpec(
        local_name=sig.name,
        global_name=global_name,
        kind=kind,
        return_type=sig.return_type,
        params=params,
        doc=answers.doc_overrides.get(sig.name, sig.doc),
        remote=sig.remote,
    )


def _check_references(model: InterfaceModel, answers: AuthorAnswers) -> None:
    confirmed = set(answers.confirmed_provides) | set(answers.confirmed_uses)
    for name in answers.confirmed_provides:
        sig = model.function(name)
        if sig is None:
            raise AnswerError(f"provides port '{name}' is not a function of {model.source}")
        if not sig.defined:
            raise AnswerError(f"provides port '{name}' is declared but not defined in {model.source}")
    for name in answers.confirmed_uses:
        sig = model.function(name)
        if sig is None:
            raise AnswerError(f"uses port '{name}' is not a function of {model.source}")
        if sig.defined:
            raise AnswerError(f"uses port '{name}' is defined in {model.source}")
    for port in answers.doc_overrides:
        if port not in confirmed:
            raise AnswerError(f"documentation given for unconfirmed port '{port}'")
    for port, param in list(answers.default_overrides) + list(answers.param_docs):
        sig = model.function(port)
        if port not in confirmed or sig is None:
            raise AnswerError(f"answer given for unconfirmed port '{port}'")
        if param not in {p.name for p in sig.params}:
            raise AnswerError(f"port '{port}' has no parameter '{param}'")


def draft_descriptor(
    model: InterfaceModel,
    answers: AuthorAnswers,
    meta: DescriptorMeta,
) -> ComponentDescriptor:
    """Turn confirmed functions into ports.

    Confirmed defined functions become provides ports and confirmed undefined
    ones uses ports, in source order. Answer docs override extracted doc
    comments.

    Raises:
        AnswerError: Answers reference unknown functions, ports or parameters
        DefaultLiteralError: A default does not parse as its parameter type
        NameCollisionError: Two ports fold to the same global name
    """
    _check_references(model, answers)
    registry = ManglingRegistry()
    major = major_of(meta.version)

    provides, uses = [], []
    for sig in model.functions:
        if sig.name in answers.confirmed_provides:
            global_name = registry.register(meta.name, major, sig.name)
            provides.append(_port_from(sig, PortKind.PROVIDES, answers, global_name))
        elif sig.name in answers.confirmed_uses:
            global_name = registry.register(meta.name, major, sig.name)
            uses.append(_port_from(sig, PortKind.USES, answers, global_name))

    descriptor = ComponentDescriptor(
        name=meta.name,
        version=meta.version,
        language=model.language,
        author=meta.author,
        license=meta.license,
        open_source=meta.open_source,
        provides=provides,
        uses=uses,
        type_defs=list(model.type_defs),
        representation=dict(answers.representation),
        documentation=answers.documentation,
        platform_targets=list(answers.platform_targets),
    )
    logger.info(f"Drafted {meta.name} {meta.version}: {len(provides)} provides, {len(uses)} uses ports")
    return descriptor
