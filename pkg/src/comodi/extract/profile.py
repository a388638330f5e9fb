"""Language profiles: which grammar nonterminals carry interface information."""

import logging
from enum import Enum
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Optional, Union

from pydantic import BaseModel, Field

from comodi.automata.network import AutomatonNetwork, build_network
from comodi.core.errors import ExtractionError, SchemaError
from comodi.core.types import PassingMode
from comodi.grammar.ebnf import load_grammar
from comodi.grammar.model import Grammar
from comodi.utils.xml_helpers import expect_tag, parse_bool, parse_xml, require_attr

logger = logging.getLogger("comodi.extract")

PROFILE_SUFFIX = ".profile.xml"


class Role(str, Enum):
    FUNCTION_DEF = "functionDef"
    FUNCTION_DECL = "functionDecl"
    PARAM_DECL = "paramDecl"
    TYPE_DEF = "typeDef"
    CONST_DECL = "constDecl"
    VAR_DECL = "varDecl"


class MapEntry(BaseModel):
    """One extraction-map entry.

    ``returns`` is ``declared`` (return type slot, then local declarations,
    then implicit typing) or ``void``. ``item_type`` fixes the type of items
    that carry none, such as enumerators.
    """

    nonterminal: str
    role: Role
    returns: str = "declared"
    item_type: str = ""


class CommentConvention(BaseModel):
    open: str = ""
    close: str = ""
    doc_prefix: str
    directive_prefix: str


class LanguageProfile(BaseModel):
    language: str
    grammar: str
    extraction_map: list[MapEntry]
    comments: CommentConvention
    default_passing: PassingMode = PassingMode.BY_VALUE
    implicit_typing: bool = False
    slots: dict[str, list[str]] = Field(default_factory=dict)

    def entry_for(self, nonterminal: str) -> Optional[MapEntry]:
        for entry in self.extraction_map:
            if entry.nonterminal == nonterminal:
                return entry
        return None

    def labels_for(self, role: Role) -> set[str]:
        return {entry.nonterminal for entry in self.extraction_map if entry.role == role}

    def slot(self, name: str) -> list[str]:
        return self.slots.get(name, [])

    def load_grammar(self) -> Grammar:
        return load_grammar(self.grammar)

    def network(self) -> AutomatonNetwork:
        """Automaton network of the profile's grammar (built once per grammar)."""
        return _network_for(self.grammar)

    def missing_nonterminals(self, grammar: Grammar) -> list[str]:
        """Mapped or slot nonterminals the grammar does not define."""
        names = [entry.nonterminal for entry in self.extraction_map]
        for labels in self.slots.values():
            names.extend(labels)
        return [name for name in dict.fromkeys(names) if not grammar.defines(name)]


@lru_cache(maxsize=8)
def _network_for(grammar_name: str) -> AutomatonNetwork:
    return build_network(load_grammar(grammar_name))


def _enum_attr(enum_cls, node, name: str, path: str, default: Optional[str] = None):
    value = node.get(name, default) if default is not None else require_attr(node, name, path)
    try:
        return enum_cls(value)
    except ValueError:
        raise SchemaError(f"{path}@{name}", f"unknown value '{value}'") from None


def profile_from_xml(text: Union[str, bytes], base_dir: Optional[Path] = None) -> LanguageProfile:
    """Read a profile document.

    Raises:
        SchemaError: Document is malformed
        ExtractionError: Profile invariants are violated
    """
    root = parse_xml(text)
    expect_tag(root, "profile", "/profile")
    grammar = require_attr(root, "grammar", "/profile")
    if base_dir is not None and (base_dir / grammar).is_file():
        grammar = str(base_dir / grammar)

    comments = root.find("comments")
    if comments is None:
        raise SchemaError("/profile/comments", "missing element")

    extraction_map = [
        MapEntry(
            nonterminal=require_attr(node, "nonterminal", "/profile/extractionMap/map"),
            role=_enum_attr(Role, node, "role", "/profile/extractionMap/map"),
            returns=node.get("returns", "declared"),
            item_type=node.get("itemType", ""),
        )
        for node in root.iterfind("extractionMap/map")
    ]
    slots = {
        require_attr(node, "name", "/profile/slots/slot"): node.get("nonterminals", "").split()
        for node in root.iterfind("slots/slot")
    }

    profile = LanguageProfile(
        language=require_attr(root, "language", "/profile"),
        grammar=grammar,
        extraction_map=extraction_map,
        comments=CommentConvention(
            open=comments.get("open", ""),
            close=comments.get("close", ""),
            doc_prefix=require_attr(comments, "doc", "/profile/comments"),
            directive_prefix=require_attr(comments, "directive", "/profile/comments"),
        ),
        default_passing=_enum_attr(PassingMode, root, "passing", "/profile", PassingMode.BY_VALUE.value),
        implicit_typing=parse_bool(root.get("implicitTyping", "false"), "/profile@implicitTyping"),
        slots=slots,
    )
    if not profile.comments.directive_prefix:
        raise ExtractionError("profile directive prefix must not be empty")
    return profile


def load_profile(name_or_path: Union[str, Path]) -> LanguageProfile:
    """Load a profile file, or a shipped profile by name (``c_subset``, ``fortran77``).

    Raises:
        ExtractionError: Unknown profile, or a mapped nonterminal missing from the grammar
    """
    path = Path(name_or_path)
    if path.is_file():
        profile = profile_from_xml(path.read_bytes(), path.parent)
    else:
        stem = path.name.removesuffix(PROFILE_SUFFIX)
        shipped = resources.files("comodi.extract").joinpath("profiles", f"{stem}{PROFILE_SUFFIX}")
        if not shipped.is_file():
            raise ExtractionError(f"unknown language profile '{name_or_path}'")
        profile = profile_from_xml(shipped.read_bytes())

    missing = profile.missing_nonterminals(profile.load_grammar())
    if missing:
        raise ExtractionError(
            f"profile {profile.language} references nonterminals missing from its grammar: {', '.join(missing)}"
        )
    logger.debug(f"Loaded profile {profile.language} (grammar {profile.grammar})")
    return profile
