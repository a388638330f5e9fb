"""Interface extraction: walk a parse tree guided by a language profile."""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

from comodi.automata.engine import ParseTree, Token
from comodi.automata.lexer import lex
from comodi.automata.recognizer import recognize
from comodi.core.errors import ExtractionError
from comodi.core.types import PassingMode, base_type, is_indirect, is_primitive
from comodi.extract.model import (
    DirectiveInfo,
    FieldInfo,
    FunctionSig,
    InterfaceModel,
    ParamInfo,
    TypeDefInfo,
    ValueDecl,
)
from comodi.extract.profile import LanguageProfile, MapEntry, Role

logger = logging.getLogger("comodi.extract")

_FUNCTION_ROLES = (Role.FUNCTION_DEF, Role.FUNCTION_DECL)
# Leaves that decorate a type spelling without naming it
_TYPE_NOISE = {"struct", "*"}


def implicit_type(name: str) -> str:
    """Fortran implicit typing: names starting with I to N are INTEGER, others REAL."""
    return "INTEGER" if name[:1].upper() in "IJKLMN" else "REAL"


@dataclass
class _CommentText:
    kind: str  # "doc", "directive" or "other"
    body: str


class _Extraction:
    """State of one extraction run over a parse tree."""

    def __init__(self, profile: LanguageProfile, text: str, tokens: list[Token], comments: list[Token]):
        self.profile = profile
        self.text = text
        self.tokens = tokens
        self.comments = comments
        self.role_labels = {entry.nonterminal for entry in profile.extraction_map}
        self.functions: dict[str, FunctionSig] = {}
        self.type_defs: dict[str, TypeDefInfo] = {}
        self.constants: dict[str, ValueDecl] = {}
        self.variables: dict[str, ValueDecl] = {}

    # ------------------------------------------------------------------
    # Tree helpers

    def labels(self, slot: str) -> set[str]:
        return set(self.profile.slot(slot))

    def find(self, node: ParseTree, slot: str) -> list[ParseTree]:
        """Slot nodes under ``node`` in preorder, not entering nested roles, bodies or matches."""
        wanted = self.labels(slot)
        stop = self.role_labels | self.labels("body")
        found: list[ParseTree] = []
        pending = list(reversed(node.children))
        while pending:
            current = pending.pop()
            if current.label in wanted:
                found.append(current)
            elif current.label not in stop:
                pending.extend(reversed(current.children))
        return found

    def first(self, node: ParseTree, slot: str) -> Optional[ParseTree]:
        """First slot node, preferring labels in the order the slot lists them."""
        found = self.find(node, slot)
        for label in self.profile.slot(slot):
            for candidate in found:
                if candidate.label == label:
                    return candidate
        return None

    def direct(self, node: ParseTree, slot: str) -> list[ParseTree]:
        wanted = self.labels(slot)
        return [child for child in node.children if child.label in wanted]

    def words(self, node: ParseTree) -> str:
        return " ".join(token.text for token in node.leaves())

    def type_words(self, node: ParseTree) -> str:
        return " ".join(
            token.text for token in node.leaves() if token.text not in _TYPE_NOISE and token.kind != "number"
        )

    def char_span(self, node: ParseTree) -> tuple[int, int]:
        start, end = node.span
        return self.tokens[start].offset, self.tokens[end - 1].end_offset

    def source_slice(self, node: ParseTree) -> str:
        start, end = self.char_span(node)
        return self.text[start:end]

    def declarator_type(self, base: str, declarator: ParseTree) -> str:
        pointers = len(self.find(declarator, "pointer"))
        array = "[]" if self.find(declarator, "array") else ""
        return base + "*" * pointers + array

    def spelled_type(self, node: ParseTree) -> Optional[str]:
        """Type spelled by the first type slot under ``node``, without declarator parts."""
        type_nodes = self.find(node, "type")
        return self.type_words(type_nodes[0]) if type_nodes else None

    # ------------------------------------------------------------------
    # Comments

    def classify(self, comment: Token) -> _CommentText:
        conv = self.profile.comments
        body = comment.text.lstrip("\r\n")
        if conv.open and body.startswith(conv.open):
            body = body[len(conv.open) :]
        body = body.lstrip(" \t")
        for kind, prefix in (("doc", conv.doc_prefix), ("directive", conv.directive_prefix)):
            if prefix and body.startswith(prefix):
                body = body[len(prefix) :].rstrip()
                if conv.close and body.endswith(conv.close):
                    body = body[: -len(conv.close)]
                return _CommentText(kind, " ".join(body.split()))
        return _CommentText("other", "")

    def leading_comments(self, offset: int) -> tuple[Optional[str], list[str]]:
        """Doc text and directives of the comments directly before ``offset``."""
        docs: list[str] = []
        directives: list[str] = []
        cursor = offset
        for comment in reversed([c for c in self.comments if c.end_offset <= offset]):
            if self.text[comment.end_offset : cursor].strip():
                break
            classified = self.classify(comment)
            if classified.kind == "doc":
                docs.append(classified.body)
            elif classified.kind == "directive":
                directives.append(classified.body)
            else:
                break
            cursor = comment.offset
        docs.reverse()
        directives.reverse()
        doc = " ".join(part for part in docs if part) or None
        return doc, directives

    def all_directives(self) -> list[DirectiveInfo]:
        found = []
        for comment in self.comments:
            classified = self.classify(comment)
            if classified.kind != "directive":
                continue
            line, column = comment.line, comment.column
            if comment.text.startswith("\n"):
                line, column = line + 1, 1
            found.append(DirectiveInfo(text=classified.body, line=line, column=column))
        return found

    # ------------------------------------------------------------------
    # Walk

    def visit(self, node: ParseTree, locals_: dict[str, str]) -> None:
        entry = self.profile.entry_for(node.label)
        if entry is None or entry.role == Role.PARAM_DECL:
            for child in node.children:
                self.visit(child, locals_)
            return

        if entry.role in _FUNCTION_ROLES:
            unit_locals = {**locals_, **self.collect_locals(node)}
            self.handle_function(node, entry, unit_locals)
            body = self.labels("body")
            for child in node.children:
                if child.label not in body:
                    self.visit(child, unit_locals)
        elif entry.role == Role.TYPE_DEF:
            self.handle_type_def(node)
        elif entry.role == Role.CONST_DECL:
            self.handle_values(node, entry, locals_, self.constants, "constant")
        elif entry.role == Role.VAR_DECL:
            self.handle_values(node, entry, locals_, self.variables, "variable")

    def collect_locals(self, unit: ParseTree) -> dict[str, str]:
        """Declared types of a unit's local names, keyed by upper-case name."""
        if not self.profile.slot("local"):
            return {}
        declared: dict[str, str] = {}
        arrays: set[str] = set()
        local_labels = self.labels("local")
        for node in unit.walk():
            if node.is_leaf or node is not unit and node.label in self.role_labels:
                continue
            type_nodes = self.direct(node, "type")
            for entity in (child for child in node.children if child.label in local_labels):
                name_node = self.first(entity, "localName")
                if name_node is None:
                    continue
                key = self.words(name_node).upper()
                if self.find(entity, "array"):
                    arrays.add(key)
                if type_nodes:
                    declared[key] = self.type_words(type_nodes[0])
        for key in arrays:
            if key not in declared and self.profile.implicit_typing:
                declared[key] = implicit_type(key)
            if key in declared and not declared[key].endswith("[]"):
                declared[key] += "[]"
        return declared

    def resolve_name_type(self, name: str, locals_: dict[str, str]) -> Optional[str]:
        key = name.upper()
        if key in locals_:
            return locals_[key]
        if self.profile.implicit_typing:
            return implicit_type(name)
        return None

    def handle_function(self, node: ParseTree, entry: MapEntry, locals_: dict[str, str]) -> None:
        name_nodes = self.find(node, "functionName")
        if not name_nodes:
            raise ExtractionError(f"{node.label} without a function name at token {node.span[0]}")

        defined = entry.role == Role.FUNCTION_DEF
        params = self.params(node, locals_) if defined or len(name_nodes) == 1 else []
        doc, directives = self.leading_comments(self.char_span(node)[0])

        for name_node in name_nodes:
            name = self.words(name_node)
            sig = FunctionSig(
                name=name,
                return_type=self.return_type(node, entry, name, locals_),
                params=params,
                defined=defined,
                doc=doc,
                directives=directives,
                span=self.char_span(node if len(name_nodes) == 1 else name_node),
            )
            self.add_function(sig)

    def return_type(self, node: ParseTree, entry: MapEntry, name: str, locals_: dict[str, str]) -> str:
        if entry.returns == "void":
            return "void"
        return_node = self.first(node, "returnType")
        if return_node is not None:
            base = self.spelled_type(return_node) or self.type_words(return_node)
            return self.declarator_type(base, return_node)
        resolved = self.resolve_name_type(name, locals_)
        if resolved is None:
            raise ExtractionError(f"cannot determine the return type of '{name}'")
        return resolved

    def params(self, node: ParseTree, locals_: dict[str, str]) -> list[ParamInfo]:
        param_labels = self.profile.labels_for(Role.PARAM_DECL)
        stop = (self.role_labels - param_labels) | self.labels("body")
        declarations = [
            current
            for current in _preorder_until(node, stop)
            if current.label in param_labels and current is not node
        ]

        params: list[ParamInfo] = []
        for position, declaration in enumerate(declarations):
            name_node = self.first(declaration, "paramName")
            name = self.words(name_node) if name_node is not None else f"arg{position}"
            spelled = self.spelled_type(declaration)
            if spelled is not None:
                type_name = self.declarator_type(spelled, declaration)
            else:
                resolved = self.resolve_name_type(name, locals_)
                if resolved is None:
                    raise ExtractionError(f"cannot determine the type of parameter '{name}'")
                type_name = resolved
            by_reference = self.profile.default_passing == PassingMode.BY_REFERENCE or is_indirect(type_name)
            params.append(
                ParamInfo(
                    name=name,
                    type_name=type_name,
                    passing=PassingMode.BY_REFERENCE if by_reference else PassingMode.BY_VALUE,
                    position=position,
                )
            )

        names = [param.name for param in params]
        duplicates = sorted({n for n in names if names.count(n) > 1})
        if duplicates:
            raise ExtractionError(f"duplicate parameter names: {', '.join(duplicates)}")
        return params

    def add_function(self, sig: FunctionSig) -> None:
        existing = self.functions.get(sig.name)
        if existing is None:
            self.functions[sig.name] = sig
            return
        if existing.defined and sig.defined:
            raise ExtractionError(f"function '{sig.name}' is defined twice")

        directives = list(dict.fromkeys(existing.directives + sig.directives))
        if sig.defined:
            merged = sig.model_copy(update={"doc": sig.doc or existing.doc, "directives": directives})
        else:
            merged = existing.model_copy(update={"doc": existing.doc or sig.doc, "directives": directives})
        self.functions[sig.name] = merged

    def handle_type_def(self, node: ParseTree) -> None:
        name_node = self.first(node, "typeName")
        if name_node is None:
            logger.warning(f"Skipping anonymous aggregate at token {node.span[0]}")
            return
        name = self.words(name_node)
        if name in self.type_defs:
            raise ExtractionError(f"type '{name}' is defined twice")

        fields: list[FieldInfo] = []
        field_labels = self.labels("field")
        for holder in node.walk():
            type_nodes = self.direct(holder, "type")
            if not type_nodes:
                continue
            base = self.type_words(type_nodes[0])
            for declarator in (child for child in holder.children if child.label in field_labels):
                field_name = self.first(declarator, "fieldName")
                if field_name is not None:
                    fields.append(
                        FieldInfo(name=self.words(field_name), type_name=self.declarator_type(base, declarator))
                    )

        field_names = [f.name for f in fields]
        if len(set(field_names)) != len(field_names):
            raise ExtractionError(f"type '{name}' has duplicate field names")
        self.type_defs[name] = TypeDefInfo(name=name, fields=fields)

    def handle_values(
        self,
        node: ParseTree,
        entry: MapEntry,
        locals_: dict[str, str],
        target: dict[str, ValueDecl],
        category: str,
    ) -> None:
        item_labels = self.labels("item")
        type_nodes = [n for n in _preorder_until(node, item_labels) if n.label in self.labels("type")]
        spelled = self.type_words(type_nodes[0]) if type_nodes else None
        counter = 0

        for item in self.find(node, "item"):
            name_node = self.first(item, "itemName")
            if name_node is None:
                continue
            name = self.words(name_node)
            value_node = self.first(item, "value")
            literal = self.source_slice(value_node) if value_node is not None else ""

            if entry.item_type:
                type_name = entry.item_type
                if literal:
                    counter = _int_or(literal, counter)
                else:
                    literal = str(counter)
                counter += 1
            elif spelled is not None:
                type_name = self.declarator_type(spelled, item)
            else:
                resolved = self.resolve_name_type(name, locals_)
                if resolved is None:
                    raise ExtractionError(f"cannot determine the type of {category} '{name}'")
                type_name = resolved

            decl = ValueDecl(name=name, type_name=type_name, literal=literal)
            existing = target.get(name)
            if existing is None:
                target[name] = decl
            elif category == "variable":
                if not existing.literal and literal:
                    target[name] = decl
            else:
                raise ExtractionError(f"{category} '{name}' is declared twice")

    # ------------------------------------------------------------------

    def unresolved(self) -> list[str]:
        names: list[str] = []
        for sig in self.functions.values():
            names.append(sig.return_type)
            names.extend(param.type_name for param in sig.params)
        for type_def in self.type_defs.values():
            names.extend(f.type_name for f in type_def.fields)
        bases = (base_type(name) for name in names)
        return list(dict.fromkeys(b for b in bases if not is_primitive(b) and b not in self.type_defs))


def _preorder_until(node: ParseTree, stop: Iterable[str]) -> list[ParseTree]:
    """Preorder nodes under ``node`` (itself included), not entering ``stop`` labels."""
    stop = set(stop)
    ordered: list[ParseTree] = []
    pending = [node]
    while pending:
        current = pending.pop()
        ordered.append(current)
        if current is node or current.label not in stop:
            pending.extend(reversed(current.children))
    return ordered


def _int_or(literal: str, fallback: int) -> int:
    try:
        return int(literal.strip(), 0)
    except ValueError:
        return fallback


@dataclass
class ExtractionResult:
    model: InterfaceModel
    tree: ParseTree
    tokens: list[Token] = field(default_factory=list)


def extract_with_tree(profile: LanguageProfile, source_text: str, origin: str = "<source>") -> ExtractionResult:
    """Extract the interface and keep the parse tree and tokens it came from.

    Raises:
        LexicalError: Source does not tokenize
        ParseError: Source does not parse under the profile's grammar
        ExtractionError: Tree contents contradict the interface model invariants
    """
    net = profile.network()
    lexed = lex(net, source_text)
    tree = recognize(net, lexed.tokens)

    run = _Extraction(profile, source_text, lexed.tokens, lexed.comments)
    run.visit(tree, {})

    model = InterfaceModel(
        source=Path(origin).name,
        language=profile.language,
        functions=list(run.functions.values()),
        type_defs=list(run.type_defs.values()),
        constants=list(run.constants.values()),
        variables=list(run.variables.values()),
        directives=run.all_directives(),
        unresolved=run.unresolved(),
    )
    logger.info(
        f"Extracted {origin}: {len(model.functions)} functions, {len(model.type_defs)} types, "
        f"{len(model.constants)} constants, {len(model.variables)} variables"
    )
    return ExtractionResult(model=model, tree=tree, tokens=lexed.tokens)


def extract_interface(profile: LanguageProfile, source_text: str, origin: str = "<source>") -> InterfaceModel:
    """Extract the interface model of one source text."""
    return extract_with_tree(profile, source_text, origin).model


def extract_file(profile: LanguageProfile, path: Path) -> InterfaceModel:
    """Extract the interface of a source file; the file is only read."""
    return extract_interface(profile, path.read_text(encoding="utf-8"), str(path))
