"""Exception hierarchy for COMODI."""

from typing import Iterable, Optional


class ComodiError(Exception):
    """Base exception for all toolchain operations."""

    pass


class EnvironmentProblem(ComodiError):
    """Failure caused by the host environment rather than by user input."""

    pass


# ============================================================================
# Grammar
# ============================================================================


class GrammarError(ComodiError):
    """Base exception for grammar reading."""

    pass


class GrammarSyntaxError(GrammarError):
    """EBNF text is not well-formed."""

    def __init__(self, message: str, line: int, column: int, origin: str = "<grammar>"):
        super().__init__(f"{origin}:{line}:{column}: {message}")
        self.line = line
        self.column = column
        self.origin = origin


class DuplicateRuleError(GrammarError):
    """A rule name is defined twice."""

    def __init__(self, name: str, line: int, column: int):
        super().__init__(f"duplicate rule '{name}' at {line}:{column}")
        self.name = name
        self.line = line
        self.column = column


class MissingSectionMarkerError(GrammarError):
    """Section directives are missing or misplaced."""

    pass


class GrammarRejectedError(GrammarError):
    """Grammar has validation errors and cannot be compiled into automata."""

    def __init__(self, diagnostics: list):
        codes = ", ".join(f"{d.code}({d.subject})" for d in diagnostics)
        super().__init__(f"grammar rejected: {codes}")
        self.diagnostics = diagnostics


# ============================================================================
# Automata engine
# ============================================================================


class LexicalError(ComodiError):
    """No lexical automaton matches at the current position."""

    def __init__(self, line: int, column: int, char: str):
        super().__init__(f"lexical error at {line}:{column}: unexpected {char!r}")
        self.line = line
        self.column = column
        self.char = char


class ParseError(ComodiError):
    """Token sequence is not in the grammar's language."""

    def __init__(self, position: int, token, expected: Iterable[str]):
        self.position = position
        self.token = token
        self.expected = sorted(set(expected))
        where = f"{token.line}:{token.column}" if token is not None else "?"
        found = repr(token.text) if token is not None and token.text else "end of input"
        expects = ", ".join(self.expected) or "nothing"
        super().__init__(f"parse error at {where} (token {position}): found {found}, expected {expects}")


class FuelExhaustedError(ComodiError):
    """Recognizer exceeded its step budget."""

    pass


# ============================================================================
# Extraction and descriptors
# ============================================================================


class ExtractionError(ComodiError):
    """Interface extraction failed."""

    pass


class SchemaError(ComodiError):
    """XML document violates its schema."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


class InterfaceSchemaError(SchemaError):
    """Interface model XML is malformed."""

    pass


class CdfSchemaError(SchemaError):
    """Component descriptor XML is malformed."""

    pass


class AnswerError(ComodiError):
    """Author answers reference something the interface does not have."""

    pass


class DefaultLiteralError(ComodiError):
    """Default literal does not parse as the declared type."""

    pass


# ============================================================================
# Glue
# ============================================================================


class NameCollisionError(ComodiError):
    """Two identifiers mangle to the same global name."""

    pass


class ParamStringError(ComodiError):
    """paramString text is malformed."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"paramString error at offset {offset}: {message}")
        self.offset = offset


class UnsupportedRemoteType(ComodiError):
    """Type cannot be laid out on the wire."""

    pass


# ============================================================================
# Packages and repository
# ============================================================================


class PackageError(ComodiError):
    """Archive or manifest is unusable."""

    pass


class ManifestError(PackageError):
    """Manifest invariants are violated."""

    pass


class MissingFileError(PackageError):
    """A file listed in the manifest is absent."""

    def __init__(self, path: str):
        super().__init__(f"missing file: {path}")
        self.path = path


class HashMismatchError(PackageError):
    """A file's content does not match its recorded hash."""

    def __init__(self, path: str):
        super().__init__(f"hash mismatch: {path}")
        self.path = path


class DuplicateVersionError(ComodiError):
    """(name, version) is already registered."""

    pass


class NotFoundError(ComodiError):
    """Requested package is not registered."""

    pass


class DigestMismatchError(ComodiError):
    """Downloaded archive does not match the index digest."""

    pass


class RepoTransportError(EnvironmentProblem):
    """Repository or compile endpoint cannot be reached."""

    pass


class ConfigurationError(EnvironmentProblem):
    """Required configuration is missing."""

    pass


class CompilerNotFoundError(EnvironmentProblem):
    """Configured compiler executable does not exist."""

    pass


# ============================================================================
# Wiring framework
# ============================================================================


class ProjectSchemaError(SchemaError):
    """Project description XML is malformed."""

    pass


class ProjectValidationError(ComodiError):
    """Project has validation errors and cannot be bound."""

    def __init__(self, diagnostics: list):
        super().__init__("project has errors: " + "; ".join(d.message for d in diagnostics))
        self.diagnostics = diagnostics


class MissingMockError(ComodiError):
    """Mock backend has no implementation for a provides port."""

    pass


class MockDefinitionError(ComodiError):
    """Mock expression is malformed or references unknown names."""

    pass


class MissingBinaryError(EnvironmentProblem):
    """Package has no binary for the requested platform."""

    pass


class RuntimeFault(ComodiError):
    """Business call failed during execution."""

    def __init__(self, instance: str, port: str, message: str):
        super().__init__(f"{instance}.{port}: {message}")
        self.instance = instance
        self.port = port


class CallDepthExceeded(RuntimeFault):
    """Cross-component recursion exceeded the configured depth."""

    def __init__(self, instance: str, port: str, limit: int, calls: Optional[int] = None):
        super().__init__(instance, port, f"call depth limit {limit} exceeded")
        self.limit = limit
        self.calls = calls
