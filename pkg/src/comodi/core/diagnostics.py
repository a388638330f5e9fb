"""Diagnostic values returned by validators."""

import xml.etree.ElementTree as ET
from enum import Enum

from pydantic import BaseModel

from comodi.utils.xml_helpers import to_xml_text


class Severity(str, Enum):
    """Diagnostic severity."""

    ERROR = "error"
    WARNING = "warning"


class Diagnostic(BaseModel):
    """One validation finding."""

    severity: Severity
    code: str
    message: str
    subject: str = ""

    @classmethod
    def error(cls, code: str, message: str, subject: str = "") -> "Diagnostic":
        return cls(severity=Severity.ERROR, code=code, message=message, subject=subject)

    @classmethod
    def warning(cls, code: str, message: str, subject: str = "") -> "Diagnostic":
        return cls(severity=Severity.WARNING, code=code, message=message, subject=subject)

    @property
    def is_error(self) -> bool:
        return self.severity == Severity.ERROR


def has_errors(diagnostics: list[Diagnostic]) -> bool:
    """Check whether any diagnostic is an error."""
    return any(d.is_error for d in diagnostics)


def errors_only(diagnostics: list[Diagnostic]) -> list[Diagnostic]:
    """Filter out warnings."""
    return [d for d in diagnostics if d.is_error]


def diagnostics_to_xml(diagnostics: list[Diagnostic], subject: str = "") -> str:
    """Render findings as ``<diagnostics><diagnostic severity code subject>message</diagnostic>``."""
    root = ET.Element("diagnostics", {"subject": subject} if subject else {})
    for d in diagnostics:
        node = ET.SubElement(root, "diagnostic", {"severity": d.severity.value, "code": d.code})
        if d.subject:
            node.set("subject", d.subject)
        node.text = d.message
    return to_xml_text(root)
