"""paramString text: ``uses=instance.global`` bindings separated by ``;``."""

import re
from dataclasses import dataclass

from comodi.core.errors import ParamStringError

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_INSTANCE = re.compile(r"[A-Za-z0-9_][A-Za-z0-9_-]*")
_SPACE = re.compile(r"\s*")


@dataclass(frozen=True)
class Binding:
    uses_port: str
    instance: str
    target: str  # global name of the provides port


@dataclass(frozen=True)
class ParamString:
    bindings: tuple[Binding, ...] = ()

    def target_of(self, uses_port: str) -> Binding | None:
        for binding in self.bindings:
            if binding.uses_port == uses_port:
                return binding
        return None

    def __len__(self) -> int:
        return len(self.bindings)


class _Reader:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def skip_space(self) -> None:
        self.pos = _SPACE.match(self.text, self.pos).end()

    def at_end(self) -> bool:
        self.skip_space()
        return self.pos == len(self.text)

    def token(self, pattern: re.Pattern, what: str) -> str:
        self.skip_space()
        match = pattern.match(self.text, self.pos)
        if match is None:
            raise ParamStringError(f"expected {what}", self.pos)
        self.pos = match.end()
        return match.group()

    def literal(self, char: str) -> None:
        self.skip_space()
        if not self.text.startswith(char, self.pos):
            raise ParamStringError(f"expected '{char}'", self.pos)
        self.pos += 1


def parse_param_string(text: str) -> ParamString:
    """Parse a paramString; whitespace between tokens is ignored.

    Raises:
        ParamStringError: Syntax error or a repeated uses port, with the offset
    """
    reader = _Reader(text)
    bindings: list[Binding] = []
    seen: set[str] = set()
    if reader.at_end():
        return ParamString()

    while True:
        reader.skip_space()
        start = reader.pos
        uses_port = reader.token(_IDENT, "uses port name")
        if uses_port in seen:
            raise ParamStringError(f"uses port '{uses_port}' is bound twice", start)
        seen.add(uses_port)
        reader.literal("=")
        instance = reader.token(_INSTANCE, "instance id")
        reader.literal(".")
        target = reader.token(_IDENT, "provides port global name")
        bindings.append(Binding(uses_port, instance, target))
        if reader.at_end():
            break
        reader.literal(";")

    return ParamString(tuple(bindings))


def render_param_string(param_string: ParamString) -> str:
    return ";".join(f"{b.uses_port}={b.instance}.{b.target}" for b in param_string.bindings)
