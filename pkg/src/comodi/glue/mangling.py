"""Global naming convention for exported component symbols."""

import re

from comodi.core.errors import NameCollisionError
from comodi.utils.constants import GLOBAL_NAME_PREFIX

_SHELL_SAFE = re.compile(r"^[A-Za-z0-9_-]+$")
_IDENTIFIER = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


def is_shell_safe(name: str) -> bool:
    return bool(_SHELL_SAFE.match(name))


def component_prefix(component_name: str, major: int) -> str:
    """``cmdi_<component>_<major>``, the stem shared by a component's global names."""
    stem = re.sub(r"[-.]", "_", component_name).lower()
    return f"{GLOBAL_NAME_PREFIX}{stem}_{major}"


def mangle_name(component_name: str, major: int, local_name: str) -> str:
    """Translate a local identifier to the global naming convention.

    Args:
        component_name: Component name, ``[A-Za-z0-9_.-]``
        major: Major version
        local_name: Identifier inside the component

    Returns:
        ``cmdi_`` + lower-cased component name with ``-`` and ``.`` as ``_``,
        then ``_<major>_<local>``

    Raises:
        ValueError: Inputs are not shell-safe identifiers
    """
    if not re.match(r"^[A-Za-z0-9_.-]+$", component_name):
        raise ValueError(f"component name '{component_name}' is not shell-safe")
    if not _IDENTIFIER.match(local_name):
        raise ValueError(f"'{local_name}' is not an identifier")
    if major < 0:
        raise ValueError("major version must not be negative")
    return f"{component_prefix(component_name, major)}_{local_name}"


def link_entry_name(component_name: str, major: int) -> str:
    return f"{component_prefix(component_name, major)}_link"


def major_of(version: str) -> int:
    """Major number of a ``MAJOR.MINOR.PATCH`` version."""
    head = version.split(".", 1)[0]
    if not head.isdigit():
        raise ValueError(f"version '{version}' has no numeric major part")
    return int(head)


class ManglingRegistry:
    """Global names handed out so far, checked for case-folding collisions."""

    def __init__(self):
        self._owners: dict[str, tuple[str, int, str]] = {}

    def register(self, component_name: str, major: int, local_name: str) -> str:
        """Mangle and record a name.

        Raises:
            NameCollisionError: A different triple already folds to the same global name
        """
        global_name = mangle_name(component_name, major, local_name)
        key = global_name.lower()
        triple = (component_name, major, local_name)
        owner = self._owners.get(key)
        if owner is not None and owner != triple:
            raise NameCollisionError(
                f"{component_name}/{major}/{local_name} collides with {owner[0]}/{owner[1]}/{owner[2]} "
                f"as '{global_name}'"
            )
        self._owners[key] = triple
        return global_name

    def __contains__(self, global_name: str) -> bool:
        return global_name.lower() in self._owners

    def __len__(self) -> int:
        return len(self._owners)
