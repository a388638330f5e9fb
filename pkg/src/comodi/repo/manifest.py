"""Package manifest: which files a component package holds and their hashes."""

import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass
from enum import Enum
from typing import Sequence, Union

from pydantic import BaseModel, Field

from comodi.core.errors import ManifestError, PackageError, SchemaError
from comodi.utils.constants import MANIFEST_PATH
from comodi.utils.storage_helpers import sha256_hex
from comodi.utils.xml_helpers import expect_tag, format_bool, parse_bool, parse_xml, require_attr, to_xml_text

# name and version become directory names in the repository
_NAME = re.compile(r"^[A-Za-z0-9_-]+$")
_SEMVER = re.compile(r"^\d+\.\d+\.\d+$")


class FileRole(str, Enum):
    SOURCE = "source"
    CDF = "cdf"
    GLUE_SOURCE = "glueSource"
    WIRING_METADATA = "wiringMetadata"
    BINARY = "binary"
    RESOURCE = "resource"


class ManifestEntry(BaseModel):
    path: str
    role: FileRole
    sha256: str
    platform: str = ""


@dataclass(frozen=True)
class PackageFile:
    """A file to be packed, with its role."""

    path: str
    role: FileRole
    data: bytes
    platform: str = ""


class PackageManifest(BaseModel):
    name: str
    version: str
    language: str
    open_source: bool = False
    files: list[ManifestEntry] = Field(default_factory=list)

    @classmethod
    def from_files(
        cls,
        name: str,
        version: str,
        language: str,
        open_source: bool,
        files: Sequence[PackageFile],
    ) -> "PackageManifest":
        """Build a manifest with hashes computed from the file contents (sorted by path)."""
        entries = [
            ManifestEntry(path=f.path, role=f.role, sha256=sha256_hex(f.data), platform=f.platform)
            for f in sorted(files, key=lambda f: f.path)
        ]
        return cls(name=name, version=version, language=language, open_source=open_source, files=entries)

    def entries(self, role: FileRole) -> list[ManifestEntry]:
        return [entry for entry in self.files if entry.role == role]

    def entry(self, path: str) -> ManifestEntry | None:
        for entry in self.files:
            if entry.path == path:
                return entry
        return None

    def binary_for(self, platform: str) -> ManifestEntry | None:
        for entry in self.entries(FileRole.BINARY):
            if entry.platform == platform:
                return entry
        return None

    @property
    def cdf_path(self) -> str:
        return self.entries(FileRole.CDF)[0].path

    def check(self) -> None:
        """Enforce manifest invariants.

        Raises:
            ManifestError: A name that is not shell-safe or a version that is not
                semver, not exactly one CDF, source entries inconsistent with the
                open-source flag, unsafe or repeated paths, or a binary without
                a platform
        """
        if not _NAME.fullmatch(self.name):
            raise ManifestError(f"unsafe package name '{self.name}'")
        if not _SEMVER.fullmatch(self.version):
            raise ManifestError(f"unsafe package version '{self.version}'")
        cdfs = self.entries(FileRole.CDF)
        if len(cdfs) != 1:
            raise ManifestError(f"package must contain exactly one CDF, found {len(cdfs)}")
        sources = self.entries(FileRole.SOURCE)
        if self.open_source and not sources:
            raise ManifestError("open-source package contains no source files")
        if not self.open_source and sources:
            raise ManifestError(f"closed-source package contains source files: {', '.join(e.path for e in sources)}")

        paths = [entry.path for entry in self.files]
        if len(set(paths)) != len(paths):
            raise ManifestError("manifest lists a path twice")
        for path in paths:
            parts = path.split("/")
            if path == MANIFEST_PATH or path.startswith("/") or ".." in parts or "" in parts or "\\" in path:
                raise ManifestError(f"unsafe package path '{path}'")
        for entry in self.entries(FileRole.BINARY):
            if not entry.platform:
                raise ManifestError(f"binary {entry.path} has no platform tag")


def manifest_to_xml(manifest: PackageManifest) -> str:
    root = ET.Element(
        "manifest",
        {
            "name": manifest.name,
            "version": manifest.version,
            "language": manifest.language,
            "open-source": format_bool(manifest.open_source),
        },
    )
    for entry in manifest.files:
        attrs = {"path": entry.path, "role": entry.role.value, "sha256": entry.sha256}
        if entry.platform:
            attrs["platform"] = entry.platform
        ET.SubElement(root, "file", attrs)
    return to_xml_text(root)


def manifest_from_xml(text: Union[str, bytes]) -> PackageManifest:
    """Read a manifest document.

    Raises:
        PackageError: Document is malformed
    """
    try:
        root = parse_xml(text)
        expect_tag(root, "manifest", "/manifest")
        files = []
        for index, node in enumerate(root.iterfind("file")):
            path = f"/manifest/file[{index}]"
            role = require_attr(node, "role", path)
            try:
                file_role = FileRole(role)
            except ValueError:
                raise PackageError(f"{path}@role: unknown role '{role}'") from None
            files.append(
                ManifestEntry(
                    path=require_attr(node, "path", path),
                    role=file_role,
                    sha256=require_attr(node, "sha256", path),
                    platform=node.get("platform", ""),
                )
            )
        return PackageManifest(
            name=require_attr(root, "name", "/manifest"),
            version=require_attr(root, "version", "/manifest"),
            language=require_attr(root, "language", "/manifest"),
            open_source=parse_bool(root.get("open-source", "false"), "/manifest@open-source"),
            files=files,
        )
    except SchemaError as e:
        raise PackageError(f"invalid manifest: {e}") from e
