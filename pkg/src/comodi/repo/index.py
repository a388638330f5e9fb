"""Repository index and archive store on disk."""

import logging
import xml.etree.ElementTree as ET
from contextlib import contextmanager
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterator, Optional, Union

from pydantic import BaseModel

from comodi.core.errors import DuplicateVersionError, NotFoundError, PackageError, SchemaError
from comodi.repo.archive import archive_extension, archive_format, unpack_verify
from comodi.repo.manifest import manifest_to_xml
from comodi.utils.constants import INDEX_FILE, PACKAGES_SUBDIR
from comodi.utils.storage_helpers import (
    CorruptedFileError,
    atomic_write_bytes,
    atomic_write_text,
    file_lock,
    safe_xml_load,
    sha256_hex,
)
from comodi.utils.xml_helpers import expect_tag, parse_xml, require_attr, to_xml_text

logger = logging.getLogger("comodi.repo")


class IndexEntry(BaseModel):
    name: str
    version: str
    digest: str  # sha256 of the archive bytes
    manifest_digest: str
    locator: str  # archive path relative to the repository directory
    registered_at: datetime

    @property
    def key(self) -> tuple[str, str]:
        return (self.name, self.version)


class Receipt(BaseModel):
    name: str
    version: str
    digest: str
    registered_at: datetime


def index_to_xml(entries: list[IndexEntry]) -> str:
    root = ET.Element("index")
    for entry in sorted(entries, key=lambda e: e.key):
        ET.SubElement(
            root,
            "package",
            {
                "name": entry.name,
                "version": entry.version,
                "digest": entry.digest,
                "manifest-digest": entry.manifest_digest,
                "archive": entry.locator,
                "registered": entry.registered_at.isoformat(),
            },
        )
    return to_xml_text(root)


def _entries_from_root(root: ET.Element) -> list[IndexEntry]:
    expect_tag(root, "index", "/index")
    entries = []
    for position, node in enumerate(root.iterfind("package")):
        path = f"/index/package[{position}]"
        entries.append(
            IndexEntry(
                name=require_attr(node, "name", path),
                version=require_attr(node, "version", path),
                digest=require_attr(node, "digest", path),
                manifest_digest=require_attr(node, "manifest-digest", path),
                locator=require_attr(node, "archive", path),
                registered_at=datetime.fromisoformat(require_attr(node, "registered", path)),
            )
        )
    return entries


def index_from_xml(text: Union[str, bytes]) -> list[IndexEntry]:
    return _entries_from_root(parse_xml(text))


def receipt_to_xml(receipt: Receipt) -> str:
    root = ET.Element(
        "receipt",
        {
            "name": receipt.name,
            "version": receipt.version,
            "digest": receipt.digest,
            "registered": receipt.registered_at.isoformat(),
        },
    )
    return to_xml_text(root)


def receipt_from_xml(text: Union[str, bytes]) -> Receipt:
    root = parse_xml(text)
    expect_tag(root, "receipt", "/receipt")
    return Receipt(
        name=require_attr(root, "name", "/receipt"),
        version=require_attr(root, "version", "/receipt"),
        digest=require_attr(root, "digest", "/receipt"),
        registered_at=datetime.fromisoformat(require_attr(root, "registered", "/receipt")),
    )


class RepoIndex:
    """Archives plus an XML index mapping (name, version) to them.

    Registration is serialized through a lock file; entries are never
    modified once written.
    """

    def __init__(self, repo_dir: Path):
        self.repo_dir = repo_dir
        self.index_file = repo_dir / INDEX_FILE
        self._lock_file = repo_dir / ".index.lock"
        self.repo_dir.mkdir(parents=True, exist_ok=True)

    @contextmanager
    def _locked(self) -> Iterator[None]:
        with file_lock(self._lock_file):
            yield

    def _load(self) -> list[IndexEntry]:
        try:
            root = safe_xml_load(self.index_file, backup_corrupted=False)
        except CorruptedFileError as e:
            raise PackageError(f"repository index is corrupted: {self.index_file}") from e
        if root is None:
            return []
        try:
            return _entries_from_root(root)
        except SchemaError as e:
            raise PackageError(f"repository index is invalid: {e}") from e

    def _save(self, entries: list[IndexEntry]) -> None:
        atomic_write_text(self.index_file, index_to_xml(entries))

    def list_all(self) -> list[IndexEntry]:
        return sorted(self._load(), key=lambda e: e.key)

    def get(self, name: str, version: str) -> Optional[IndexEntry]:
        for entry in self._load():
            if entry.key == (name, version):
                return entry
        return None

    def to_xml(self) -> str:
        return index_to_xml(self._load())

    def add(self, archive: bytes) -> Receipt:
        """Verify and store an archive, adding its index entry.

        Raises:
            PackageError: Archive does not verify
            DuplicateVersionError: (name, version) is already registered
        """
        manifest, _ = unpack_verify(archive)
        fmt = archive_format(archive)
        digest = sha256_hex(archive)
        locator = f"{PACKAGES_SUBDIR}/{manifest.name}/{manifest.version}/{manifest.name}-{manifest.version}{archive_extension(fmt)}"

        with self._locked():
            entries = self._load()
            if any(entry.key == (manifest.name, manifest.version) for entry in entries):
                raise DuplicateVersionError(f"{manifest.name} {manifest.version} is already registered")
            atomic_write_bytes(self.repo_dir / locator, archive)
            entry = IndexEntry(
                name=manifest.name,
                version=manifest.version,
                digest=digest,
                manifest_digest=sha256_hex(manifest_to_xml(manifest).encode("utf-8")),
                locator=locator,
                registered_at=datetime.now(timezone.utc),
            )
            entries.append(entry)
            self._save(entries)

        logger.info(f"Registered {manifest.name} {manifest.version} ({digest[:12]})")
        return Receipt(name=entry.name, version=entry.version, digest=digest, registered_at=entry.registered_at)

    def read_archive(self, name: str, version: str) -> tuple[bytes, IndexEntry]:
        """Archive bytes and index entry of a registered package.

        Raises:
            NotFoundError: Not registered
        """
        entry = self.get(name, version)
        if entry is None:
            raise NotFoundError(f"{name} {version} is not registered")
        return (self.repo_dir / entry.locator).read_bytes(), entry

    def verify(self) -> list[str]:
        """Names of entries whose stored archive no longer matches its digest."""
        problems = []
        for entry in self.list_all():
            path = self.repo_dir / entry.locator
            if not path.exists() or sha256_hex(path.read_bytes()) != entry.digest:
                problems.append(f"{entry.name} {entry.version}")
        return problems
