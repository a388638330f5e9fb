"""Deterministic ZIP and TAR.GZ archives of component packages."""

import gzip
import io
import logging
import tarfile
import zipfile
import zlib
from typing import Mapping

from comodi.core.errors import HashMismatchError, MissingFileError, PackageError
from comodi.repo.manifest import PackageManifest, manifest_from_xml, manifest_to_xml
from comodi.utils.constants import ARCHIVE_FORMATS, MANIFEST_PATH, ZIP_EPOCH
from comodi.utils.storage_helpers import sha256_hex

logger = logging.getLogger("comodi.repo")

_ZIP_MAGIC = b"PK\x03\x04"
_GZIP_MAGIC = b"\x1f\x8b"


def archive_format(data: bytes) -> str:
    """Recognize the format of archive bytes.

    Raises:
        PackageError: Neither ZIP nor TAR.GZ
    """
    if data.startswith(_ZIP_MAGIC):
        return "zip"
    if data.startswith(_GZIP_MAGIC):
        return "tar.gz"
    raise PackageError("archive is neither ZIP nor TAR.GZ")


def archive_extension(fmt: str) -> str:
    return ".zip" if fmt == "zip" else ".tar.gz"


def _check_files(manifest: PackageManifest, files: Mapping[str, bytes]) -> None:
    manifest.check()
    for entry in manifest.files:
        if entry.path not in files:
            raise MissingFileError(entry.path)
        if sha256_hex(files[entry.path]) != entry.sha256:
            raise HashMismatchError(entry.path)
    extra = sorted(set(files) - {entry.path for entry in manifest.files})
    if extra:
        raise PackageError(f"files not listed in the manifest: {', '.join(extra)}")


def _zip(entries: list[tuple[str, bytes]]) -> bytes:
    buffer = io.BytesIO()
    with zipfile.ZipFile(buffer, "w") as archive:
        for name, data in entries:
            info = zipfile.ZipInfo(name, date_time=ZIP_EPOCH)
            info.compress_type = zipfile.ZIP_DEFLATED
            info.external_attr = 0o644 << 16
            info.create_system = 3
            archive.writestr(info, data)
    return buffer.getvalue()


def _tar_gz(entries: list[tuple[str, bytes]]) -> bytes:
    buffer = io.BytesIO()
    with gzip.GzipFile(filename="", mode="wb", fileobj=buffer, mtime=0) as compressed:
        with tarfile.open(fileobj=compressed, mode="w", format=tarfile.USTAR_FORMAT) as archive:
            for name, data in entries:
                info = tarfile.TarInfo(name)
                info.size = len(data)
                info.mtime = 0
                info.mode = 0o644
                info.uid = info.gid = 0
                info.uname = info.gname = ""
                archive.addfile(info, io.BytesIO(data))
    return buffer.getvalue()


def pack(manifest: PackageManifest, files: Mapping[str, bytes], fmt: str = "zip") -> bytes:
    """Pack files and their manifest into an archive.

    The manifest comes first, then the files in manifest (path) order. Entry
    timestamps and permissions are fixed, so equal inputs give equal bytes.

    Args:
        manifest: Manifest listing every file with its hash
        files: Path to content
        fmt: "zip" or "tar.gz"

    Raises:
        ManifestError: Manifest invariants are violated
        MissingFileError: A listed file is absent
        HashMismatchError: A file does not match its hash
        PackageError: Unknown format or unlisted files
    """
    if fmt not in ARCHIVE_FORMATS:
        raise PackageError(f"unknown archive format '{fmt}', expected one of {', '.join(ARCHIVE_FORMATS)}")
    _check_files(manifest, files)
    entries = [(MANIFEST_PATH, manifest_to_xml(manifest).encode("utf-8"))]
    entries.extend((entry.path, files[entry.path]) for entry in manifest.files)
    data = _zip(entries) if fmt == "zip" else _tar_gz(entries)
    logger.debug(f"Packed {manifest.name} {manifest.version} as {fmt}: {len(entries)} entries, {len(data)} bytes")
    return data


def _read_zip(data: bytes) -> tuple[dict[str, bytes], set[str]]:
    contents: dict[str, bytes] = {}
    corrupt: set[str] = set()
    try:
        archive = zipfile.ZipFile(io.BytesIO(data))
    except zipfile.BadZipFile as e:
        raise PackageError(f"corrupt ZIP archive: {e}") from e
    with archive:
        for info in archive.infolist():
            if info.is_dir():
                continue
            try:
                contents[info.filename] = archive.read(info)
            except (zipfile.BadZipFile, zlib.error, EOFError):
                corrupt.add(info.filename)
    return contents, corrupt


_STREAM_ERRORS = (tarfile.TarError, OSError, EOFError, zlib.error)


def _read_tar_gz(data: bytes) -> tuple[dict[str, bytes], set[str], str | None]:
    """Read members in stream order; the member being read when the stream fails is corrupt.

    Returns:
        Contents, corrupt member names, and the stream error when it failed between members
    """
    contents: dict[str, bytes] = {}
    corrupt: set[str] = set()
    try:
        with tarfile.open(fileobj=io.BytesIO(data), mode="r|gz") as archive:
            for member in archive:
                if not member.isfile():
                    continue
                try:
                    extracted = archive.extractfile(member)
                    contents[member.name] = extracted.read() if extracted is not None else b""
                except _STREAM_ERRORS as e:
                    logger.debug(f"TAR.GZ stream failed inside {member.name}: {e}")
                    corrupt.add(member.name)
                    break
    except _STREAM_ERRORS as e:
        return contents, corrupt, str(e)
    return contents, corrupt, None


def unpack_verify(data: bytes) -> tuple[PackageManifest, dict[str, bytes]]:
    """Read an archive and verify every file against the manifest.

    Returns:
        The manifest and the files it lists (the manifest itself excluded)

    Raises:
        PackageError: Unreadable archive or no manifest
        MissingFileError: A listed file is absent
        HashMismatchError: A file is corrupt or does not match its hash
    """
    corrupt: set[str] = set()
    stream_error: str | None = None
    if archive_format(data) == "zip":
        contents, corrupt = _read_zip(data)
    else:
        contents, corrupt, stream_error = _read_tar_gz(data)

    if MANIFEST_PATH in corrupt:
        raise PackageError("manifest entry is corrupt")
    if MANIFEST_PATH not in contents:
        if stream_error is not None:
            raise PackageError(f"corrupt TAR.GZ archive: {stream_error}")
        raise PackageError(f"archive has no {MANIFEST_PATH}")
    manifest = manifest_from_xml(contents.pop(MANIFEST_PATH))
    manifest.check()

    files: dict[str, bytes] = {}
    for entry in manifest.files:
        if entry.path in corrupt:
            raise HashMismatchError(entry.path)
        if entry.path not in contents:
            # the stream failed on its way to this entry
            if stream_error is not None:
                raise HashMismatchError(entry.path)
            raise MissingFileError(entry.path)
        if sha256_hex(contents[entry.path]) != entry.sha256:
            raise HashMismatchError(entry.path)
        files[entry.path] = contents[entry.path]
    unlisted = sorted(set(contents) - set(files))
    if unlisted:
        raise PackageError(f"archive holds files not listed in the manifest: {', '.join(unlisted)}")
    return manifest, files
