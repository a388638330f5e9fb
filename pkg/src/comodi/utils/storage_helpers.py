"""Safe file storage utilities: digests, atomic writes, XML loading with recovery."""

import fcntl
import hashlib
import logging
import shutil
import tempfile
import xml.etree.ElementTree as ET
from contextlib import contextmanager
from datetime import datetime
from pathlib import Path
from typing import Iterator, NoReturn, Optional

logger = logging.getLogger("comodi.storage")


class StorageError(Exception):
    """A file could not be read or written."""


class CorruptedFileError(StorageError):
    """XML file exists but does not parse."""


def sha256_hex(data: bytes) -> str:
    """Hex SHA-256 digest of a byte string."""
    return hashlib.sha256(data).hexdigest()


def file_sha256(file_path: Path) -> str:
    return sha256_hex(file_path.read_bytes())


def _raise_storage_error(verb: str, file_path: Path, error: OSError) -> NoReturn:
    if isinstance(error, PermissionError):
        logger.error(f"Permission denied ({verb}) {file_path}: {error}")
        raise StorageError(f"Cannot {verb} {file_path}: permission denied") from error
    logger.error(f"OS error ({verb}) {file_path}: {error}")
    raise StorageError(f"Failed to {verb} {file_path}: {error}") from error


def safe_xml_load(file_path: Path, backup_corrupted: bool = True) -> Optional[ET.Element]:
    """Load an XML document, keeping a timestamped copy of a corrupted one.

    Returns:
        Root element, or None if the file does not exist

    Raises:
        CorruptedFileError: The file cannot be parsed
        StorageError: The file cannot be read
    """
    if not file_path.exists():
        return None

    try:
        data = file_path.read_bytes()
    except OSError as e:
        _raise_storage_error("read", file_path, e)

    try:
        return ET.fromstring(data)
    except ET.ParseError as e:
        logger.error(f"XML parse error in {file_path}: {e}")
        if backup_corrupted:
            logger.warning(f"Kept corrupted file as {_backup_corrupted_file(file_path)}")
        raise CorruptedFileError(f"Corrupted XML file: {file_path}") from e


def atomic_write_bytes(file_path: Path, data: bytes) -> None:
    """Write bytes through a temporary sibling file moved over the target.

    Raises:
        StorageError: The directory or file cannot be written
    """
    try:
        file_path.parent.mkdir(parents=True, exist_ok=True)
        with tempfile.NamedTemporaryFile(mode="wb", dir=file_path.parent, delete=False, suffix=".tmp") as tmp_file:
            tmp_file.write(data)
        shutil.move(tmp_file.name, file_path)
    except OSError as e:
        _raise_storage_error("write", file_path, e)
    logger.debug(f"Atomically saved {file_path}")


def atomic_write_text(file_path: Path, text: str) -> None:
    atomic_write_bytes(file_path, text.encode("utf-8"))


@contextmanager
def file_lock(lock_path: Path) -> Iterator[None]:
    """Exclusive lock held for a read-modify-write sequence; released when the descriptor closes."""
    lock_path.parent.mkdir(parents=True, exist_ok=True)
    with open(lock_path, "w") as lock_fd:
        fcntl.flock(lock_fd.fileno(), fcntl.LOCK_EX)
        yield


def _backup_corrupted_file(file_path: Path) -> Path:
    stamp = datetime.now().strftime("%Y%m%d_%H%M%S")
    backup_path = file_path.with_name(f"{file_path.stem}.corrupted.{stamp}{file_path.suffix}")
    try:
        shutil.copy2(file_path, backup_path)
    except OSError as e:
        logger.warning(f"Could not keep a copy of {file_path}: {e}")
    return backup_path
