"""Repository client and the local component repository cache."""

import logging
import xml.etree.ElementTree as ET
from pathlib import Path
from typing import Optional

import requests

from comodi.core.errors import (
    DigestMismatchError,
    DuplicateVersionError,
    NotFoundError,
    PackageError,
    RepoTransportError,
    SchemaError,
)
from comodi.repo.archive import archive_extension, archive_format, unpack_verify
from comodi.repo.index import IndexEntry, Receipt, index_from_xml, receipt_from_xml
from comodi.utils.constants import DIGEST_HEADER, HTTP_TIMEOUT_SECONDS
from comodi.utils.storage_helpers import (
    CorruptedFileError,
    atomic_write_bytes,
    atomic_write_text,
    file_lock,
    safe_xml_load,
    sha256_hex,
)
from comodi.utils.xml_helpers import to_xml_text

logger = logging.getLogger("comodi.repo")

CACHE_INDEX_FILE = "cache.xml"


def _error_text(response: requests.Response) -> str:
    try:
        return (ET.fromstring(response.content).text or "").strip() or response.reason
    except ET.ParseError:
        return response.text.strip() or response.reason


class RepoClient:
    """Speaks the repository protocol to one endpoint."""

    def __init__(self, endpoint: str, timeout: int = HTTP_TIMEOUT_SECONDS):
        self.endpoint = endpoint.rstrip("/")
        self.timeout = timeout
        self.session = requests.Session()

    def _request(self, method: str, path: str, **kwargs) -> requests.Response:
        url = f"{self.endpoint}{path}"
        try:
            return self.session.request(method, url, timeout=self.timeout, **kwargs)
        except requests.RequestException as e:
            raise RepoTransportError(f"repository unreachable at {url}: {e}") from e

    def index(self) -> list[IndexEntry]:
        response = self._request("GET", "/index")
        if response.status_code != 200:
            raise RepoTransportError(f"GET /index answered {response.status_code}: {_error_text(response)}")
        try:
            return index_from_xml(response.content)
        except SchemaError as e:
            raise RepoTransportError(f"repository sent an invalid index: {e}") from e

    def register(self, archive: bytes) -> Receipt:
        """Upload an archive.

        Raises:
            PackageError: Archive does not verify locally or was rejected
            DuplicateVersionError: (name, version) already registered
            RepoTransportError: Repository unreachable
        """
        manifest, _ = unpack_verify(archive)
        response = self._request(
            "PUT",
            f"/pkg/{manifest.name}/{manifest.version}",
            data=archive,
            headers={"Content-Type": "application/octet-stream"},
        )
        if response.status_code == 409:
            raise DuplicateVersionError(_error_text(response))
        if response.status_code == 400:
            raise PackageError(_error_text(response))
        if response.status_code != 201:
            raise RepoTransportError(f"PUT answered {response.status_code}: {_error_text(response)}")
        receipt = receipt_from_xml(response.content)
        if receipt.digest != sha256_hex(archive):
            raise DigestMismatchError(f"receipt digest {receipt.digest} does not match the uploaded archive")
        logger.info(f"Registered {receipt.name} {receipt.version} at {self.endpoint}")
        return receipt

    def download(self, name: str, version: str) -> bytes:
        """Download an archive and check it against the advertised digest.

        Raises:
            NotFoundError: Not registered
            DigestMismatchError: Content does not match the digest header
        """
        response = self._request("GET", f"/pkg/{name}/{version}")
        if response.status_code == 404:
            raise NotFoundError(f"{name} {version} is not registered at {self.endpoint}")
        if response.status_code != 200:
            raise RepoTransportError(f"GET answered {response.status_code}: {_error_text(response)}")
        data = response.content
        expected = response.headers.get(DIGEST_HEADER, "")
        if sha256_hex(data) != expected:
            raise DigestMismatchError(f"{name} {version}: downloaded archive does not match digest {expected or '(none)'}")
        return data


class LocalRepository:
    """Downloaded archives under ``<dir>/<name>/<version>/``, with a digest index.

    The cache holds nothing that cannot be fetched again.
    """

    def __init__(self, local_dir: Path):
        self.local_dir = local_dir
        self.index_file = local_dir / CACHE_INDEX_FILE
        self._lock_file = local_dir / ".cache.lock"

    def _load(self) -> dict[tuple[str, str], tuple[str, str]]:
        try:
            root = safe_xml_load(self.index_file)
        except CorruptedFileError:
            logger.warning(f"Ignoring corrupted cache index {self.index_file}")
            return {}
        if root is None:
            return {}
        cached = {}
        for node in root.iterfind("archive"):
            name, version = node.get("name"), node.get("version")
            path, digest = node.get("path"), node.get("digest")
            if name and version and path and digest:
                cached[(name, version)] = (path, digest)
        return cached

    def _save(self, cached: dict[tuple[str, str], tuple[str, str]]) -> None:
        root = ET.Element("cache")
        for (name, version), (path, digest) in sorted(cached.items()):
            ET.SubElement(root, "archive", {"name": name, "version": version, "path": path, "digest": digest})
        atomic_write_text(self.index_file, to_xml_text(root))

    def lookup(self, name: str, version: str) -> Optional[Path]:
        """Cached archive path when present and still matching its digest."""
        record = self._load().get((name, version))
        if record is None:
            return None
        path = self.local_dir / record[0]
        if not path.exists() or sha256_hex(path.read_bytes()) != record[1]:
            logger.warning(f"Cached {name} {version} is missing or damaged, fetching again")
            return None
        return path

    def store(self, name: str, version: str, archive: bytes) -> Path:
        relative = f"{name}/{version}/{name}-{version}{archive_extension(archive_format(archive))}"
        path = self.local_dir / relative
        with file_lock(self._lock_file):
            atomic_write_bytes(path, archive)
            cached = self._load()
            cached[(name, version)] = (relative, sha256_hex(archive))
            self._save(cached)
        return path

    def load(self, name: str, version: str) -> bytes:
        """Bytes of a cached archive.

        Raises:
            NotFoundError: Not in the cache
        """
        path = self.lookup(name, version)
        if path is None:
            raise NotFoundError(f"{name} {version} is not in the local repository {self.local_dir}")
        return path.read_bytes()

    def fetch(self, name: str, version: str, client: RepoClient) -> Path:
        """Cached archive path, downloading it first on a cache miss."""
        path = self.lookup(name, version)
        if path is not None:
            logger.debug(f"Cache hit for {name} {version}")
            return path
        archive = client.download(name, version)
        manifest, _ = unpack_verify(archive)
        if (manifest.name, manifest.version) != (name, version):
            raise PackageError(f"repository sent {manifest.name} {manifest.version} for {name} {version}")
        path = self.store(name, version, archive)
        logger.info(f"Fetched {name} {version} into {self.local_dir}")
        return path


def register(archive: bytes, endpoint: str) -> Receipt:
    return RepoClient(endpoint).register(archive)


def fetch(name: str, version: str, local_dir: Path, endpoint: str) -> Path:
    """Fetch a package into a local repository; a cache hit needs no network."""
    return LocalRepository(local_dir).fetch(name, version, RepoClient(endpoint))
