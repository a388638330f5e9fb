"""Repository HTTP service.

Verbs: ``GET /index``, ``GET /pkg/<name>/<version>``,
``PUT /pkg/<name>/<version>`` and, when a compiler is configured,
``POST /compile``. Bodies are XML except archives and compile uploads.
"""

import logging
import re
import signal
import threading
import xml.etree.ElementTree as ET
from collections import Counter
from http import HTTPStatus
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Optional

from comodi.core.errors import (
    CompilerNotFoundError,
    DuplicateVersionError,
    NotFoundError,
    PackageError,
    SchemaError,
)
from comodi.repo.archive import unpack_verify
from comodi.repo.compile import LocalCompileService, compile_result_to_xml, parse_multipart_request
from comodi.repo.index import RepoIndex, receipt_to_xml
from comodi.utils.constants import DEFAULT_REPO_HOST, DEFAULT_REPO_PORT, DIGEST_HEADER
from comodi.utils.xml_helpers import to_xml_text

logger = logging.getLogger("comodi.repo")

_PKG_PATH = re.compile(r"^/pkg/([A-Za-z0-9_][A-Za-z0-9_.-]*)/([0-9A-Za-z][0-9A-Za-z.+-]*)$")
_XML = "application/xml"


def _error_body(code: str, message: str) -> bytes:
    root = ET.Element("error", {"code": code})
    root.text = message
    return to_xml_text(root).encode("utf-8")


class _RepoHandler(BaseHTTPRequestHandler):
    server: "_RepoHTTPServer"
    protocol_version = "HTTP/1.1"

    def log_message(self, format: str, *args) -> None:
        logger.debug(f"{self.client_address[0]} {format % args}")

    def _send(self, status: HTTPStatus, body: bytes, content_type: str = _XML, headers: Optional[dict] = None) -> None:
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        for name, value in (headers or {}).items():
            self.send_header(name, value)
        self.end_headers()
        self.wfile.write(body)

    def _fail(self, status: HTTPStatus, code: str, message: str) -> None:
        self._send(status, _error_body(code, message))

    def _body(self) -> bytes:
        length = int(self.headers.get("Content-Length") or 0)
        return self.rfile.read(length) if length else b""

    def do_GET(self) -> None:
        repo = self.server.repo
        if self.path == "/index":
            repo.count("GET /index")
            self._send(HTTPStatus.OK, repo.index.to_xml().encode("utf-8"))
            return
        match = _PKG_PATH.match(self.path)
        if match is None:
            self._fail(HTTPStatus.BAD_REQUEST, "BadPath", f"unsupported path '{self.path}'")
            return
        repo.count("GET /pkg")
        try:
            data, entry = repo.index.read_archive(match.group(1), match.group(2))
        except NotFoundError as e:
            self._fail(HTTPStatus.NOT_FOUND, "NotFound", str(e))
            return
        self._send(HTTPStatus.OK, data, "application/octet-stream", {DIGEST_HEADER: entry.digest})

    def do_PUT(self) -> None:
        repo = self.server.repo
        match = _PKG_PATH.match(self.path)
        if match is None:
            self._fail(HTTPStatus.BAD_REQUEST, "BadPath", f"unsupported path '{self.path}'")
            return
        repo.count("PUT /pkg")
        body = self._body()
        try:
            manifest, _ = unpack_verify(body)
            if (manifest.name, manifest.version) != (match.group(1), match.group(2)):
                self._fail(
                    HTTPStatus.BAD_REQUEST,
                    "PathMismatch",
                    f"archive holds {manifest.name} {manifest.version}, not {match.group(1)} {match.group(2)}",
                )
                return
            receipt = repo.index.add(body)
        except DuplicateVersionError as e:
            self._fail(HTTPStatus.CONFLICT, "DuplicateVersion", str(e))
            return
        except PackageError as e:
            self._fail(HTTPStatus.BAD_REQUEST, "BadPackage", str(e))
            return
        self._send(HTTPStatus.CREATED, receipt_to_xml(receipt).encode("utf-8"))

    def do_POST(self) -> None:
        repo = self.server.repo
        if self.path != "/compile":
            self._fail(HTTPStatus.BAD_REQUEST, "BadPath", f"unsupported path '{self.path}'")
            return
        repo.count("POST /compile")
        body = self._body()
        if repo.compiler is None:
            self._fail(HTTPStatus.SERVICE_UNAVAILABLE, "NoCompiler", "this repository has no compilation service")
            return
        try:
            request = parse_multipart_request(self.headers.get("Content-Type", ""), body)
            result = repo.compiler.compile(request)
        except SchemaError as e:
            self._fail(HTTPStatus.BAD_REQUEST, "BadRequest", str(e))
            return
        except CompilerNotFoundError as e:
            self._fail(HTTPStatus.SERVICE_UNAVAILABLE, "NoCompiler", str(e))
            return
        self._send(HTTPStatus.OK, compile_result_to_xml(result).encode("utf-8"))

    def do_DELETE(self) -> None:
        self._fail(HTTPStatus.METHOD_NOT_ALLOWED, "Immutable", "registered versions cannot be removed")


class _RepoHTTPServer(ThreadingHTTPServer):
    daemon_threads = True

    def __init__(self, address: tuple[str, int], repo: "RepoServer"):
        self.repo = repo
        super().__init__(address, _RepoHandler)


class RepoServer:
    """A repository directory served over HTTP.

    ``hits`` counts requests per verb (``"GET /pkg"``, ``"PUT /pkg"``, ...).
    """

    def __init__(
        self,
        repo_dir: Path,
        host: str = DEFAULT_REPO_HOST,
        port: int = DEFAULT_REPO_PORT,
        compiler: Optional[LocalCompileService] = None,
    ):
        self.index = RepoIndex(repo_dir)
        self.compiler = compiler
        self.hits: Counter[str] = Counter()
        self._hits_lock = threading.Lock()
        self._httpd = _RepoHTTPServer((host, port), self)
        self._thread: Optional[threading.Thread] = None

    @property
    def address(self) -> tuple[str, int]:
        host, port = self._httpd.server_address[:2]
        return str(host), int(port)

    @property
    def url(self) -> str:
        host, port = self.address
        return f"http://{host}:{port}"

    def count(self, verb: str) -> None:
        with self._hits_lock:
            self.hits[verb] += 1

    def start(self) -> "RepoServer":
        """Serve from a background thread."""
        self._thread = threading.Thread(target=self._httpd.serve_forever, name="comodi-repo", daemon=True)
        self._thread.start()
        logger.info(f"Repository serving {self.index.repo_dir} at {self.url}")
        return self

    def stop(self) -> None:
        self._httpd.shutdown()
        self._httpd.server_close()
        if self._thread is not None:
            self._thread.join()
            self._thread = None

    def __enter__(self) -> "RepoServer":
        return self.start()

    def __exit__(self, *exc) -> None:
        self.stop()

    def _handle_signal(self, signum: int, frame) -> None:
        logger.info(f"Received signal {signum}, stopping repository server")
        # shutdown() blocks until serve_forever returns, so it cannot run on the serving thread
        threading.Thread(target=self._httpd.shutdown, daemon=True).start()

    def serve_forever(self) -> None:
        """Serve in the calling thread until SIGINT or SIGTERM."""
        signal.signal(signal.SIGTERM, self._handle_signal)
        signal.signal(signal.SIGINT, self._handle_signal)
        logger.info(f"Repository serving {self.index.repo_dir} at {self.url}")
        try:
            self._httpd.serve_forever()
        finally:
            self._httpd.server_close()
            logger.info("Repository server stopped")


def serve_repo(
    repo_dir: Path,
    port: int = DEFAULT_REPO_PORT,
    host: str = DEFAULT_REPO_HOST,
    compiler: Optional[LocalCompileService] = None,
) -> RepoServer:
    """Start serving a repository directory in the background.

    Raises:
        OSError: The address cannot be bound
    """
    return RepoServer(repo_dir, host, port, compiler).start()
