"""Compilation services: a local compiler command or a remote broker.

Both return the same ``CompileResult`` and share its XML form, so a result
cannot tell which path produced it.
"""

import base64
import email.parser
import email.policy
import logging
import os
import shlex
import shutil
import signal
import subprocess
import tempfile
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from pathlib import Path, PurePosixPath
from typing import Optional, Protocol, Union

import requests

from comodi.core.config import CompilerConfig
from comodi.core.errors import CompilerNotFoundError, ConfigurationError, PackageError, RepoTransportError, SchemaError
from comodi.utils.constants import COMPILE_TIMEOUT_SECONDS
from comodi.utils.storage_helpers import sha256_hex
from comodi.utils.xml_helpers import add_text_child, expect_tag, format_bool, parse_bool, parse_xml, require_attr, to_xml_text

logger = logging.getLogger("comodi.compile")

SOURCE_SUFFIXES = {".c", ".f", ".for", ".f77"}
DEFAULT_OUTPUT_NAME = "libcomponent.so"


@dataclass(frozen=True)
class CompileRequest:
    """A source bundle (author sources plus glue) for one target platform."""

    files: dict[str, bytes]
    language: str
    platform: str
    output_name: str = DEFAULT_OUTPUT_NAME

    def hashes(self) -> dict[str, str]:
        return {name: sha256_hex(self.files[name]) for name in sorted(self.files)}

    @property
    def sources(self) -> list[str]:
        return [name for name in sorted(self.files) if PurePosixPath(name).suffix.lower() in SOURCE_SUFFIXES]


@dataclass(frozen=True)
class CompileResult:
    success: bool
    platform: str
    log: str
    request_hashes: dict[str, str] = field(default_factory=dict)
    binary: Optional[bytes] = None
    binary_name: str = ""


def compile_result_to_xml(result: CompileResult) -> str:
    root = ET.Element("compile-result", {"success": format_bool(result.success), "platform": result.platform})
    for name, digest in sorted(result.request_hashes.items()):
        ET.SubElement(root, "input", {"path": name, "sha256": digest})
    add_text_child(root, "log", result.log)
    if result.binary is not None:
        add_text_child(
            root,
            "binary",
            base64.b64encode(result.binary).decode("ascii"),
            name=result.binary_name,
            sha256=sha256_hex(result.binary),
        )
    return to_xml_text(root)


def compile_result_from_xml(text: Union[str, bytes]) -> CompileResult:
    """Read a compile result.

    Raises:
        SchemaError: Malformed document
        PackageError: Binary does not match its recorded hash
    """
    root = parse_xml(text)
    expect_tag(root, "compile-result", "/compile-result")
    hashes = {}
    for position, node in enumerate(root.iterfind("input")):
        path = f"/compile-result/input[{position}]"
        hashes[require_attr(node, "path", path)] = require_attr(node, "sha256", path)
    log_node = root.find("log")
    binary, binary_name = None, ""
    binary_node = root.find("binary")
    if binary_node is not None:
        binary = base64.b64decode(binary_node.text or "")
        binary_name = require_attr(binary_node, "name", "/compile-result/binary")
        if sha256_hex(binary) != require_attr(binary_node, "sha256", "/compile-result/binary"):
            raise PackageError("compiled binary does not match its recorded hash")
    return CompileResult(
        success=parse_bool(require_attr(root, "success", "/compile-result"), "/compile-result@success"),
        platform=require_attr(root, "platform", "/compile-result"),
        log=(log_node.text or "") if log_node is not None else "",
        request_hashes=hashes,
        binary=binary,
        binary_name=binary_name,
    )


def parse_multipart_request(content_type: str, body: bytes) -> CompileRequest:
    """Decode a ``multipart/form-data`` compile request.

    Source files arrive as ``source`` parts carrying a filename; ``language``,
    ``platform`` and ``output`` are plain fields.

    Raises:
        SchemaError: Not multipart, or a required field is missing
    """
    if not content_type.startswith("multipart/form-data"):
        raise SchemaError("/compile", f"expected multipart/form-data, got '{content_type}'")
    header = f"Content-Type: {content_type}\r\nMIME-Version: 1.0\r\n\r\n".encode("latin-1")
    message = email.parser.BytesParser(policy=email.policy.HTTP).parsebytes(header + body)
    if not message.is_multipart():
        raise SchemaError("/compile", "request body is not multipart")

    files: dict[str, bytes] = {}
    fields: dict[str, str] = {}
    for part in message.iter_parts():
        name = part.get_param("name", header="content-disposition")
        payload = part.get_payload(decode=True) or b""
        filename = part.get_filename()
        if name == "source" and filename:
            files[PurePosixPath(filename).name] = payload
        elif name:
            fields[str(name)] = payload.decode("utf-8")

    for required in ("language", "platform"):
        if required not in fields:
            raise SchemaError(f"/compile@{required}", "missing form field")
    if not files:
        raise SchemaError("/compile", "no source files in request")
    return CompileRequest(
        files=files,
        language=fields["language"],
        platform=fields["platform"],
        output_name=fields.get("output", DEFAULT_OUTPUT_NAME),
    )


class CompileService(Protocol):
    def compile(self, request: CompileRequest) -> CompileResult: ...


def _kill_process_group(proc: subprocess.Popen) -> None:
    """Kill a process and its entire process group."""
    try:
        pgid = os.getpgid(proc.pid)
    except (ProcessLookupError, OSError):
        return

    try:
        os.killpg(pgid, signal.SIGTERM)
    except (ProcessLookupError, OSError):
        return

    try:
        proc.wait(timeout=10)
    except subprocess.TimeoutExpired:
        try:
            os.killpg(pgid, signal.SIGKILL)
        except (ProcessLookupError, OSError):
            pass
        try:
            proc.wait(timeout=5)
        except subprocess.TimeoutExpired:
            logger.critical(f"Compiler process {proc.pid} survived SIGKILL")


class LocalCompileService:
    """Run the configured compiler command on the bundle in a scratch directory."""

    def __init__(self, command: str, timeout_seconds: int = COMPILE_TIMEOUT_SECONDS):
        if not command.strip():
            raise ConfigurationError("compiler.command is not set")
        self.command = command
        self.timeout_seconds = timeout_seconds

    def argv(self, sources: list[str], output: str) -> list[str]:
        """Expand the ``{sources}`` and ``{output}`` placeholders."""
        argv = []
        for token in shlex.split(self.command):
            if token == "{sources}":
                argv.extend(sources)
            else:
                argv.append(token.replace("{output}", output).replace("{sources}", " ".join(sources)))
        return argv

    def compile(self, request: CompileRequest) -> CompileResult:
        """Compile a bundle.

        Raises:
            CompilerNotFoundError: The command's executable is not installed
        """
        hashes = request.hashes()
        with tempfile.TemporaryDirectory(prefix="comodi-compile-") as scratch:
            work = Path(scratch)
            for name, data in request.files.items():
                (work / PurePosixPath(name).name).write_bytes(data)
            argv = self.argv([PurePosixPath(name).name for name in request.sources], request.output_name)
            if not argv or shutil.which(argv[0]) is None:
                raise CompilerNotFoundError(f"compiler not found: {argv[0] if argv else self.command!r}")

            logger.info(f"Compiling {len(request.sources)} sources for {request.platform}")
            log = "$ " + shlex.join(argv) + "\n"
            try:
                proc = subprocess.Popen(
                    argv,
                    cwd=work,
                    stdout=subprocess.PIPE,
                    stderr=subprocess.STDOUT,
                    text=True,
                    start_new_session=True,
                )
            except FileNotFoundError as e:
                raise CompilerNotFoundError(f"compiler not found: {argv[0]}") from e

            try:
                output, _ = proc.communicate(timeout=self.timeout_seconds)
            except subprocess.TimeoutExpired:
                _kill_process_group(proc)
                if proc.stdout is not None:
                    proc.stdout.close()
                message = f"compilation timed out after {self.timeout_seconds} seconds"
                logger.error(message)
                return CompileResult(False, request.platform, log + message + "\n", hashes)

            log += output or ""
            binary_path = work / request.output_name
            if proc.returncode != 0 or not binary_path.exists():
                log += f"compiler exited with status {proc.returncode}\n"
                logger.warning(f"Compilation for {request.platform} failed (status {proc.returncode})")
                return CompileResult(False, request.platform, log, hashes)

            return CompileResult(
                success=True,
                platform=request.platform,
                log=log,
                request_hashes=hashes,
                binary=binary_path.read_bytes(),
                binary_name=request.output_name,
            )


class RemoteCompileService:
    """Send the bundle to a broker speaking the ``POST /compile`` protocol."""

    def __init__(self, endpoint: str, timeout_seconds: int = COMPILE_TIMEOUT_SECONDS):
        if not endpoint.strip():
            raise ConfigurationError("compiler.remote_endpoint is not set")
        self.endpoint = endpoint.rstrip("/")
        self.timeout_seconds = timeout_seconds

    def compile(self, request: CompileRequest) -> CompileResult:
        """Compile a bundle remotely.

        Raises:
            RepoTransportError: Broker unreachable or answered with an error status
        """
        url = f"{self.endpoint}/compile"
        parts = [("source", (name, request.files[name], "application/octet-stream")) for name in sorted(request.files)]
        fields = {"language": request.language, "platform": request.platform, "output": request.output_name}
        logger.info(f"Sending {len(parts)} files to {url}")
        try:
            response = requests.post(url, files=parts, data=fields, timeout=self.timeout_seconds)
        except requests.RequestException as e:
            raise RepoTransportError(f"compile broker unreachable at {url}: {e}") from e
        if response.status_code != 200:
            raise RepoTransportError(f"compile broker answered {response.status_code}: {response.text.strip()}")
        return compile_result_from_xml(response.content)


def service_from_config(config: CompilerConfig) -> CompileService:
    """The remote broker when an endpoint is set, else the local compiler command.

    Raises:
        ConfigurationError: Neither is configured
    """
    if config.remote_endpoint:
        return RemoteCompileService(config.remote_endpoint, config.timeout_seconds)
    if config.command:
        return LocalCompileService(config.command, config.timeout_seconds)
    raise ConfigurationError("no compilation service configured: set compiler.command or compiler.remote_endpoint")


def compile_bundle(request: CompileRequest, service: CompileService) -> CompileResult:
    result = service.compile(request)
    if result.request_hashes != request.hashes():
        raise PackageError("compile result does not record the submitted bundle")
    return result
