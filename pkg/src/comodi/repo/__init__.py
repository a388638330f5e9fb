"""Packages, repositories and compilation services."""

from comodi.repo.archive import pack, unpack_verify
from comodi.repo.client import LocalRepository, RepoClient, fetch, register
from comodi.repo.compile import (
    CompileRequest,
    CompileResult,
    LocalCompileService,
    RemoteCompileService,
    compile_bundle,
    service_from_config,
)
from comodi.repo.index import IndexEntry, Receipt, RepoIndex
from comodi.repo.manifest import FileRole, ManifestEntry, PackageFile, PackageManifest
from comodi.repo.server import RepoServer, serve_repo

__all__ = [
    "CompileRequest",
    "CompileResult",
    "FileRole",
    "IndexEntry",
    "LocalCompileService",
    "LocalRepository",
    "ManifestEntry",
    "PackageFile",
    "PackageManifest",
    "Receipt",
    "RemoteCompileService",
    "RepoClient",
    "RepoIndex",
    "RepoServer",
    "compile_bundle",
    "fetch",
    "pack",
    "register",
    "serve_repo",
    "unpack_verify",
]
