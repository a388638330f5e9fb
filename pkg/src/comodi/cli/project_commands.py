"""User pipeline commands: fetch, validate, run."""

import logging
import tempfile
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import typer
from rich.console import Console

from comodi.cdl import ComponentDescriptor, read_cdf
from comodi.core.diagnostics import diagnostics_to_xml, has_errors
from comodi.core.errors import MissingBinaryError
from comodi.repo import LocalRepository, PackageManifest, RepoClient, unpack_verify
from comodi.utils.cli_helpers import (
    FORMAT_OPTION_HELP,
    OutputFormat,
    cli_errors,
    configured_endpoint,
    emit_text,
    exit_on_errors,
    load_config,
    print_diagnostics,
)
from comodi.utils.constants import EXIT_DIAGNOSTICS
from comodi.utils.logging import RunLogger
from comodi.wiring import Backend, NativeBackend, ProjectDescription, bind, load_mocks, load_project, run, run_mock
from comodi.wiring import render_report, report_to_xml, validate_project

logger = logging.getLogger("comodi.cli")
console = Console()

ENDPOINT_HELP = "Repository URL used for packages missing locally (default: repository.endpoint)"


@dataclass
class _Components:
    descriptors: dict[tuple[str, str], ComponentDescriptor] = field(default_factory=dict)
    packages: dict[tuple[str, str], tuple[PackageManifest, dict[str, bytes]]] = field(default_factory=dict)


def _local_repository(local_dir: Optional[Path]) -> LocalRepository:
    return LocalRepository(local_dir or load_config().local_repo_dir())


def _collect_components(
    project: ProjectDescription,
    descriptor_files: list[Path],
    local_dir: Optional[Path],
    endpoint: Optional[str],
) -> _Components:
    """Descriptors for every instance: explicit CDF files first, then packages.

    Packages come from the local repository, fetched from the repository when
    an endpoint is known. Instances left without a descriptor are reported by
    validation.
    """
    found = _Components()
    for path in descriptor_files:
        descriptor = read_cdf(path.read_bytes())
        found.descriptors[(descriptor.name, descriptor.version)] = descriptor

    repository = _local_repository(local_dir)
    remote = endpoint or load_config().repository.endpoint
    client = RepoClient(remote) if remote else None
    for key in sorted({decl.key for decl in project.instances}):
        name, version = key
        path = repository.lookup(name, version)
        if path is None and client is not None:
            path = repository.fetch(name, version, client)
        if path is None:
            continue
        manifest, files = unpack_verify(path.read_bytes())
        found.packages[key] = (manifest, files)
        found.descriptors.setdefault(key, read_cdf(files[manifest.cdf_path]))
    return found


def fetch_package(
    name: str = typer.Argument(..., help="Package name"),
    version: str = typer.Argument(..., help="Package version"),
    endpoint: Optional[str] = typer.Option(None, "--endpoint", "-e", help="Repository URL (default: repository.endpoint)"),
    local_dir: Optional[Path] = typer.Option(None, "--local-dir", help="Local repository (default: <home>/repository)"),
) -> None:
    """Download a package into the local repository, verifying its digest."""
    with cli_errors():
        repository = _local_repository(local_dir)
        path = repository.lookup(name, version)
        if path is None:
            path = repository.fetch(name, version, RepoClient(endpoint or configured_endpoint()))
    console.print(f"[green]Fetched[/green] {name} {version} -> {path}", highlight=False)


def validate(
    project_file: Path = typer.Argument(..., exists=True, dir_okay=False, help="Project description XML"),
    descriptor_files: list[Path] = typer.Option([], "--descriptor", "-d", exists=True, dir_okay=False, help="Component descriptor to use directly"),
    local_dir: Optional[Path] = typer.Option(None, "--local-dir", help="Local repository"),
    endpoint: Optional[str] = typer.Option(None, "--endpoint", "-e", help=ENDPOINT_HELP),
    output_format: OutputFormat = typer.Option(OutputFormat.TEXT, "--format", help=FORMAT_OPTION_HELP),
) -> None:
    """Check a project's wiring against its component descriptors."""
    with cli_errors():
        project = load_project(project_file.read_bytes())
        components = _collect_components(project, descriptor_files, local_dir, endpoint)
    diagnostics = validate_project(project, components.descriptors)
    print_diagnostics(diagnostics)

    if output_format == OutputFormat.XML:
        emit_text(diagnostics_to_xml(diagnostics, project_file.name))
    elif not has_errors(diagnostics):
        console.print(
            f"[green]Project is valid:[/green] {len(project.instances)} instances, "
            f"{len(project.connections)} connections",
            highlight=False,
        )
    if has_errors(diagnostics):
        raise typer.Exit(EXIT_DIAGNOSTICS)


def run_project(
    project_file: Path = typer.Argument(..., exists=True, dir_okay=False, help="Project description XML"),
    backend: Backend = typer.Option(Backend.MOCK, "--backend", "-b", help="mock or native"),
    mocks_file: Optional[Path] = typer.Option(None, "--mocks", "-m", exists=True, dir_okay=False, help="Mock implementations XML"),
    descriptor_files: list[Path] = typer.Option([], "--descriptor", "-d", exists=True, dir_okay=False, help="Component descriptor to use directly"),
    local_dir: Optional[Path] = typer.Option(None, "--local-dir", help="Local repository"),
    endpoint: Optional[str] = typer.Option(None, "--endpoint", "-e", help=ENDPOINT_HELP),
    depth_limit: Optional[int] = typer.Option(None, "--depth-limit", min=1, help="Call depth limit (default: engine.call_depth_limit)"),
    output_format: OutputFormat = typer.Option(OutputFormat.TEXT, "--format", help=FORMAT_OPTION_HELP),
) -> None:
    """Link every instance once and call the project's entry point."""
    if backend == Backend.MOCK and mocks_file is None:
        raise typer.BadParameter("the mock backend needs --mocks", param_hint="--mocks")

    run_id = f"{project_file.stem}-{uuid.uuid4().hex[:8]}"
    with cli_errors(), RunLogger(run_id) as run_logger:
        config = load_config()
        project = load_project(project_file.read_bytes())
        components = _collect_components(project, descriptor_files, local_dir, endpoint)
        exit_on_errors(validate_project(project, components.descriptors))
        plan = bind(project, components.descriptors, backend)

        if backend == Backend.MOCK:
            assert mocks_file is not None
            limit = depth_limit or config.engine.call_depth_limit
            report = run_mock(plan, load_mocks(mocks_file.read_bytes()), limit, run_logger)
        else:
            packages = {}
            for decl in project.instances:
                if decl.key not in components.packages:
                    raise MissingBinaryError(
                        f"{decl.package} {decl.version} is not in the local repository; "
                        "the native backend loads binaries from packages"
                    )
                packages[decl.id] = components.packages[decl.key]
            with tempfile.TemporaryDirectory(prefix="comodi-run-") as work_dir:
                native = NativeBackend(plan, packages, config.compiler.platform, Path(work_dir))
                report = run(plan, native, run_logger)

    if output_format == OutputFormat.XML:
        emit_text(report_to_xml(report))
    else:
        console.print(render_report(report), markup=False, highlight=False, end="")
