"""Developer pipeline commands: extract, describe, glue, pack, register, compile."""

import logging
from pathlib import Path
from typing import Optional

import typer
from rich.console import Console
from rich.table import Table

from comodi.automata.dump import tree_to_xml
from comodi.cdl import ComponentDescriptor, DescriptorMeta, draft_descriptor, load_answers, read_cdf, validate_cdf, write_cdf
from comodi.extract import InterfaceModel, extract_with_tree, interface_to_xml, load_profile, xml_to_interface
from comodi.glue import emit_glue, plan_glue, write_artifact
from comodi.repo import CompileRequest, FileRole, PackageFile, PackageManifest, compile_bundle, pack, register, service_from_config
from comodi.repo.compile import compile_result_to_xml
from comodi.repo.index import receipt_to_xml
from comodi.utils.cli_helpers import (
    FORMAT_OPTION_HELP,
    OutputFormat,
    cli_errors,
    configured_endpoint,
    emit_text,
    err_console,
    exit_on_errors,
    load_config,
)
from comodi.utils.constants import (
    ARCHIVE_FORMATS,
    CDF_FILE_NAME,
    EXIT_DIAGNOSTICS,
    GLUE_FILE_SUFFIX,
    WIRING_FILE_SUFFIX,
)
from comodi.utils.storage_helpers import atomic_write_bytes

logger = logging.getLogger("comodi.cli")
console = Console()


def _read_interface(path: Path, profile: str) -> InterfaceModel:
    """An interface model XML file, or a source file extracted with ``profile``."""
    if path.suffix.lower() == ".xml":
        return xml_to_interface(path.read_bytes())
    return extract_with_tree(load_profile(profile), path.read_text(encoding="utf-8"), str(path)).model


def _print_descriptor(descriptor: ComponentDescriptor) -> None:
    table = Table(title=f"{descriptor.name} {descriptor.version} ({descriptor.language})")
    table.add_column("Kind", style="cyan")
    table.add_column("Port")
    table.add_column("Global name", style="dim")
    table.add_column("Signature")
    for port in descriptor.ports:
        params = ", ".join(
            f"{p.type_name} {p.name}" + (f" = {p.default}" if p.default is not None else "") for p in port.params
        )
        table.add_row(port.kind.value, port.local_name, port.global_name, f"{port.return_type} ({params})")
    console.print(table)


def extract(
    source: Path = typer.Argument(..., exists=True, dir_okay=False, help="Author source file (read only)"),
    profile: str = typer.Option("c_subset", "--profile", "-p", help="Language profile name or file"),
    output_format: OutputFormat = typer.Option(OutputFormat.XML, "--format", help=FORMAT_OPTION_HELP),
    output: Optional[Path] = typer.Option(None, "--output", "-o", help="Write the XML to a file"),
    dump_tree: Optional[Path] = typer.Option(None, "--dump-tree", help="Write the parse tree XML here"),
) -> None:
    """Extract the interface model of a C or Fortran source file."""
    with cli_errors():
        result = extract_with_tree(load_profile(profile), source.read_text(encoding="utf-8"), str(source))
        if dump_tree is not None:
            emit_text(tree_to_xml(result.tree), dump_tree)

        if output_format == OutputFormat.XML:
            emit_text(interface_to_xml(result.model), output)
            return

    model = result.model
    table = Table(title=f"{model.source} ({model.language})")
    table.add_column("Function", style="cyan")
    table.add_column("Defined", justify="center")
    table.add_column("Returns")
    table.add_column("Parameters")
    for sig in model.functions:
        params = ", ".join(f"{p.type_name} {p.name} [{p.passing.value}]" for p in sig.params)
        table.add_row(sig.name, "yes" if sig.defined else "no", sig.return_type, params)
    console.print(table)
    if model.unresolved:
        err_console.print(f"[yellow]Unresolved:[/yellow] {', '.join(model.unresolved)}", highlight=False)


def describe(
    interface: Path = typer.Argument(..., exists=True, dir_okay=False, help="Interface model XML or source file"),
    answers_file: Path = typer.Option(..., "--answers", "-a", exists=True, dir_okay=False, help="Author answers XML"),
    profile: str = typer.Option("c_subset", "--profile", "-p", help="Profile used when given a source file"),
    name: Optional[str] = typer.Option(None, "--name", help="Component name"),
    component_version: Optional[str] = typer.Option(None, "--version", help="MAJOR.MINOR.PATCH"),
    author: Optional[str] = typer.Option(None, "--author"),
    license_name: Optional[str] = typer.Option(None, "--license"),
    open_source: Optional[bool] = typer.Option(None, "--open-source/--closed-source"),
    output_format: OutputFormat = typer.Option(OutputFormat.XML, "--format", help=FORMAT_OPTION_HELP),
    output: Optional[Path] = typer.Option(None, "--output", "-o", help="Write the CDF to a file"),
) -> None:
    """Draft and validate a component descriptor from an interface and author answers."""
    with cli_errors():
        model = _read_interface(interface, profile)
        answers = load_answers(answers_file.read_bytes())

        merged = answers.meta.model_dump() if answers.meta else {}
        options = {
            "name": name,
            "version": component_version,
            "author": author,
            "license": license_name,
            "open_source": open_source,
        }
        merged.update({key: value for key, value in options.items() if value is not None})
        if "name" not in merged or "version" not in merged:
            raise typer.BadParameter("component name and version come from <meta> in the answers or --name/--version")
        meta = DescriptorMeta.model_validate(merged)

        descriptor = draft_descriptor(model, answers, meta)
        exit_on_errors(validate_cdf(descriptor))

        if output_format == OutputFormat.XML:
            emit_text(write_cdf(descriptor), output)
        else:
            _print_descriptor(descriptor)


def glue(
    cdf: Path = typer.Argument(..., exists=True, dir_okay=False, help="Component descriptor"),
    out_dir: Path = typer.Option(Path("generated"), "--out-dir", "-o", file_okay=False, help="Directory for generated files"),
) -> None:
    """Generate the glue source and wiring metadata into a separate directory."""
    with cli_errors():
        descriptor = read_cdf(cdf.read_bytes())
        exit_on_errors(validate_cdf(descriptor))
        written = write_artifact(emit_glue(plan_glue(descriptor)), out_dir)
    for path in written:
        console.print(f"[green]Generated[/green] {path}", highlight=False)


def _platform_binary(value: str) -> tuple[str, Path]:
    platform, sep, path = value.partition("=")
    if not sep or not platform or not path:
        raise typer.BadParameter(f"expected PLATFORM=PATH, got '{value}'", param_hint="--binary")
    return platform, Path(path)


def pack_component(
    cdf: Path = typer.Argument(..., exists=True, dir_okay=False, help="Component descriptor"),
    glue_dir: Path = typer.Option(..., "--glue-dir", exists=True, file_okay=False, help="Directory written by 'comodi glue'"),
    output: Path = typer.Option(..., "--output", "-o", help="Archive file to write"),
    sources: list[Path] = typer.Option([], "--source", exists=True, dir_okay=False, help="Author source (open-source packages)"),
    binaries: list[str] = typer.Option([], "--binary", help="PLATFORM=PATH of a compiled binary"),
    resources: list[Path] = typer.Option([], "--resource", exists=True, dir_okay=False, help="Extra resource file"),
    archive_format: str = typer.Option("zip", "--archive-format", help="zip or tar.gz"),
) -> None:
    """Pack descriptor, glue, binaries and optional sources into an archive."""
    if archive_format not in ARCHIVE_FORMATS:
        raise typer.BadParameter(f"use one of {', '.join(ARCHIVE_FORMATS)}", param_hint="--archive-format")
    staged_binaries = [_platform_binary(value) for value in binaries]

    with cli_errors():
        cdf_data = cdf.read_bytes()
        descriptor = read_cdf(cdf_data)
        files = [PackageFile(CDF_FILE_NAME, FileRole.CDF, cdf_data)]
        for suffix, role in ((GLUE_FILE_SUFFIX, FileRole.GLUE_SOURCE), (WIRING_FILE_SUFFIX, FileRole.WIRING_METADATA)):
            generated = glue_dir / f"{descriptor.name}{suffix}"
            files.append(PackageFile(f"glue/{generated.name}", role, generated.read_bytes()))
        files.extend(PackageFile(f"src/{path.name}", FileRole.SOURCE, path.read_bytes()) for path in sources)
        files.extend(
            PackageFile(f"bin/{platform}/{path.name}", FileRole.BINARY, path.read_bytes(), platform)
            for platform, path in staged_binaries
        )
        files.extend(PackageFile(f"res/{path.name}", FileRole.RESOURCE, path.read_bytes()) for path in resources)

        manifest = PackageManifest.from_files(
            descriptor.name, descriptor.version, descriptor.language, descriptor.open_source, files
        )
        archive = pack(manifest, {f.path: f.data for f in files}, archive_format)
        atomic_write_bytes(output, archive)

    logger.info(f"Packed {descriptor.name} {descriptor.version} into {output}")
    console.print(f"[green]Packed[/green] {descriptor.name} {descriptor.version} -> {output}", highlight=False)


def register_package(
    archive: Path = typer.Argument(..., exists=True, dir_okay=False, help="Package archive"),
    endpoint: Optional[str] = typer.Option(None, "--endpoint", "-e", help="Repository URL (default: repository.endpoint)"),
    output_format: OutputFormat = typer.Option(OutputFormat.TEXT, "--format", help=FORMAT_OPTION_HELP),
) -> None:
    """Upload a package to the repository."""
    with cli_errors():
        url = endpoint or configured_endpoint()
        receipt = register(archive.read_bytes(), url)

    if output_format == OutputFormat.XML:
        emit_text(receipt_to_xml(receipt))
    else:
        console.print(f"[green]Registered[/green] {receipt.name} {receipt.version}", highlight=False)
        console.print(f"  Digest: {receipt.digest}")
        console.print(f"  At: {receipt.registered_at.isoformat(timespec='seconds')}")


def compile_sources(
    files: list[Path] = typer.Argument(..., exists=True, dir_okay=False, help="Author sources, glue source and headers"),
    language: str = typer.Option("C", "--language", "-l", help="C or Fortran77"),
    platform: Optional[str] = typer.Option(None, "--platform", help="Target platform (default: compiler.platform)"),
    output: Path = typer.Option(Path("libcomponent.so"), "--output", "-o", help="Where to write the binary"),
    output_format: OutputFormat = typer.Option(OutputFormat.TEXT, "--format", help=FORMAT_OPTION_HELP),
) -> None:
    """Compile a source bundle with the configured local or remote service."""
    with cli_errors():
        config = load_config().compiler
        request = CompileRequest(
            files={path.name: path.read_bytes() for path in files},
            language=language,
            platform=platform or config.platform,
            output_name=output.name,
        )
        result = compile_bundle(request, service_from_config(config))
        if result.success and result.binary is not None:
            atomic_write_bytes(output, result.binary)

    if output_format == OutputFormat.XML:
        emit_text(compile_result_to_xml(result))
    elif result.success:
        console.print(f"[green]Compiled[/green] {len(request.files)} files for {result.platform} -> {output}", highlight=False)
    if not result.success:
        err_console.print(result.log, markup=False, highlight=False)
        err_console.print("[red]Compilation failed[/red]")
        raise typer.Exit(EXIT_DIAGNOSTICS)
