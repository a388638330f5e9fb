"""Repository server CLI commands for COMODI."""

from pathlib import Path
from typing import Optional

import typer
from rich.console import Console
from rich.table import Table

from comodi.repo import IndexEntry, LocalCompileService, RepoClient, RepoIndex, RepoServer
from comodi.repo.index import index_to_xml
from comodi.utils.cli_helpers import (
    FORMAT_OPTION_HELP,
    OutputFormat,
    cli_errors,
    configured_endpoint,
    emit_text,
    load_config,
)
from comodi.utils.constants import DEFAULT_REPO_HOST, DEFAULT_REPO_PORT

app = typer.Typer(help="Component repository commands.", no_args_is_help=True)
console = Console()


@app.command("serve")
def serve(
    repo_dir: Path = typer.Option(..., "--dir", file_okay=False, help="Repository directory (created if missing)"),
    host: str = typer.Option(DEFAULT_REPO_HOST, "--host", help="Address to bind"),
    port: int = typer.Option(DEFAULT_REPO_PORT, "--port", "-p", min=0, max=65535, help="Port to bind (0 picks one)"),
    with_compiler: bool = typer.Option(False, "--with-compiler", help="Also serve POST /compile with compiler.command"),
) -> None:
    """Serve a repository directory until interrupted."""
    with cli_errors():
        compiler = None
        if with_compiler:
            settings = load_config().compiler
            compiler = LocalCompileService(settings.command, settings.timeout_seconds)
        server = RepoServer(repo_dir, host, port, compiler)
        console.print(f"[green]Serving[/green] {repo_dir} at {server.url}", highlight=False)
        server.serve_forever()
    console.print("[dim]Repository server stopped.[/dim]")


@app.command("list")
def list_packages(
    repo_dir: Optional[Path] = typer.Option(None, "--dir", file_okay=False, help="Read a repository directory directly"),
    endpoint: Optional[str] = typer.Option(None, "--endpoint", "-e", help="Repository URL (default: repository.endpoint)"),
    output_format: OutputFormat = typer.Option(OutputFormat.TEXT, "--format", help=FORMAT_OPTION_HELP),
) -> None:
    """List registered packages."""
    with cli_errors():
        entries: list[IndexEntry]
        if repo_dir is not None:
            entries = RepoIndex(repo_dir).list_all()
        else:
            entries = RepoClient(endpoint or configured_endpoint()).index()

    if output_format == OutputFormat.XML:
        emit_text(index_to_xml(entries))
        return
    if not entries:
        console.print("[dim]No packages registered.[/dim]")
        return

    table = Table(title="Packages")
    table.add_column("Name", style="cyan")
    table.add_column("Version")
    table.add_column("Digest", style="dim", max_width=16)
    table.add_column("Registered")
    for entry in entries:
        table.add_row(entry.name, entry.version, entry.digest[:16], entry.registered_at.isoformat(timespec="seconds"))
    console.print(table)
