"""Main CLI entry point for COMODI."""

import logging

import typer
from rich.console import Console

from comodi import __version__
from comodi.cli import config_commands, developer_commands, grammar_commands, project_commands, repo_commands
from comodi.core.config import ConfigStorage
from comodi.utils.cli_helpers import cli_errors
from comodi.utils.logging import setup_logging

app = typer.Typer(
    name="comodi",
    help="Component developer toolchain and wiring framework for C and Fortran code.",
    no_args_is_help=True,
)
console = Console()

# Add subcommands
app.add_typer(grammar_commands.app, name="grammar")
app.add_typer(repo_commands.app, name="repo")
app.add_typer(config_commands.app, name="config")

# Developer pipeline
app.command("extract")(developer_commands.extract)
app.command("describe")(developer_commands.describe)
app.command("glue")(developer_commands.glue)
app.command("pack")(developer_commands.pack_component)
app.command("register")(developer_commands.register_package)
app.command("compile")(developer_commands.compile_sources)

# User pipeline
app.command("fetch")(project_commands.fetch_package)
app.command("validate")(project_commands.validate)
app.command("run")(project_commands.run_project)


@app.callback()
def main(
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Log to standard error as well"),
) -> None:
    """Set up logging once per process."""
    with cli_errors():
        level_name = ConfigStorage().load().logging.level
    try:
        setup_logging(level=logging.DEBUG if verbose else level_name, console=verbose)
    except OSError:
        logging.getLogger("comodi").addHandler(logging.NullHandler())


@app.command()
def version() -> None:
    """Show version information."""
    console.print(f"comodi version {__version__}")


if __name__ == "__main__":
    app()
