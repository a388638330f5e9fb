"""Configuration CLI commands for COMODI."""

import typer
from rich.console import Console
from rich.table import Table

from comodi.core.config import Config, ConfigStorage, config_to_xml
from comodi.utils.cli_helpers import FORMAT_OPTION_HELP, OutputFormat, cli_errors, emit_text

app = typer.Typer(help="Configuration management commands.", no_args_is_help=True)
console = Console()


def get_config_storage() -> ConfigStorage:
    """Get config storage instance."""
    return ConfigStorage()


@app.command("show")
def show_config(
    output_format: OutputFormat = typer.Option(OutputFormat.TEXT, "--format", help=FORMAT_OPTION_HELP),
) -> None:
    """Show current configuration."""
    storage = get_config_storage()
    with cli_errors():
        config = storage.load()

    if output_format == OutputFormat.XML:
        emit_text(config_to_xml(config))
        return

    console.print(f"[dim]{storage.config_file}[/dim]", highlight=False)
    for section, values in config.model_dump().items():
        table = Table(title=section, show_header=False, title_justify="left")
        table.add_column("Key", style="cyan")
        table.add_column("Value")
        for key, value in values.items():
            shown = str(value) if value != "" else "[dim]Not set[/dim]"
            table.add_row(f"{section}.{key}", shown)
        console.print(table)


@app.command("set")
def set_config(
    key: str = typer.Argument(..., help="Dotted key, e.g. compiler.command"),
    value: str = typer.Argument(..., help="New value"),
) -> None:
    """Set one configuration value."""
    with cli_errors():
        get_config_storage().update(**{key: value})
    console.print(f"[green]Configuration updated:[/green] {key} = {value}", highlight=False)


@app.command("reset")
def reset_config(
    confirm: bool = typer.Option(False, "--yes", "-y", help="Skip confirmation"),
) -> None:
    """Reset configuration to defaults."""
    if not confirm:
        confirm = typer.confirm("Are you sure you want to reset configuration to defaults?")

    if confirm:
        with cli_errors():
            get_config_storage().save(Config())
        console.print("[green]Configuration reset to defaults.[/green]")
    else:
        console.print("[yellow]Cancelled.[/yellow]")
