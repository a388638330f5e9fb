"""CLI utilities for output routing and the exit-code contract."""

import logging
from contextlib import contextmanager
from enum import Enum
from pathlib import Path
from typing import Iterator, Optional

import typer
from pydantic import ValidationError
from rich.console import Console
from rich.markup import escape

from comodi.core.config import Config, ConfigStorage
from comodi.core.diagnostics import Diagnostic, Severity
from comodi.core.errors import ComodiError, ConfigurationError, EnvironmentProblem
from comodi.utils.constants import EXIT_DIAGNOSTICS, EXIT_ENVIRONMENT
from comodi.utils.storage_helpers import StorageError, atomic_write_text

logger = logging.getLogger("comodi.cli")

# stdout carries artifacts, everything addressed to the user goes to stderr
err_console = Console(stderr=True)


class OutputFormat(str, Enum):
    XML = "xml"
    TEXT = "text"


FORMAT_OPTION_HELP = "Output format: xml or text"


# ============================================================================
# Exit Codes
# ============================================================================


def exit_code_for(error: BaseException) -> int:
    """Map an exception to the CLI exit code.

    Environment failures (configuration, transport, compiler, I/O) give 3;
    every other toolchain error is a diagnostic failure and gives 1.
    """
    if isinstance(error, (EnvironmentProblem, StorageError, OSError)):
        return EXIT_ENVIRONMENT
    return EXIT_DIAGNOSTICS


@contextmanager
def cli_errors() -> Iterator[None]:
    """Turn toolchain exceptions into an error line on stderr and an exit code."""
    try:
        yield
    except (ComodiError, ValidationError, StorageError, OSError) as e:
        code = exit_code_for(e)
        logger.debug(f"Command failed with exit code {code}: {e}")
        err_console.print(f"[red]Error:[/red] {escape(str(e))}", highlight=False, soft_wrap=True)
        raise typer.Exit(code) from e


# ============================================================================
# Diagnostics
# ============================================================================

SEVERITY_COLORS: dict[Severity, str] = {
    Severity.ERROR: "red",
    Severity.WARNING: "yellow",
}


def print_diagnostics(diagnostics: list[Diagnostic]) -> None:
    """Print findings to stderr, one per line."""
    for d in diagnostics:
        color = SEVERITY_COLORS[d.severity]
        subject = escape(f" [{d.subject}]") if d.subject else ""
        err_console.print(
            f"[{color}]{d.severity.value}[/{color}] {d.code}{subject}: {escape(d.message)}",
            highlight=False,
            soft_wrap=True,
        )


def exit_on_errors(diagnostics: list[Diagnostic]) -> None:
    """Print findings and exit with 1 when any of them is an error."""
    print_diagnostics(diagnostics)
    if any(d.is_error for d in diagnostics):
        raise typer.Exit(EXIT_DIAGNOSTICS)


# ============================================================================
# Output
# ============================================================================


def emit_text(text: str, output: Optional[Path] = None) -> None:
    """Write an artifact to a file, or verbatim to stdout."""
    if output is not None:
        atomic_write_text(output, text)
        err_console.print(f"[green]Wrote[/green] {output}", highlight=False)
        return
    typer.echo(text, nl=not text.endswith("\n"))


def load_config() -> Config:
    return ConfigStorage().load()


def configured_endpoint() -> str:
    """The repository endpoint from the configuration.

    Raises:
        ConfigurationError: No endpoint is configured
    """
    endpoint = load_config().repository.endpoint
    if not endpoint:
        raise ConfigurationError("no repository endpoint: pass --endpoint or set repository.endpoint")
    return endpoint
