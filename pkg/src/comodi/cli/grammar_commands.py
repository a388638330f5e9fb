"""Grammar CLI commands for COMODI."""

from pathlib import Path
from typing import Optional

import typer
from rich.console import Console
from rich.table import Table

from comodi.automata import build_network, recognize, tokenize, tokens_from_symbols
from comodi.automata.dump import network_to_xml, tree_to_xml
from comodi.core.diagnostics import diagnostics_to_xml, has_errors
from comodi.grammar import load_grammar, pretty_print, validate_grammar
from comodi.grammar.validate import nullable_rules
from comodi.utils.cli_helpers import (
    FORMAT_OPTION_HELP,
    OutputFormat,
    cli_errors,
    emit_text,
    exit_on_errors,
    load_config,
    print_diagnostics,
)
from comodi.utils.constants import EXIT_DIAGNOSTICS

app = typer.Typer(help="EBNF grammar commands.", no_args_is_help=True)
console = Console()


@app.command("check")
def check_grammar(
    grammar_file: str = typer.Argument(..., help="EBNF file or shipped grammar name (e.g. c_subset)"),
    output_format: OutputFormat = typer.Option(OutputFormat.TEXT, "--format", help=FORMAT_OPTION_HELP),
    dump_automata: Optional[Path] = typer.Option(None, "--dump-automata", help="Write the automata network XML here"),
) -> None:
    """Parse and validate a grammar."""
    with cli_errors():
        grammar = load_grammar(grammar_file)
    diagnostics = validate_grammar(grammar)
    print_diagnostics(diagnostics)

    if output_format == OutputFormat.XML:
        emit_text(diagnostics_to_xml(diagnostics, grammar.origin))
    else:
        nullable = nullable_rules(grammar)
        table = Table(title=grammar.origin)
        table.add_column("Rule", style="cyan")
        table.add_column("Level")
        table.add_column("Nullable", justify="center")
        for rule in grammar.lexical_rules:
            table.add_row(rule.name, "lexical (skip)" if rule.skip else "lexical", "")
        for name in grammar.rules:
            marker = "start" if name == grammar.start_symbol else "syntax"
            table.add_row(name, marker, "yes" if name in nullable else "")
        console.print(table)

    if has_errors(diagnostics):
        raise typer.Exit(EXIT_DIAGNOSTICS)

    if dump_automata is not None:
        with cli_errors():
            emit_text(network_to_xml(build_network(grammar)), dump_automata)


@app.command("dump")
def dump_grammar(
    grammar_file: str = typer.Argument(..., help="EBNF file or shipped grammar name"),
    what: str = typer.Option("network", "--what", help="network, tree or ebnf"),
    input_file: Optional[Path] = typer.Option(None, "--input", exists=True, dir_okay=False, help="Text to parse for --what tree"),
    output: Optional[Path] = typer.Option(None, "--output", "-o", help="Write to a file instead of stdout"),
) -> None:
    """Dump the automata network, a parse tree or the normalized EBNF."""
    if what not in ("network", "tree", "ebnf"):
        raise typer.BadParameter(f"unknown dump '{what}', use network, tree or ebnf", param_hint="--what")
    if what == "tree" and input_file is None:
        raise typer.BadParameter("--what tree needs --input", param_hint="--input")

    with cli_errors():
        grammar = load_grammar(grammar_file)
        if what == "ebnf":
            emit_text(pretty_print(grammar), output)
            return

        exit_on_errors(validate_grammar(grammar))
        net = build_network(grammar)
        if what == "network":
            emit_text(network_to_xml(net), output)
            return

        assert input_file is not None
        text = input_file.read_text(encoding="utf-8")
        fuel = load_config().engine.fuel
        # Grammars without a lexical section take whitespace-separated terminals
        tokens = tokenize(net, text, fuel) if net.lexical else tokens_from_symbols(text.split())
        emit_text(tree_to_xml(recognize(net, tokens, fuel=fuel)), output)
