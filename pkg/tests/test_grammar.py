"""Tests for the EBNF reader, printer and validator."""

import pytest

from comodi.core.errors import DuplicateRuleError, GrammarError, GrammarSyntaxError, MissingSectionMarkerError
from comodi.grammar import load_grammar, parse_ebnf, pretty_print, validate_grammar
from comodi.grammar.model import (
    Alternation,
    Empty,
    Exclusion,
    Group,
    NonTerminal,
    OptionalPart,
    Repetition,
    Sequence,
    SpecialClass,
    Terminal,
)
from comodi.grammar.validate import nullable_rules


def codes(diagnostics):
    return sorted(d.code for d in diagnostics)


class TestParse:
    def test_balanced_parentheses(self):
        grammar = parse_ebnf('s = "(", s, ")" | ;')

        assert grammar.start_symbol == "s"
        assert grammar.lexical_rules == ()
        assert grammar.rules["s"] == Alternation(
            (Sequence((Terminal("("), NonTerminal("s"), Terminal(")"))), Empty())
        )

    def test_first_rule_is_start_symbol(self):
        grammar = parse_ebnf('b = "x"; a = b;')

        assert grammar.start_symbol == "b"
        assert list(grammar.rules) == ["b", "a"]

    def test_optional_repetition_group(self):
        grammar = parse_ebnf('r = [ "a" ], { "b" }, ( "c" | "d" );')

        assert grammar.rules["r"] == Sequence(
            (
                OptionalPart(Terminal("a")),
                Repetition(Terminal("b")),
                Group(Alternation((Terminal("c"), Terminal("d")))),
            )
        )

    def test_repetition_factor_expands_copies(self):
        grammar = parse_ebnf('r = 3 * "a";')

        assert grammar.rules["r"] == Sequence((Terminal("a"), Terminal("a"), Terminal("a")))

    def test_repetition_factor_on_braces_sets_minimum(self):
        grammar = parse_ebnf('r = 2 * { "a" };')

        assert grammar.rules["r"] == Repetition(Terminal("a"), 2)

    def test_both_quote_styles(self):
        grammar = parse_ebnf("""r = "'", '"';""")

        assert grammar.rules["r"] == Sequence((Terminal("'"), Terminal('"')))

    def test_lexical_section_with_skip_and_chained_exception(self):
        text = """
        (*LEXICAL*)
        (*SKIP*)
        ws = ? whitespace ?;
        word = ? letter ?, { ? letter ? };
        other = ? any ? - "*" - "/";
        (*SYNTAX*)
        s = word, { word };
        """
        grammar = parse_ebnf(text)

        assert grammar.lexical_names() == ["ws", "word", "other"]
        assert grammar.lexical_rule("ws").skip is True
        assert grammar.lexical_rule("word").skip is False
        assert grammar.lexical_rule("other").expr == Exclusion(
            Exclusion(SpecialClass("any"), Terminal("*")), Terminal("/")
        )
        assert list(grammar.rules) == ["s"]

    def test_plain_comments_are_ignored(self):
        grammar = parse_ebnf('(* a comment *) r = "a" (* another *) ;')

        assert grammar.rules["r"] == Terminal("a")


class TestParseErrors:
    def test_missing_semicolon_reports_position(self):
        with pytest.raises(GrammarSyntaxError) as exc_info:
            parse_ebnf('r = "a"\ns = "b";', origin="bad.ebnf")

        assert exc_info.value.line == 2
        assert exc_info.value.column == 1
        assert "bad.ebnf" in str(exc_info.value)

    def test_unterminated_terminal(self):
        with pytest.raises(GrammarSyntaxError, match="unterminated terminal"):
            parse_ebnf('r = "abc;')

    def test_unknown_special_sequence(self):
        with pytest.raises(GrammarSyntaxError, match="unknown special sequence"):
            parse_ebnf("r = ? upper ?;")

    def test_duplicate_rule(self):
        with pytest.raises(DuplicateRuleError) as exc_info:
            parse_ebnf('r = "a";\nr = "b";')

        assert exc_info.value.name == "r"
        assert exc_info.value.line == 2

    def test_lexical_without_syntax_section(self):
        with pytest.raises(MissingSectionMarkerError):
            parse_ebnf('(*LEXICAL*)\nword = ? letter ?;')

    def test_skip_outside_lexical_section(self):
        with pytest.raises(MissingSectionMarkerError):
            parse_ebnf('(*SYNTAX*)\n(*SKIP*)\ns = "a";')

    def test_rule_before_first_marker(self):
        with pytest.raises(MissingSectionMarkerError):
            parse_ebnf('s = "a";\n(*SYNTAX*)\nt = "b";')

    def test_exception_needs_terminal_operands(self):
        with pytest.raises(GrammarSyntaxError, match="exception operands"):
            parse_ebnf('r = x - "a"; x = "b";')

    def test_empty_grammar(self):
        with pytest.raises(GrammarSyntaxError):
            parse_ebnf("   ")


class TestPrettyPrint:
    @pytest.mark.parametrize("name", ["c_subset", "fortran77_subset"])
    def test_shipped_grammars_round_trip(self, name):
        grammar = load_grammar(name)

        assert parse_ebnf(pretty_print(grammar)) == grammar

    def test_round_trip_keeps_empty_alternative_and_minimum(self):
        grammar = parse_ebnf('s = "(", s, ")" | ; t = 2 * { "a" | "b" }, [ s ];')

        printed = pretty_print(grammar)

        assert parse_ebnf(printed) == grammar
        assert pretty_print(parse_ebnf(printed)) == printed


class TestLoadGrammar:
    def test_shipped_by_name(self):
        grammar = load_grammar("c_subset")

        assert grammar.start_symbol == "translation_unit"
        assert grammar.origin == "c_subset.ebnf"

    def test_from_file(self, tmp_path):
        path = tmp_path / "tiny.ebnf"
        path.write_text('s = "x";')

        assert load_grammar(path).rules["s"] == Terminal("x")

    def test_unknown_name(self):
        with pytest.raises(GrammarError):
            load_grammar("cobol")


class TestValidate:
    @pytest.mark.parametrize("name", ["c_subset", "fortran77_subset"])
    def test_shipped_grammars_have_no_errors(self, name):
        assert not [d for d in validate_grammar(load_grammar(name)) if d.is_error]

    def test_undefined_nonterminal(self):
        diagnostics = validate_grammar(parse_ebnf("s = missing;"))

        assert codes(diagnostics) == ["UndefinedNonterminal"]
        assert diagnostics[0].subject == "missing"

    def test_direct_left_recursion(self):
        diagnostics = validate_grammar(parse_ebnf('e = e, "+", "x" | "x";'))

        assert "LeftRecursion" in codes(diagnostics)

    def test_hidden_left_recursion_through_nullable_prefix(self):
        diagnostics = validate_grammar(parse_ebnf('a = [ "x" ], b; b = a, "y" | "z";'))

        assert {d.subject for d in diagnostics if d.code == "LeftRecursion"} == {"a", "b"}

    def test_unreachable_rule_is_a_warning(self):
        diagnostics = validate_grammar(parse_ebnf('s = "a"; t = "b";'))

        assert codes(diagnostics) == ["UnreachableRule"]
        assert not diagnostics[0].is_error

    def test_nullable_repetition_is_a_warning(self):
        diagnostics = validate_grammar(parse_ebnf('s = { [ "a" ] };'))

        assert codes(diagnostics) == ["NullableRepetition"]

    def test_lexical_rule_referencing_syntax_rule(self):
        text = '(*LEXICAL*)\nword = s;\n(*SYNTAX*)\ns = word;'
        diagnostics = validate_grammar(parse_ebnf(text))

        assert "CrossLevelReference" in codes(diagnostics)

    def test_nullable_rules(self):
        grammar = parse_ebnf('s = a, b; a = [ "x" ]; b = { "y" }; c = "z";')

        assert nullable_rules(grammar) == {"s", "a", "b"}
