"""Tests for automata construction, lexing and recognition."""

import pytest

from comodi.automata import (
    accepts,
    build_network,
    lex,
    network_to_single_pda,
    recognize,
    simulate_pda,
    tokenize,
    tokens_from_symbols,
)
from comodi.automata.dump import network_to_xml, tree_to_xml
from comodi.automata.network import CallNonterminal, Epsilon, MatchClass, MatchTerminal, StackOpKind
from comodi.core.errors import FuelExhaustedError, GrammarError, GrammarRejectedError, LexicalError, ParseError
from comodi.grammar import load_grammar, parse_ebnf
from comodi.utils.constants import END_OF_INPUT

STATEMENTS = """
(*LEXICAL*)
(*SKIP*)
space = ? whitespace ?, { ? whitespace ? };
(*SKIP*)
comment = "#", { ? any ? - ? eol ? };
keyword = "if";
ident = ? letter ?, { ? letter ? | ? digit ? };
number = ? digit ?, { ? digit ? };
(*SYNTAX*)
program = { stmt };
stmt = keyword, ident | ident | number;
"""

LINE_COMMENTS = """
(*LEXICAL*)
(*SKIP*)
space = " ", { " " };
(*SKIP*)
line_comment = ? eol ?, "%", { ? any ? - ? eol ? };
newline = ? eol ?;
word = ? letter ?, { ? letter ? };
(*SYNTAX*)
text = { word | newline };
"""


@pytest.fixture(scope="module")
def statements():
    return build_network(parse_ebnf(STATEMENTS, "statements.ebnf"))


class TestBuildNetwork:
    def test_one_automaton_per_rule(self, statements):
        assert list(statements.automata) == ["program", "stmt"]
        assert [entry.kind for entry in statements.lexical] == ["space", "comment", "keyword", "ident", "number"]
        assert [entry.skip for entry in statements.lexical] == [True, True, False, False, False]

    def test_terminal_is_a_single_transition(self):
        net = build_network(parse_ebnf('s = "x";'))
        automaton = net.automata["s"]

        assert automaton.state_count == 2
        assert [t.condition for t in automaton.transitions] == [MatchTerminal("x")]

    def test_nonterminal_becomes_call(self):
        net = build_network(parse_ebnf('s = t; t = "x";'))

        assert net.automata["s"].transitions[0].condition == CallNonterminal("t")

    def test_group_pushes_and_pops_a_marker(self):
        net = build_network(parse_ebnf('s = ( "a" | "b" ), "c";'))
        automaton = net.automata["s"]
        ops = [t.stack_op for t in automaton.transitions if t.stack_op.kind != StackOpKind.NONE]

        assert [op.kind for op in ops] == [StackOpKind.PUSH, StackOpKind.POP_EXPECT]
        assert ops[0].marker == ops[1].marker
        assert automaton.markers == [ops[0].marker]

    def test_optional_adds_epsilon(self):
        net = build_network(parse_ebnf('s = [ "a" ];'))

        assert Epsilon() in [t.condition for t in net.automata["s"].transitions]

    def test_exclusion_folds_into_class(self):
        net = build_network(parse_ebnf('(*LEXICAL*)\nc = ? any ? - "*" - ? eol ?;\n(*SYNTAX*)\ns = c;'))
        condition = net.lexical[0].automaton.transitions[0].condition

        assert condition == MatchClass("any", ("*",), ("eol",))
        assert condition.accepts("a")
        assert not condition.accepts("*")
        assert not condition.accepts("\n")

    def test_rejects_left_recursion(self):
        with pytest.raises(GrammarRejectedError) as exc_info:
            build_network(parse_ebnf('e = e, "+" | "x";'))

        assert [d.code for d in exc_info.value.diagnostics] == ["LeftRecursion"]

    @pytest.mark.parametrize("name", ["c_subset", "fortran77_subset"])
    def test_shipped_grammars_build(self, name):
        net = build_network(load_grammar(name))

        assert net.start_symbol in net.automata
        assert net.lexical


class TestLexer:
    def test_tokens_and_positions(self, statements):
        result = lex(statements, "if x1 # note\nfoo 42")

        assert [(t.kind, t.text, t.line, t.column, t.offset) for t in result.tokens] == [
            ("keyword", "if", 1, 1, 0),
            ("ident", "x1", 1, 4, 3),
            ("ident", "foo", 2, 1, 13),
            ("number", "42", 2, 5, 17),
            (END_OF_INPUT, "", 2, 7, 19),
        ]
        assert [c.text for c in result.comments] == ["# note"]
        assert len(result.skipped) == 5

    def test_lexemes_tile_the_input(self, statements):
        text = "  if x1 # note\n\tfoo 42 # tail"
        result = lex(statements, text)

        lexemes = sorted(result.tokens + result.skipped, key=lambda t: t.offset)

        assert "".join(t.text for t in lexemes) == text
        assert set(result.comments) <= set(result.skipped)

    def test_start_of_input_counts_as_a_line_break(self):
        net = build_network(parse_ebnf(LINE_COMMENTS, "lines.ebnf"))

        result = lex(net, "% head\nab\n% tail")

        assert [c.text for c in result.comments] == ["% head", "\n% tail"]
        assert [(t.kind, t.text) for t in result.tokens] == [("newline", "\n"), ("word", "ab"), (END_OF_INPUT, "")]

    def test_line_anchored_rule_needs_a_line_start(self):
        net = build_network(parse_ebnf(LINE_COMMENTS, "lines.ebnf"))

        with pytest.raises(LexicalError) as exc_info:
            lex(net, "ab % tail")

        assert (exc_info.value.line, exc_info.value.column) == (1, 4)

    def test_longest_match_beats_declaration_order(self, statements):
        tokens = tokenize(statements, "iffy")

        assert (tokens[0].kind, tokens[0].text) == ("ident", "iffy")

    def test_first_declared_rule_wins_ties(self, statements):
        assert tokenize(statements, "if")[0].kind == "keyword"

    def test_lexical_error_position(self, statements):
        with pytest.raises(LexicalError) as exc_info:
            tokenize(statements, "if x\n  $")

        assert (exc_info.value.line, exc_info.value.column, exc_info.value.char) == (2, 3, "$")

    def test_syntactic_grammar_cannot_lex(self):
        net = build_network(parse_ebnf('s = "x";'))

        with pytest.raises(GrammarError, match="no lexical rules"):
            lex(net, "x")


class TestRecognize:
    def test_parse_tree(self, statements):
        tree = recognize(statements, tokenize(statements, "if x 7"))

        assert tree.label == "program"
        assert tree.span == (0, 3)
        stmts = tree.find_all("stmt")
        assert [s.span for s in stmts] == [(0, 2), (2, 3)]
        assert [leaf.text for leaf in stmts[0].leaves()] == ["if", "x"]
        assert tree.depth() == 2

    def test_empty_input(self, statements):
        tree = recognize(statements, tokenize(statements, "  # only a comment"))

        assert tree.span == (0, 0)
        assert tree.children == ()

    def test_parse_error_reports_furthest_failure(self, statements):
        tokens = tokenize(statements, "x if 3")

        with pytest.raises(ParseError) as exc_info:
            recognize(statements, tokens)

        assert exc_info.value.position == 2
        assert exc_info.value.expected == ["ident"]
        assert exc_info.value.token.text == "3"

    def test_memoization_does_not_change_the_tree(self, statements):
        tokens = tokenize(statements, "if a b if c 1 2")

        assert recognize(statements, tokens, memoize=False) == recognize(statements, tokens)

    def test_fuel_exhaustion(self, statements):
        with pytest.raises(FuelExhaustedError):
            recognize(statements, tokenize(statements, "a b c d e f"), fuel=3)

    def test_requires_end_of_input_token(self, statements):
        with pytest.raises(ValueError):
            recognize(statements, tokenize(statements, "a")[:-1])

    def test_accepts(self, statements):
        assert accepts(statements, tokenize(statements, "if a"))
        assert not accepts(statements, tokenize(statements, "if 1"))

    def test_first_parse_in_declaration_order(self):
        net = build_network(parse_ebnf('s = a | b; a = "x"; b = "x";'))

        tree = recognize(net, tokens_from_symbols(["x"]))

        assert [child.label for child in tree.children] == ["a"]


class TestPda:
    def test_flattened_pda_agrees_on_statements(self, statements):
        pda = network_to_single_pda(statements)

        assert simulate_pda(pda, tokenize(statements, "if a b 1"))
        assert not simulate_pda(pda, tokenize(statements, "if 1"))

    def test_state_space_is_the_sum_of_rule_automata(self, statements):
        pda = network_to_single_pda(statements)

        expected = sum(a.state_count for a in statements.automata.values()) + 1
        assert pda.state_count == expected
        assert pda.state_names[pda.accept_state] == "accept"

    def test_group_markers_are_qualified(self):
        net = build_network(parse_ebnf('s = ( "a", s ) | "b";'))
        pda = network_to_single_pda(net)

        assert any(marker.startswith("s#") for marker in pda.stack_alphabet)
        assert simulate_pda(pda, tokens_from_symbols("aab"))
        assert not simulate_pda(pda, tokens_from_symbols("aa"))


class TestDumps:
    def test_network_xml(self, statements):
        text = network_to_xml(statements)

        assert text.startswith('<?xml version="1.0" encoding="UTF-8"?>\n<network start="program"')
        assert '<automaton name="space"' in text
        assert 'call="stmt"' in text

    def test_tree_xml(self, statements):
        text = tree_to_xml(recognize(statements, tokenize(statements, "if a")))

        assert '<node label="program" span="0:2">' in text
        assert '<token kind="keyword" line="1" column="1">if</token>' in text
