"""Tests for interface extraction and the interface model XML."""

import hashlib
from pathlib import Path

import pytest

from comodi.automata import lex
from comodi.core.errors import ExtractionError, InterfaceSchemaError, LexicalError, ParseError
from comodi.core.types import PassingMode
from comodi.extract import (
    detect_uses_candidates,
    extract_file,
    extract_interface,
    extract_with_tree,
    interface_to_xml,
    load_profile,
    xml_to_interface,
)


FIXTURES = Path(__file__).parent / "fixtures"
SOURCES = sorted(p.name for p in (FIXTURES / "sources").iterdir() if p.suffix in (".c", ".f"))


def profile_for(name: str):
    return load_profile("c_subset" if name.endswith(".c") else "fortran77")


def test_fixture_set_covers_both_languages():
    assert len([s for s in SOURCES if s.endswith(".c")]) >= 10
    assert len([s for s in SOURCES if s.endswith(".f")]) >= 5


@pytest.mark.parametrize("name", SOURCES)
def test_matches_golden_xml(name):
    source = FIXTURES / "sources" / name
    golden = (FIXTURES / "golden" / name).with_suffix(".xml")

    model = extract_file(profile_for(name), source)

    assert interface_to_xml(model) == golden.read_text(encoding="utf-8")


@pytest.mark.parametrize("name", SOURCES)
def test_golden_xml_reads_back_to_the_model(name):
    source = FIXTURES / "sources" / name
    golden = (FIXTURES / "golden" / name).with_suffix(".xml")

    assert xml_to_interface(golden.read_text(encoding="utf-8")) == extract_file(profile_for(name), source)


@pytest.mark.parametrize("name", SOURCES)
def test_lexemes_reproduce_the_source(name):
    text = (FIXTURES / "sources" / name).read_text(encoding="utf-8")
    result = lex(profile_for(name).network(), text)

    lexemes = sorted(result.tokens + result.skipped, key=lambda t: t.offset)

    assert "".join(t.text for t in lexemes) == text
    assert all(a.end_offset == b.offset for a, b in zip(lexemes, lexemes[1:]))


@pytest.mark.parametrize("name", SOURCES)
def test_extraction_leaves_source_untouched(workspace, name):
    path = workspace / name
    before = hashlib.sha256(path.read_bytes()).hexdigest()

    extract_file(profile_for(name), path)

    assert hashlib.sha256(path.read_bytes()).hexdigest() == before


class TestCExtraction:
    def test_spans_cover_the_declaration(self, c_profile):
        text = (FIXTURES / "sources" / "add.c").read_text()
        sig = extract_interface(c_profile, text).function("add")

        assert text[sig.span[0] : sig.span[1]].startswith("int add(int a, int b)")
        assert text[sig.span[0] : sig.span[1]].endswith("}")

    def test_declaration_then_definition_merges(self, c_profile):
        model = extract_file(c_profile, FIXTURES / "sources" / "mixed.c")
        ipow = model.function("ipow")

        assert [f.name for f in model.functions] == ["ipow", "to_float"]
        assert ipow.defined
        assert ipow.doc == "Integer power."
        assert ipow.remote

    def test_uses_candidates_are_declared_only(self, c_profile):
        model = extract_file(c_profile, FIXTURES / "sources" / "decls.c")

        assert [f.name for f in detect_uses_candidates(model)] == ["solve", "residual", "checksum"]
        assert detect_uses_candidates(extract_file(c_profile, FIXTURES / "sources" / "vector.c")) == []

    def test_pointers_pass_by_reference(self, c_profile):
        model = extract_interface(c_profile, "void f(int n, int *out, double v[]);")

        assert [p.passing for p in model.function("f").params] == [
            PassingMode.BY_VALUE,
            PassingMode.BY_REFERENCE,
            PassingMode.BY_REFERENCE,
        ]

    def test_void_parameter_list(self, c_profile):
        model = extract_interface(c_profile, "int tick(void);")

        assert model.function("tick").params == []

    def test_unnamed_parameters_get_positional_names(self, c_profile):
        model = extract_interface(c_profile, "double mix(double, double);")

        assert [p.name for p in model.function("mix").params] == ["arg0", "arg1"]

    def test_unresolved_keeps_first_occurrence_order(self, c_profile):
        model = extract_interface(c_profile, "grid *make(shape s, grid *g);")

        assert model.unresolved == ["grid", "shape"]

    def test_duplicate_parameter_names(self, c_profile):
        with pytest.raises(ExtractionError, match="duplicate parameter"):
            extract_interface(c_profile, "int f(int a, int a) { return a; }")

    def test_function_defined_twice(self, c_profile):
        with pytest.raises(ExtractionError, match="defined twice"):
            extract_interface(c_profile, "int f(void) { return 1; }\nint f(void) { return 2; }\n")

    def test_parse_error(self, c_profile):
        with pytest.raises(ParseError):
            extract_interface(c_profile, "int f(int a {")

    def test_lexical_error(self, c_profile):
        with pytest.raises(LexicalError) as exc_info:
            extract_interface(c_profile, "int x = 1;\nint y = @;\n")

        assert exc_info.value.line == 2

    def test_parse_tree_is_kept(self, c_profile):
        result = extract_with_tree(c_profile, "int x;", "x.c")

        assert result.tree.label == "translation_unit"
        assert result.model.source == "x.c"
        assert [t.text for t in result.tokens[:-1]] == ["int", "x", ";"]


class TestFortranExtraction:
    def test_doc_comment_on_the_first_line(self, fortran_profile):
        text = "C$COMODI Scales a vector.\n      SUBROUTINE SCALE(X)\n      REAL X\n      END\n"
        function = extract_interface(fortran_profile, text).function("SCALE")

        assert function.doc == "Scales a vector."
        assert [p.name for p in function.params] == ["X"]

    def test_plain_comment_on_the_first_line(self, fortran_profile):
        for marker in ("C", "c", "*"):
            text = f"{marker} plain comment\n      SUBROUTINE SCALE(X)\n      END\n"
            model = extract_interface(fortran_profile, text)

            assert [f.name for f in model.functions] == ["SCALE"]
            assert model.functions[0].doc is None

    def test_first_line_directive_position(self, fortran_profile):
        model = extract_file(fortran_profile, FIXTURES / "sources" / "solver.f")

        assert [(d.text, d.line, d.column) for d in model.directives] == [("remote", 1, 1)]

    def test_implicit_typing(self, fortran_profile):
        text = "      SUBROUTINE MOVE(I, X)\n      END\n"
        params = extract_interface(fortran_profile, text).function("MOVE").params

        assert [(p.name, p.type_name) for p in params] == [("I", "INTEGER"), ("X", "REAL")]

    def test_declarations_override_implicit_typing(self, fortran_profile):
        text = "      SUBROUTINE MOVE(I, X)\n      REAL I\n      INTEGER X(3)\n      END\n"
        params = extract_interface(fortran_profile, text).function("MOVE").params

        assert [(p.name, p.type_name) for p in params] == [("I", "REAL"), ("X", "INTEGER[]")]

    def test_everything_passes_by_reference(self, fortran_profile):
        model = extract_file(fortran_profile, FIXTURES / "sources" / "norms.f")

        assert {p.passing for f in model.functions for p in f.params} == {PassingMode.BY_REFERENCE}

    def test_external_names_are_uses_candidates(self, fortran_profile):
        model = extract_file(fortran_profile, FIXTURES / "sources" / "solver.f")

        assert [f.name for f in detect_uses_candidates(model)] == ["FACTOR", "BACKSB", "CHECK"]

    def test_unit_spans_tile_the_file(self, fortran_profile):
        text = (FIXTURES / "sources" / "norms.f").read_text()
        spans = [f.span for f in extract_interface(fortran_profile, text).functions]

        assert spans[0][1] == spans[1][0] - len("      ")
        assert spans[-1][1] == len(text)


class TestCustomProfile:
    GRAMMAR = """
    (*LEXICAL*)
    (*SKIP*)
    ws = ? whitespace ?, { ? whitespace ? };
    (*SKIP*)
    comment = "#", { ? any ? - ? eol ? };
    name = ? letter ?, { ? letter ? };
    punct = "(" | ")" | "," | ":";
    (*SYNTAX*)
    module = { proc };
    proc = "proc", proc_name, "(", [ arg, { ",", arg } ], ")";
    proc_name = name;
    arg = arg_name, ":", arg_type;
    arg_name = name;
    arg_type = name;
    """

    PROFILE = """<?xml version="1.0" encoding="UTF-8"?>
    <profile language="Toy" grammar="toy.ebnf" passing="byValue">
      <comments doc="#doc" directive="#!" />
      <extractionMap>
        <map nonterminal="proc" role="functionDecl" returns="void" />
        <map nonterminal="arg" role="paramDecl" />
      </extractionMap>
      <slots>
        <slot name="functionName" nonterminals="proc_name" />
        <slot name="paramName" nonterminals="arg_name" />
        <slot name="type" nonterminals="arg_type" />
      </slots>
    </profile>
    """

    def write_profile(self, tmp_path, profile_text=PROFILE):
        (tmp_path / "toy.ebnf").write_text(self.GRAMMAR)
        path = tmp_path / "toy.profile.xml"
        path.write_text(profile_text)
        return path

    def test_extraction_follows_the_profile(self, tmp_path):
        profile = load_profile(self.write_profile(tmp_path))

        model = extract_interface(profile, "#doc Says hi.\nproc greet(who: text, times: int)\n")
        greet = model.function("greet")

        assert model.language == "Toy"
        assert greet.doc == "Says hi."
        assert greet.span == (14, 47)
        assert [(p.name, p.type_name, p.passing) for p in greet.params] == [
            ("who", "text", PassingMode.BY_VALUE),
            ("times", "int", PassingMode.BY_VALUE),
        ]
        assert model.unresolved == ["text"]

    def test_profile_naming_an_unknown_nonterminal(self, tmp_path):
        broken = self.PROFILE.replace('nonterminals="arg_type"', 'nonterminals="arg_kind"')

        with pytest.raises(ExtractionError, match="arg_kind"):
            load_profile(self.write_profile(tmp_path, broken))

    def test_unknown_shipped_profile(self):
        with pytest.raises(ExtractionError, match="unknown language profile"):
            load_profile("cobol")


class TestInterfaceXml:
    def test_missing_attribute_reports_path(self):
        text = '<interface source="a.c" language="C"><functions><function name="f" /></functions></interface>'

        with pytest.raises(InterfaceSchemaError) as exc_info:
            xml_to_interface(text)

        assert exc_info.value.path == "/interface/functions/function[0]@return"

    def test_unknown_passing_mode(self):
        text = (
            '<interface source="a.c" language="C"><functions>'
            '<function name="f" return="void"><param name="a" type="int" passing="byName" position="0" />'
            "</function></functions></interface>"
        )

        with pytest.raises(InterfaceSchemaError, match="byName"):
            xml_to_interface(text)

    def test_wrong_root(self):
        with pytest.raises(InterfaceSchemaError):
            xml_to_interface("<component />")

    def test_not_well_formed(self):
        with pytest.raises(InterfaceSchemaError, match="not well-formed"):
            xml_to_interface("<interface")
