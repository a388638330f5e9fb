"""Tests for drafting, validating, writing and reading component descriptors."""

from pathlib import Path

import pytest
from pydantic import ValidationError

from comodi.cdl import (
    AuthorAnswers,
    ComponentDescriptor,
    DescriptorMeta,
    ParamSpec,
    PortKind,
    PortSpec,
    draft_descriptor,
    load_answers,
    read_cdf,
    validate_cdf,
    write_cdf,
)
from comodi.core.errors import AnswerError, CdfSchemaError, DefaultLiteralError, SchemaError
from comodi.core.types import PassingMode, parse_literal
from comodi.extract import extract_file
from comodi.extract.model import FieldInfo, TypeDefInfo
from comodi.glue.mangling import mangle_name

SOURCES = Path(__file__).parent / "fixtures" / "sources"


@pytest.fixture
def vector_model(c_profile):
    return extract_file(c_profile, SOURCES / "vector.c")


@pytest.fixture
def decls_model(c_profile):
    return extract_file(c_profile, SOURCES / "decls.c")


def calc(**changes) -> ComponentDescriptor:
    """A small descriptor with no findings."""
    fields = dict(
        name="calc",
        version="1.0.0",
        language="C",
        provides=[
            PortSpec(
                local_name="add",
                global_name="cmdi_calc_1_add",
                kind=PortKind.PROVIDES,
                return_type="int",
                params=[ParamSpec(name="a", type_name="int")],
                doc="Adds.",
            )
        ],
    )
    fields.update(changes)
    return ComponentDescriptor(**fields)


def codes(diagnostics):
    return sorted(d.code for d in diagnostics)


class TestDraft:
    def test_confirmed_definitions_become_provides_ports(self, vector_model):
        answers = AuthorAnswers(confirmed_provides=["scale", "dot"])

        descriptor = draft_descriptor(vector_model, answers, DescriptorMeta(name="vector", version="2.1.0"))

        assert [p.local_name for p in descriptor.provides] == ["dot", "scale"]
        assert [p.global_name for p in descriptor.provides] == ["cmdi_vector_2_dot", "cmdi_vector_2_scale"]
        assert descriptor.uses == []
        assert descriptor.language == "C"
        dot = descriptor.provided("dot")
        assert dot.remote is True
        assert [(p.name, p.type_name, p.passing) for p in dot.params] == [
            ("x", "double*", PassingMode.BY_REFERENCE),
            ("y", "double*", PassingMode.BY_REFERENCE),
            ("n", "int", PassingMode.BY_VALUE),
        ]
        assert descriptor.provided("cmdi_vector_2_scale").local_name == "scale"

    def test_declarations_become_uses_ports(self, decls_model):
        answers = AuthorAnswers(
            confirmed_uses=["solve", "residual"],
            doc_overrides={"solve": "Solves in place."},
            default_overrides={("solve", "cols"): "3"},
            param_docs={("residual", "n"): "Vector length."},
        )

        descriptor = draft_descriptor(decls_model, answers, DescriptorMeta(name="solver", version="1.0.0"))

        solve, residual = descriptor.uses
        assert solve.kind == PortKind.USES
        assert solve.doc == "Solves in place."
        assert residual.doc == "Returns the residual norm. Uses the L2 norm."
        assert solve.param("cols").default == "3"
        assert solve.param("rows").default is None
        assert residual.param("n").doc == "Vector length."
        assert solve.defaults_from(2)
        assert not solve.defaults_from(1)
        assert solve.arity == 3

    def test_meta_and_answers_carry_over(self, vector_model):
        answers = AuthorAnswers(
            confirmed_provides=["dot"],
            representation={"displayName": "Vector kernels"},
            documentation="BLAS-like helpers.",
            platform_targets=["linux-x86_64"],
        )
        meta = DescriptorMeta(name="vector", version="1.0.0", author="Ada", license="MIT", open_source=True)

        descriptor = draft_descriptor(vector_model, answers, meta)

        assert (descriptor.author, descriptor.license, descriptor.open_source) == ("Ada", "MIT", True)
        assert descriptor.representation == {"displayName": "Vector kernels"}
        assert descriptor.documentation == "BLAS-like helpers."
        assert descriptor.platform_targets == ["linux-x86_64"]

    def test_provides_must_be_defined(self, decls_model):
        with pytest.raises(AnswerError, match="declared but not defined"):
            draft_descriptor(
                decls_model, AuthorAnswers(confirmed_provides=["solve"]), DescriptorMeta(name="s", version="1.0.0")
            )

    def test_uses_must_not_be_defined(self, vector_model):
        with pytest.raises(AnswerError, match="is defined"):
            draft_descriptor(
                vector_model, AuthorAnswers(confirmed_uses=["dot"]), DescriptorMeta(name="v", version="1.0.0")
            )

    def test_unknown_port(self, vector_model):
        with pytest.raises(AnswerError, match="cross"):
            draft_descriptor(
                vector_model, AuthorAnswers(confirmed_provides=["cross"]), DescriptorMeta(name="v", version="1.0.0")
            )

    def test_doc_for_unconfirmed_port(self, vector_model):
        answers = AuthorAnswers(confirmed_provides=["dot"], doc_overrides={"scale": "Scales."})

        with pytest.raises(AnswerError, match="unconfirmed port 'scale'"):
            draft_descriptor(vector_model, answers, DescriptorMeta(name="v", version="1.0.0"))

    def test_unknown_parameter(self, vector_model):
        answers = AuthorAnswers(confirmed_provides=["dot"], default_overrides={("dot", "m"): "1"})

        with pytest.raises(AnswerError, match="no parameter 'm'"):
            draft_descriptor(vector_model, answers, DescriptorMeta(name="v", version="1.0.0"))

    def test_default_of_the_wrong_type(self, vector_model):
        answers = AuthorAnswers(confirmed_provides=["dot"], default_overrides={("dot", "n"): "2.5"})

        with pytest.raises(DefaultLiteralError):
            draft_descriptor(vector_model, answers, DescriptorMeta(name="v", version="1.0.0"))

    def test_pointer_parameters_take_no_default(self, vector_model):
        answers = AuthorAnswers(confirmed_provides=["dot"], default_overrides={("dot", "x"): "0"})

        with pytest.raises(DefaultLiteralError, match="does not admit default values"):
            draft_descriptor(vector_model, answers, DescriptorMeta(name="v", version="1.0.0"))

    @pytest.mark.parametrize("name,version", [("my calc", "1.0.0"), ("calc", "1.0"), ("calc", "v1.0.0")])
    def test_meta_is_checked(self, name, version):
        with pytest.raises(ValidationError):
            DescriptorMeta(name=name, version=version)


class TestLoadAnswers:
    ANSWERS = """<answers>
      <meta name="solver" version="1.2.0" author="Ada" license="MIT" open-source="true" />
      <uses port="solve" />
      <uses port="residual" />
      <doc port="solve">Solves
        in place.</doc>
      <doc port="residual" param="n">Vector length.</doc>
      <default port="solve" param="cols" value="3" />
      <representation key="displayName" value="Solver" />
      <documentation>  Dense solvers.  </documentation>
      <platform name="linux-x86_64" />
    </answers>"""

    def test_reads_every_answer(self):
        answers = load_answers(self.ANSWERS)

        assert answers.confirmed_uses == ["solve", "residual"]
        assert answers.confirmed_provides == []
        assert answers.doc_overrides == {"solve": "Solves in place."}
        assert answers.param_docs == {("residual", "n"): "Vector length."}
        assert answers.default_overrides == {("solve", "cols"): "3"}
        assert answers.representation == {"displayName": "Solver"}
        assert answers.documentation == "Dense solvers."
        assert answers.platform_targets == ["linux-x86_64"]
        assert answers.meta == DescriptorMeta(
            name="solver", version="1.2.0", author="Ada", license="MIT", open_source=True
        )

    def test_loaded_answers_draft_a_descriptor(self, decls_model):
        answers = load_answers(self.ANSWERS)

        descriptor = draft_descriptor(decls_model, answers, answers.meta)

        assert [p.global_name for p in descriptor.uses] == ["cmdi_solver_1_solve", "cmdi_solver_1_residual"]

    def test_unknown_element(self):
        with pytest.raises(SchemaError) as exc_info:
            load_answers('<answers><provides port="dot" /><colour value="red" /></answers>')

        assert exc_info.value.path == "/answers/colour[1]"

    def test_missing_attribute(self):
        with pytest.raises(SchemaError) as exc_info:
            load_answers("<answers><provides /></answers>")

        assert exc_info.value.path == "/answers/provides[0]@port"


class TestValidate:
    def test_clean_descriptor(self):
        assert validate_cdf(calc()) == []

    def test_drafted_descriptor_only_warns_about_docs(self, vector_model):
        descriptor = draft_descriptor(
            vector_model, AuthorAnswers(confirmed_provides=["dot", "scale"]), DescriptorMeta(name="v", version="1.0.0")
        )

        assert codes(validate_cdf(descriptor)) == ["UndocumentedPort", "UndocumentedPort"]

    def test_bad_component_name(self):
        assert codes(validate_cdf(calc(name="my calc"))) == ["BadComponentName"]

    def test_bad_version(self):
        assert codes(validate_cdf(calc(version="1.0"))) == ["BadVersion"]

    def test_unsupported_cdl_version(self):
        assert codes(validate_cdf(calc(cdl_version="2"))) == ["UnsupportedCdlVersion"]

    def test_global_name_must_follow_convention(self):
        descriptor = calc()
        descriptor.provides[0].global_name = "add"

        diagnostics = validate_cdf(descriptor)

        assert codes(diagnostics) == ["BadGlobalName"]
        assert "cmdi_calc_1_add" in diagnostics[0].message

    def test_duplicate_port(self):
        descriptor = calc()
        descriptor.provides.append(descriptor.provides[0].model_copy())

        assert codes(validate_cdf(descriptor)) == ["DuplicatePort"]

    def test_global_names_clash_when_case_folded(self):
        uses = PortSpec(
            local_name="Add",
            global_name=mangle_name("calc", 1, "Add"),
            kind=PortKind.USES,
            doc="Adds, upstream.",
        )

        assert codes(validate_cdf(calc(uses=[uses]))) == ["GlobalNameClash"]

    def test_duplicate_param(self):
        descriptor = calc()
        descriptor.provides[0].params.append(ParamSpec(name="a", type_name="int"))

        assert codes(validate_cdf(descriptor)) == ["DuplicateParam"]

    def test_bad_default(self):
        descriptor = calc()
        descriptor.provides[0].params[0].default = "ten"

        assert codes(validate_cdf(descriptor)) == ["BadDefault"]

    def test_unresolved_type(self):
        descriptor = calc()
        descriptor.provides[0].params[0].type_name = "grid*"

        assert codes(validate_cdf(descriptor)) == ["UnresolvedType"]

    def test_declared_type_resolves(self):
        descriptor = calc(type_defs=[TypeDefInfo(name="grid", fields=[FieldInfo(name="n", type_name="int")])])
        descriptor.provides[0].params[0].type_name = "grid*"

        assert validate_cdf(descriptor) == []

    def test_type_definitions(self):
        type_defs = [
            TypeDefInfo(name="empty", fields=[]),
            TypeDefInfo(name="pair", fields=[FieldInfo(name="a", type_name="int"), FieldInfo(name="a", type_name="int")]),
        ]

        assert codes(validate_cdf(calc(type_defs=type_defs))) == ["DuplicateField", "EmptyTypeDef"]

    def test_warnings(self):
        uses = PortSpec(
            local_name="log",
            global_name="cmdi_calc_1_log",
            kind=PortKind.USES,
            params=[ParamSpec(name="level", type_name="int"), ParamSpec(name="tag", type_name="char", default="'x'")],
        )

        diagnostics = validate_cdf(calc(uses=[uses]))

        assert codes(diagnostics) == ["UndocumentedPort", "UsesParamWithoutDefault"]
        assert not any(d.is_error for d in diagnostics)
        assert codes(validate_cdf(calc(provides=[]))) == ["NoPorts"]


class TestWriteCdf:
    def test_canonical_layout(self):
        descriptor = calc(
            author="Ada",
            license="MIT",
            documentation="Arithmetic.",
            representation={"displayName": "Calc", "category": "math"},
            platform_targets=["linux-x86_64"],
        )

        assert write_cdf(descriptor) == (
            '<?xml version="1.0" encoding="UTF-8"?>\n'
            '<component cdl-version="1" name="calc" version="1.0.0" language="C" author="Ada" license="MIT" '
            'open-source="false">\n'
            "  <documentation>Arithmetic.</documentation>\n"
            "  <representation>\n"
            '    <hint key="category" value="math" />\n'
            '    <hint key="displayName" value="Calc" />\n'
            "  </representation>\n"
            "  <platforms>\n"
            '    <platform name="linux-x86_64" />\n'
            "  </platforms>\n"
            "  <provides>\n"
            '    <port name="add" global="cmdi_calc_1_add" return="int" remote="false">\n'
            "      <doc>Adds.</doc>\n"
            '      <param name="a" type="int" passing="byValue" />\n'
            "    </port>\n"
            "  </provides>\n"
            "  <uses />\n"
            "</component>\n"
        )

    def test_drafted_descriptor_reads_back(self, decls_model):
        answers = AuthorAnswers(
            confirmed_uses=["solve", "residual", "checksum"],
            default_overrides={("solve", "rows"): "2", ("solve", "cols"): "2"},
            param_docs={("solve", "rows"): "Row count."},
        )
        descriptor = draft_descriptor(decls_model, answers, DescriptorMeta(name="solver", version="3.0.1"))

        assert read_cdf(write_cdf(descriptor)) == descriptor

    def test_equal_descriptors_write_identical_text(self):
        assert write_cdf(calc(representation={"b": "2", "a": "1"})) == write_cdf(
            calc(representation={"a": "1", "b": "2"})
        )


class TestReadCdf:
    EXTENDED = (
        '<?xml version="1.0" encoding="UTF-8"?>\n'
        '<component cdl-version="1" name="calc" version="1.0.0" language="C" author="" license="" '
        'open-source="false">\n'
        "  <documentation>Arithmetic.</documentation>\n"
        '  <vendor-note level="2">keep</vendor-note>\n'
        "  <provides>\n"
        '    <port name="add" global="cmdi_calc_1_add" return="int" remote="false">\n'
        "      <doc>Adds.</doc>\n"
        '      <timing budget="5" />\n'
        '      <param name="a" type="int" passing="byValue" />\n'
        "    </port>\n"
        "  </provides>\n"
        "  <uses />\n"
        "</component>\n"
    )

    def test_extensions_are_kept_verbatim(self):
        descriptor = read_cdf(self.EXTENDED)

        assert [e.xml for e in descriptor.extensions] == ['<vendor-note level="2">keep</vendor-note>']
        assert [e.xml for e in descriptor.provides[0].extensions] == ['<timing budget="5" />']
        assert write_cdf(descriptor) == self.EXTENDED

    def test_extension_bytes_survive_a_round_trip(self):
        units = "<x:units xmlns:x='urn:units' system='SI'><!-- metric --><x:base>\u00b5m</x:base></x:units>"
        timing = "<timing budget='5' note='a > b'/>"
        text = self.EXTENDED.replace('<vendor-note level="2">keep</vendor-note>', units).replace(
            '<timing budget="5" />', timing
        )

        for document in (text, text.encode("utf-8")):
            descriptor = read_cdf(document)

            assert [e.xml for e in descriptor.extensions] == [units]
            assert [e.xml for e in descriptor.provides[0].extensions] == [timing]
            assert write_cdf(descriptor) == text

    @pytest.mark.parametrize(
        "section,path",
        [
            ('<platforms><platform name="linux-x86_64" arch="x86" /></platforms>', "/component/platforms/platform[0]@arch"),
            ('<representation><hint key="layout" value="row" scope="all" /></representation>', "/component/representation/hint[0]@scope"),
            ('<types><type name="pt" packed="yes"><field name="x" type="int" /></type></types>', "/component/types/type[0]@packed"),
            ('<types><type name="pt"><field name="x" type="int" bits="3" /></type></types>', "/component/types/type[0]/field[0]@bits"),
            ('<platforms kind="all"><platform name="linux-x86_64" /></platforms>', "/component/platforms@kind"),
        ],
    )
    def test_unknown_attribute_in_a_section(self, section, path):
        text = self.EXTENDED.replace("  <provides>\n", f"  {section}\n  <provides>\n")

        with pytest.raises(CdfSchemaError) as exc_info:
            read_cdf(text)

        assert exc_info.value.path == path

    def test_unknown_attribute(self):
        text = self.EXTENDED.replace('open-source="false"', 'open-source="false" colour="red"')

        with pytest.raises(CdfSchemaError) as exc_info:
            read_cdf(text)

        assert exc_info.value.path == "/component@colour"

    def test_unsupported_cdl_version(self):
        with pytest.raises(CdfSchemaError) as exc_info:
            read_cdf(self.EXTENDED.replace('cdl-version="1"', 'cdl-version="2"'))

        assert exc_info.value.path == "/component@cdl-version"

    def test_unknown_passing_mode(self):
        with pytest.raises(CdfSchemaError) as exc_info:
            read_cdf(self.EXTENDED.replace('passing="byValue"', 'passing="byName"'))

        assert exc_info.value.path == "/component/provides/port[0]/param[0]@passing"

    def test_missing_global_name(self):
        with pytest.raises(CdfSchemaError) as exc_info:
            read_cdf(self.EXTENDED.replace(' global="cmdi_calc_1_add"', ""))

        assert exc_info.value.path == "/component/provides/port[0]@global"

    def test_wrong_root(self):
        with pytest.raises(CdfSchemaError):
            read_cdf("<interface />")


class TestParseLiteral:
    @pytest.mark.parametrize(
        "literal,type_name,expected",
        [
            ("42", "int", 42),
            ("0x10", "unsigned int", 16),
            ("10L", "long", 10),
            ("1.5f", "float", 1.5),
            ("1.0D-8", "DOUBLE PRECISION", 1e-8),
            (".TRUE.", "LOGICAL", 1),
            (".false.", "LOGICAL", 0),
            ("'A'", "char", 65),
        ],
    )
    def test_accepted(self, literal, type_name, expected):
        assert parse_literal(literal, type_name) == expected

    @pytest.mark.parametrize("literal,type_name", [("abc", "int"), ("1.5", "int"), ("x", "double")])
    def test_rejected(self, literal, type_name):
        with pytest.raises(DefaultLiteralError, match="not a valid"):
            parse_literal(literal, type_name)

    @pytest.mark.parametrize("type_name", ["int*", "double[]", "point", "COMPLEX"])
    def test_types_without_defaults(self, type_name):
        with pytest.raises(DefaultLiteralError, match="does not admit default values"):
            parse_literal("0", type_name)
