"""Tests for project loading, validation, binding and mock execution."""

import pytest

from comodi.core.errors import (
    CallDepthExceeded,
    MissingMockError,
    MockDefinitionError,
    ProjectSchemaError,
    ProjectValidationError,
    RuntimeFault,
)
from comodi.utils.logging import RunLogger
from comodi.wiring import (
    MockBackend,
    bind,
    load_mocks,
    load_project,
    render_report,
    report_to_xml,
    run,
    run_mock,
    validate_project,
)
from comodi.wiring.project import project_to_xml
from tests.components import component, descriptors, param, provides, uses

SOURCE = component("source", provides("source", "f"))
TRIPLE = component("triple", provides("triple", "g"), uses("triple", "up"))
OFFSET = component("offset", provides("offset", "h", param("x")), uses("offset", "source"))

PIPELINE = """<project>
  <instance id="src" pkg="source" version="1.0.0" />
  <instance id="mid" pkg="triple" version="1.0.0" />
  <instance id="sink" pkg="offset" version="1.0.0" />
  <connect from="mid.up" to="src.f" />
  <connect from="sink.source" to="mid.g" />
  <entry instance="sink" port="h"><arg>1.5</arg></entry>
</project>
"""

PIPELINE_MOCKS = {
    "src": {"f": "2.0"},
    "mid": {"g": "call(up) * 3.0"},
    "sink": {"h": "call(source) + x"},
}

DIAMOND = """<project>
  <instance id="a" pkg="base" version="1.0.0" />
  <instance id="b" pkg="doubler" version="1.0.0" />
  <instance id="c" pkg="shift" version="1.0.0" />
  <instance id="d" pkg="join" version="1.0.0" />
  <connect from="b.src" to="a.value" />
  <connect from="c.src" to="a.value" />
  <connect from="d.left" to="b.twice" />
  <connect from="d.right" to="c.plus" />
  <entry instance="d" port="combine" />
</project>
"""

DIAMOND_COMPONENTS = descriptors(
    component("base", provides("base", "value")),
    component("doubler", provides("doubler", "twice"), uses("doubler", "src")),
    component("shift", provides("shift", "plus"), uses("shift", "src")),
    component("join", provides("join", "combine"), uses("join", "left"), uses("join", "right")),
)

DIAMOND_MOCKS = {
    "a": {"value": "2.0"},
    "b": {"twice": "call(src) * 2.0"},
    "c": {"plus": "call(src) + 10.0"},
    "d": {"combine": "call(left) + call(right)"},
}

CALLER = component("caller", provides("caller", "run", param("x")), uses("caller", "add", param("x")))

DEFAULTED_ADDER = component("adder", provides("adder", "add", param("a"), param("b", default="1.0")))

PAIR = """<project>
  <instance id="i" pkg="caller" version="1.0.0" />
  <instance id="j" pkg="adder" version="1.0.0" />
  <connect from="i.add" to="j.add" />
  {extra}
  <entry instance="i" port="run"><arg>2.0</arg></entry>
</project>
"""

PAIR_MOCKS = {"i": {"run": "call(add, x)"}, "j": {"add": "a + b"}}

LOOP = component("loop", provides("loop", "count", param("n")), uses("loop", "again", param("n")))

SELF_LOOP = """<project>
  <instance id="l" pkg="loop" version="1.0.0" />
  <connect from="l.again" to="l.count" />
  <entry instance="l" port="count"><arg>5</arg></entry>
</project>
"""


def pipeline_plan(source=SOURCE, triple=TRIPLE):
    return bind(load_project(PIPELINE), descriptors(source, triple, OFFSET))


def pair(extra: str = "", adder=DEFAULTED_ADDER):
    return load_project(PAIR.format(extra=extra)), descriptors(CALLER, adder)


def codes(diagnostics) -> list[str]:
    return [d.code for d in diagnostics]


class TestLoadProject:
    def test_pipeline(self):
        project = load_project(PIPELINE)

        assert [decl.id for decl in project.instances] == ["src", "mid", "sink"]
        assert [(str(c.source), str(c.target)) for c in project.connections] == [
            ("mid.up", "src.f"),
            ("sink.source", "mid.g"),
        ]
        assert (project.entry.instance, project.entry.port, project.entry.args) == ("sink", "h", ["1.5"])

    def test_two_instance_project(self):
        project, _ = pair()

        assert len(project.instances) == 2
        assert len(project.connections) == 1

    def test_param_overrides(self):
        project, _ = pair('<param instance="j" port="add" name="b" value="5.0" />')

        assert project.overrides_for("j", "add") == {"b": "5.0"}
        assert project.overrides_for("i", "run") == {}

    def test_written_form_reads_back(self):
        project, _ = pair('<param instance="j" port="add" name="b" value="5.0" />')

        assert load_project(project_to_xml(project)) == project

    @pytest.mark.parametrize(
        "text, path",
        [
            (
                '<project><instance id="a" pkg="p" version="1" /><instance id="a" pkg="q" version="1" />'
                '<entry instance="a" port="f" /></project>',
                "/project/instance[1]@id",
            ),
            (
                '<project><instance id="a" pkg="p" version="1" /><connect from="a.u" to="b.f" />'
                '<entry instance="a" port="f" /></project>',
                "/project/connect[0]@to",
            ),
            (
                '<project><instance id="a" pkg="p" version="1" /><connect from="a" to="a.f" />'
                '<entry instance="a" port="f" /></project>',
                "/project/connect[0]@from",
            ),
            ('<project><instance id="a" pkg="p" version="1" /></project>', "/project"),
            (
                '<project><instance id="a" pkg="p" version="1" /><wire />'
                '<entry instance="a" port="f" /></project>',
                "/project/wire[0]",
            ),
            (
                '<project><instance id="a" pkg="p" version="1" color="red" />'
                '<entry instance="a" port="f" /></project>',
                "/project/instance[0]@color",
            ),
            ('<project><instance id="a" pkg="p" version="1" /><entry instance="z" port="f" /></project>',
             "/project/entry[0]@instance"),
        ],
    )
    def test_schema_errors_carry_paths(self, text, path):
        with pytest.raises(ProjectSchemaError) as exc_info:
            load_project(text)

        assert exc_info.value.path == path

    def test_not_well_formed(self):
        with pytest.raises(ProjectSchemaError, match="not well-formed"):
            load_project("<project>")


class TestValidate:
    def test_clean_pipeline(self):
        assert validate_project(load_project(PIPELINE), descriptors(SOURCE, TRIPLE, OFFSET)) == []

    def test_missing_descriptor(self):
        diagnostics = validate_project(load_project(PIPELINE), descriptors(SOURCE, OFFSET))

        assert "MissingDescriptor" in codes(diagnostics)

    def test_unknown_ports(self):
        text = PIPELINE.replace('from="mid.up"', 'from="mid.down"').replace('to="mid.g"', 'to="mid.k"')

        diagnostics = validate_project(load_project(text), descriptors(SOURCE, TRIPLE, OFFSET))

        assert "UnknownUsesPort" in codes(diagnostics)
        assert "UnknownProvidesPort" in codes(diagnostics)

    def test_duplicate_binding(self):
        text = PIPELINE.replace('  <connect from="sink.source"', '  <connect from="mid.up" to="src.f" />\n  <connect from="sink.source"')

        diagnostics = validate_project(load_project(text), descriptors(SOURCE, TRIPLE, OFFSET))

        assert codes(diagnostics) == ["DuplicateBinding"]

    def test_return_type_mismatch(self):
        source = component("source", provides("source", "f", returns="int"))

        diagnostics = validate_project(load_project(PIPELINE), descriptors(source, TRIPLE, OFFSET))

        assert codes(diagnostics) == ["SignatureMismatch"]
        assert diagnostics[0].subject == "mid.up -> src.f"

    def test_parameter_type_mismatch(self):
        adder = component("adder", provides("adder", "add", param("a", "int"), param("b", default="1.0")))
        project, found = pair(adder=adder)

        assert codes(validate_project(project, found)) == ["SignatureMismatch"]

    def test_defaults_allow_a_shorter_uses_port(self):
        project, found = pair()

        assert validate_project(project, found) == []

    def test_arity_without_defaults(self):
        adder = component("adder", provides("adder", "add", param("a"), param("b")))
        project, found = pair(adder=adder)

        assert codes(validate_project(project, found)) == ["ArityMismatch"]

    def test_override_supplies_the_missing_default(self):
        adder = component("adder", provides("adder", "add", param("a"), param("b")))
        project, found = pair('<param instance="j" port="add" name="b" value="4" />', adder=adder)

        assert validate_project(project, found) == []

    def test_uses_port_wider_than_target(self):
        caller = component(
            "caller", provides("caller", "run", param("x")), uses("caller", "add", param("x"), param("y"), param("z"))
        )
        project = load_project(PAIR.format(extra=""))

        assert "ArityMismatch" in codes(validate_project(project, descriptors(caller, DEFAULTED_ADDER)))

    def test_unbound_uses_port(self):
        project = load_project(
            '<project><instance id="i" pkg="caller" version="1.0.0" />'
            '<entry instance="i" port="run"><arg>2.0</arg></entry></project>'
        )

        diagnostics = validate_project(project, descriptors(CALLER))

        assert codes(diagnostics) == ["UnboundUsesPort"]
        assert diagnostics[0].subject == "i.add"

    def test_unbound_uses_port_with_defaults_is_allowed(self):
        caller = component(
            "caller", provides("caller", "run", param("x")), uses("caller", "add", param("x", default="0"))
        )
        project = load_project(
            '<project><instance id="i" pkg="caller" version="1.0.0" />'
            '<entry instance="i" port="run"><arg>2.0</arg></entry></project>'
        )

        assert validate_project(project, descriptors(caller)) == []

    def test_bad_overrides(self):
        project, found = pair(
            '<param instance="j" port="add" name="c" value="1" />'
            '<param instance="j" port="add" name="b" value="lots" />'
        )

        assert codes(validate_project(project, found)) == ["UnknownOverride", "BadOverride"]

    @pytest.mark.parametrize(
        "entry",
        [
            '<entry instance="sink" port="source"><arg>1.5</arg></entry>',
            '<entry instance="sink" port="h"><arg>1.5</arg><arg>2</arg></entry>',
            '<entry instance="sink" port="h" />',
            '<entry instance="sink" port="h"><arg>many</arg></entry>',
        ],
    )
    def test_bad_entry_point(self, entry):
        text = PIPELINE.replace('<entry instance="sink" port="h"><arg>1.5</arg></entry>', entry)

        assert codes(validate_project(load_project(text), descriptors(SOURCE, TRIPLE, OFFSET))) == ["BadEntryPoint"]

    def test_one_sided_remote_is_a_warning(self):
        source = component("source", provides("source", "f", remote=True))

        diagnostics = validate_project(load_project(PIPELINE), descriptors(source, TRIPLE, OFFSET))

        assert codes(diagnostics) == ["RemoteMismatch"]
        assert not diagnostics[0].is_error
        pipeline_plan(source=source)


class TestBind:
    def test_param_strings(self):
        plan = pipeline_plan()

        assert plan.param_string("src") == ""
        assert plan.param_string("mid") == "up=src.cmdi_source_1_f"
        assert plan.param_string("sink") == "source=mid.cmdi_triple_1_g"

    def test_providers_link_first(self):
        assert pipeline_plan().link_order == ("src", "mid", "sink")

    def test_declaration_order_without_dependencies(self):
        project = load_project(
            '<project><instance id="z" pkg="source" version="1.0.0" /><instance id="y" pkg="source" version="1.0.0" />'
            '<entry instance="y" port="f" /></project>'
        )

        assert bind(project, descriptors(SOURCE)).link_order == ("z", "y")

    def test_targets(self):
        plan = pipeline_plan()

        assert plan.target("mid", "up") == ("src", "f")
        assert plan.target("src", "up") is None

    def test_self_loop_binds_to_itself(self):
        plan = bind(load_project(SELF_LOOP), descriptors(LOOP))

        assert plan.param_string("l") == "again=l.cmdi_loop_1_count"
        assert plan.target("l", "again") == ("l", "count")

    def test_errors_block_binding(self):
        adder = component("adder", provides("adder", "add", param("a"), param("b")))
        project, found = pair(adder=adder)

        with pytest.raises(ProjectValidationError) as exc_info:
            bind(project, found)

        assert codes(exc_info.value.diagnostics) == ["ArityMismatch"]

    def test_overrides_replace_defaults(self):
        project, found = pair('<param instance="j" port="add" name="b" value="5.0" />')

        plan = bind(project, found)

        assert plan.instances["j"].defaults["add"] == (None, "5.0")


class TestMocks:
    def test_load_mocks(self):
        mocks = load_mocks(
            '<mocks><mock instance="i" port="run">call(add, x)</mock><mock instance="j" port="add"> a + b </mock></mocks>'
        )

        assert mocks == PAIR_MOCKS

    @pytest.mark.parametrize(
        "text",
        [
            "<stubs />",
            '<mocks><stub instance="i" port="run">1</stub></mocks>',
            '<mocks><mock port="run">1</mock></mocks>',
            '<mocks><mock instance="i" port="run">1</mock><mock instance="i" port="run">2</mock></mocks>',
            "<mocks>",
        ],
    )
    def test_bad_mock_documents(self, text):
        with pytest.raises(MockDefinitionError):
            load_mocks(text)

    def test_missing_mock(self):
        plan = bind(*pair())

        with pytest.raises(MissingMockError, match="j.add"):
            MockBackend(plan, {"i": PAIR_MOCKS["i"]})

    @pytest.mark.parametrize(
        "mocks",
        [
            {"i": {"run": "call(subtract, x)"}, "j": {"add": "a + b"}},
            {"i": {"run": "call(add, y)"}, "j": {"add": "a + b"}},
            {"i": {"run": "call(add, x)"}, "j": {"add": "a +"}},
            {"i": {"run": "call(add, x)"}, "k": {"add": "1"}},
            {"i": {"run": "call(add, x)", "walk": "1"}, "j": {"add": "a + b"}},
        ],
    )
    def test_bad_expressions(self, mocks):
        plan = bind(*pair())

        with pytest.raises(MockDefinitionError):
            MockBackend(plan, mocks)

    def test_precedence_and_negation(self):
        project = load_project(
            '<project><instance id="s" pkg="source" version="1.0.0" /><entry instance="s" port="f" /></project>'
        )
        plan = bind(project, descriptors(SOURCE))

        assert run_mock(plan, {"s": {"f": "-(1 + 2) * 4 - 6 / 3"}}).value == -14.0


class TestMockExecution:
    def test_pipeline(self):
        report = run_mock(pipeline_plan(), PIPELINE_MOCKS)

        assert report.entry == "sink.h"
        assert report.backend == "mock"
        assert report.value == 7.5
        assert report.link_calls == {"src": 1, "mid": 1, "sink": 1}
        assert report.runtime_wiring_calls == 0
        assert report.call_counts == {"mid": 1, "sink": 1, "src": 1}
        assert report.port_calls == {"mid.g": 1, "sink.h": 1, "src.f": 1}

    def test_diamond(self):
        plan = bind(load_project(DIAMOND), DIAMOND_COMPONENTS)

        report = run_mock(plan, DIAMOND_MOCKS)

        assert report.value == 16.0
        assert plan.param_string("d") == "left=b.cmdi_doubler_1_twice;right=c.cmdi_shift_1_plus"
        assert plan.link_order == ("a", "b", "c", "d")
        assert report.call_counts == {"a": 2, "b": 1, "c": 1, "d": 1}
        assert set(report.link_calls.values()) == {1}
        assert report.runtime_wiring_calls == 0

    def test_target_default_fills_missing_argument(self):
        report = run_mock(bind(*pair()), PAIR_MOCKS)

        assert report.value == 3.0

    def test_override_changes_the_default(self):
        plan = bind(*pair('<param instance="j" port="add" name="b" value="5.0" />'))

        assert run_mock(plan, PAIR_MOCKS).value == 7.0

    def test_self_loop_hits_the_depth_limit(self):
        plan = bind(load_project(SELF_LOOP), descriptors(LOOP))

        with pytest.raises(CallDepthExceeded) as exc_info:
            run_mock(plan, {"l": {"count": "call(again, n - 1) + 1"}}, depth_limit=50)

        assert exc_info.value.limit == 50
        assert exc_info.value.calls == 50
        assert (exc_info.value.instance, exc_info.value.port) == ("l", "again")

    def test_deep_recursion_does_not_exhaust_the_interpreter(self):
        plan = bind(load_project(SELF_LOOP), descriptors(LOOP))

        with pytest.raises(CallDepthExceeded) as exc_info:
            run_mock(plan, {"l": {"count": "call(again, n - 1) + 1"}}, depth_limit=10_000)

        assert exc_info.value.calls == 10_000

    def test_self_loop_without_recursion(self):
        plan = bind(load_project(SELF_LOOP), descriptors(LOOP))

        report = run_mock(plan, {"l": {"count": "n * 2"}})

        assert report.value == 10.0
        assert report.link_calls == {"l": 1}

    def test_division_by_zero(self):
        mocks = dict(PIPELINE_MOCKS, mid={"g": "call(up) / 0"})

        with pytest.raises(RuntimeFault, match="division by zero") as exc_info:
            run_mock(pipeline_plan(), mocks)

        assert (exc_info.value.instance, exc_info.value.port) == ("mid", "g")

    def test_unbound_slot_faults_when_called(self):
        caller = component(
            "caller", provides("caller", "run", param("x")), uses("caller", "add", param("x", default="0"))
        )
        project = load_project(
            '<project><instance id="i" pkg="caller" version="1.0.0" />'
            '<entry instance="i" port="run"><arg>2.0</arg></entry></project>'
        )
        plan = bind(project, descriptors(caller))

        with pytest.raises(RuntimeFault, match="not bound") as exc_info:
            run_mock(plan, {"i": {"run": "call(add, x)"}})

        assert (exc_info.value.instance, exc_info.value.port) == ("i", "add")

    def test_unbound_slot_is_fine_when_unused(self):
        caller = component(
            "caller", provides("caller", "run", param("x")), uses("caller", "add", param("x", default="0"))
        )
        project = load_project(
            '<project><instance id="i" pkg="caller" version="1.0.0" />'
            '<entry instance="i" port="run"><arg>2.0</arg></entry></project>'
        )

        assert run_mock(bind(project, descriptors(caller)), {"i": {"run": "x + 1"}}).value == 3.0

    def test_int_results_are_coerced(self):
        source = component("source", provides("source", "f", returns="int"))
        project = load_project(
            '<project><instance id="s" pkg="source" version="1.0.0" /><entry instance="s" port="f" /></project>'
        )

        report = run_mock(bind(project, descriptors(source)), {"s": {"f": "7 / 2"}})

        assert report.value == 3
        assert isinstance(report.value, int)

    def test_runs_are_deterministic(self):
        assert run_mock(pipeline_plan(), PIPELINE_MOCKS) == run_mock(pipeline_plan(), PIPELINE_MOCKS)

    def test_remote_ports_are_marshalled(self):
        source = component("source", provides("source", "f", remote=True))
        triple = component("triple", provides("triple", "g"), uses("triple", "up", remote=True))

        report = run_mock(pipeline_plan(source, triple), PIPELINE_MOCKS)

        assert report.value == 7.5
        assert report.remote_messages == 1
        assert report.remote_bytes == 8

    def test_run_with_an_explicit_backend(self):
        plan = pipeline_plan()
        backend = MockBackend(plan, PIPELINE_MOCKS)

        report = run(plan, backend)

        assert report.value == 7.5
        assert backend.wiring_calls() == 3


class TestReports:
    def test_text_report(self):
        text = render_report(run_mock(pipeline_plan(), PIPELINE_MOCKS))

        assert "COMODI RUN - sink.h (mock)" in text
        assert "  Value: 7.5" in text
        assert "  Business Calls: 3" in text
        assert "Wiring Calls During Run: 0" in text
        assert "  mid: linked 1x, 1 calls" in text
        assert "  src.f: 1" in text
        assert "Remote Messages" not in text

    def test_xml_report(self):
        text = report_to_xml(run_mock(pipeline_plan(), PIPELINE_MOCKS))

        assert '<execution entry="sink.h" backend="mock" runtime-wiring-calls="0" remote-messages="0">' in text
        assert "<value>7.5</value>" in text
        assert '<instance id="src" link-calls="1" calls="1" />' in text
        assert '<port name="mid.g" calls="1" />' in text

    def test_run_log(self):
        with RunLogger("pipeline") as run_logger:
            run_mock(pipeline_plan(), PIPELINE_MOCKS, run_logger=run_logger)
            content = run_logger.read()

        assert "Project: sink.h" in content
        assert "link src: (no bindings)" in content
        assert "link mid: up=src.cmdi_source_1_f" in content
        assert "Run completed: sink.h = 7.5" in content

    def test_failed_run_is_logged(self):
        mocks = dict(PIPELINE_MOCKS, src={"f": "1 / 0"})
        with RunLogger("broken") as run_logger:
            with pytest.raises(RuntimeFault):
                run_mock(pipeline_plan(), mocks, run_logger=run_logger)
            content = run_logger.read()

        assert "Run failed: src.f: division by zero" in content
