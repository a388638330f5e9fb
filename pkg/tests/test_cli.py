"""Tests for the command-line surface and its exit codes."""

from pathlib import Path

import pytest
from typer.testing import CliRunner

from comodi.cdl import write_cdf
from comodi.cli.main import app
from tests.components import component, param, provides, uses

FIXTURES = Path(__file__).parent / "fixtures"

runner = CliRunner()

PROJECT = """<project>
  <instance id="i" pkg="caller" version="1.0.0" />
  <instance id="j" pkg="adder" version="1.0.0" />
  {connect}
  <entry instance="i" port="run"><arg>2.0</arg></entry>
</project>
"""

MOCKS = """<mocks>
  <mock instance="i" port="run">call(add, x) * 10</mock>
  <mock instance="j" port="add">a + b</mock>
</mocks>
"""

CALLER = component("caller", provides("caller", "run", param("x")), uses("caller", "add", param("x")))
ADDER = component("adder", provides("adder", "add", param("a"), param("b", default="1.0")))


@pytest.fixture
def project_files(tmp_path):
    """Write a two-instance project, its descriptors and mocks; return the CLI arguments."""

    def write(connect: str = '<connect from="i.add" to="j.add" />') -> list[str]:
        (tmp_path / "project.xml").write_text(PROJECT.format(connect=connect))
        (tmp_path / "caller.xml").write_text(write_cdf(CALLER))
        (tmp_path / "adder.xml").write_text(write_cdf(ADDER))
        (tmp_path / "mocks.xml").write_text(MOCKS)
        return [
            str(tmp_path / "project.xml"),
            "--descriptor",
            str(tmp_path / "caller.xml"),
            "--descriptor",
            str(tmp_path / "adder.xml"),
        ]

    return write


def test_version():
    result = runner.invoke(app, ["version"])

    assert result.exit_code == 0
    assert "comodi version" in result.stdout


def test_unknown_command_is_a_usage_error():
    assert runner.invoke(app, ["frobnicate"]).exit_code == 2


class TestExtract:
    def test_writes_the_interface_model(self):
        result = runner.invoke(app, ["extract", "--profile", "c_subset", str(FIXTURES / "sources" / "add.c")])

        assert result.exit_code == 0
        assert result.stdout == (FIXTURES / "golden" / "add.xml").read_text(encoding="utf-8")

    def test_output_file(self, tmp_path):
        out = tmp_path / "add.xml"

        result = runner.invoke(app, ["extract", str(FIXTURES / "sources" / "add.c"), "--output", str(out)])

        assert result.exit_code == 0
        assert out.read_text(encoding="utf-8") == (FIXTURES / "golden" / "add.xml").read_text(encoding="utf-8")

    def test_parse_error_is_a_diagnostic_failure(self, tmp_path):
        source = tmp_path / "broken.c"
        source.write_text("int f(int a {")

        result = runner.invoke(app, ["extract", str(source)])

        assert result.exit_code == 1
        assert "Error:" in result.output

    def test_missing_source_is_a_usage_error(self, tmp_path):
        assert runner.invoke(app, ["extract", str(tmp_path / "nothing.c")]).exit_code == 2


class TestGlue:
    def test_generates_into_a_separate_directory(self, tmp_path):
        cdf = tmp_path / "adder.xml"
        cdf.write_text(write_cdf(ADDER))

        result = runner.invoke(app, ["glue", str(cdf), "--out-dir", str(tmp_path / "generated")])

        assert result.exit_code == 0
        assert sorted(p.name for p in (tmp_path / "generated").iterdir()) == ["adder_glue.c", "adder_wiring.xml"]


class TestValidate:
    def test_valid_project(self, project_files):
        result = runner.invoke(app, ["validate", *project_files()])

        assert result.exit_code == 0
        assert "Project is valid" in result.output

    def test_unbound_uses_port(self, project_files):
        result = runner.invoke(app, ["validate", *project_files(connect="")])

        assert result.exit_code == 1
        assert "UnboundUsesPort" in result.output

    def test_missing_descriptor(self, project_files):
        args = project_files()[:-2]

        result = runner.invoke(app, ["validate", *args])

        assert result.exit_code == 1
        assert "MissingDescriptor" in result.output

    def test_malformed_project(self, tmp_path):
        project = tmp_path / "project.xml"
        project.write_text("<project><entry instance='x' port='y' /></project>")

        result = runner.invoke(app, ["validate", str(project)])

        assert result.exit_code == 1
        assert "/project/entry[0]@instance" in result.output


class TestRun:
    def test_mock_run_text_report(self, project_files, tmp_path):
        result = runner.invoke(app, ["run", *project_files(), "--mocks", str(tmp_path / "mocks.xml")])

        assert result.exit_code == 0
        assert "Value: 30.0" in result.stdout
        assert "Wiring Calls During Run: 0" in result.stdout

    def test_mock_run_xml_report(self, project_files, tmp_path):
        result = runner.invoke(
            app, ["run", *project_files(), "--mocks", str(tmp_path / "mocks.xml"), "--format", "xml"]
        )

        assert result.exit_code == 0
        assert "<value>30.0</value>" in result.stdout
        assert '<instance id="j" link-calls="1" calls="1" />' in result.stdout

    def test_mock_backend_needs_mocks(self, project_files):
        assert runner.invoke(app, ["run", *project_files()]).exit_code == 2

    def test_validation_errors_stop_the_run(self, project_files, tmp_path):
        result = runner.invoke(app, ["run", *project_files(connect=""), "--mocks", str(tmp_path / "mocks.xml")])

        assert result.exit_code == 1
        assert "UnboundUsesPort" in result.output

    def test_depth_limit(self, tmp_path):
        loop = component("loop", provides("loop", "count", param("n")), uses("loop", "again", param("n")))
        (tmp_path / "loop.xml").write_text(write_cdf(loop))
        (tmp_path / "project.xml").write_text(
            '<project><instance id="l" pkg="loop" version="1.0.0" /><connect from="l.again" to="l.count" />'
            '<entry instance="l" port="count"><arg>3</arg></entry></project>'
        )
        (tmp_path / "mocks.xml").write_text('<mocks><mock instance="l" port="count">call(again, n) + 1</mock></mocks>')

        result = runner.invoke(
            app,
            [
                "run",
                str(tmp_path / "project.xml"),
                "--descriptor",
                str(tmp_path / "loop.xml"),
                "--mocks",
                str(tmp_path / "mocks.xml"),
                "--depth-limit",
                "20",
            ],
        )

        assert result.exit_code == 1
        assert "call depth limit 20 exceeded" in result.output

    def test_run_logs_are_written(self, project_files, tmp_path, comodi_home):
        runner.invoke(app, ["run", *project_files(), "--mocks", str(tmp_path / "mocks.xml")])

        logs = list((comodi_home / "logs" / "runs").glob("project-*.log"))
        assert len(logs) == 1
        assert "Run completed: i.run = 30.0" in logs[0].read_text()


class TestGrammar:
    def test_shipped_grammar(self):
        result = runner.invoke(app, ["grammar", "check", "c_subset"])

        assert result.exit_code == 0

    def test_grammar_with_errors(self, tmp_path):
        grammar = tmp_path / "broken.ebnf"
        grammar.write_text("s = missing;\n")

        result = runner.invoke(app, ["grammar", "check", str(grammar)])

        assert result.exit_code == 1
        assert "UndefinedNonterminal" in result.output

    def test_unknown_grammar(self):
        assert runner.invoke(app, ["grammar", "check", "cobol"]).exit_code == 1


class TestConfig:
    def test_set_and_show(self):
        assert runner.invoke(app, ["config", "set", "engine.fuel", "500"]).exit_code == 0

        result = runner.invoke(app, ["config", "show", "--format", "xml"])

        assert result.exit_code == 0
        assert 'fuel="500"' in result.stdout

    def test_unknown_key_is_an_environment_failure(self):
        assert runner.invoke(app, ["config", "set", "engine.speed", "11"]).exit_code == 3

    def test_invalid_value_is_an_environment_failure(self):
        assert runner.invoke(app, ["config", "set", "engine.fuel", "lots"]).exit_code == 3


class TestRepository:
    def pack_adder(self, tmp_path) -> Path:
        cdf = tmp_path / "adder.xml"
        cdf.write_text(write_cdf(ADDER))
        binary = tmp_path / "libadder.so"
        binary.write_bytes(b"\x7fELF")
        assert runner.invoke(app, ["glue", str(cdf), "--out-dir", str(tmp_path / "generated")]).exit_code == 0

        result = runner.invoke(
            app,
            [
                "pack",
                str(cdf),
                "--glue-dir",
                str(tmp_path / "generated"),
                "--binary",
                f"linux-x86_64={binary}",
                "--output",
                str(tmp_path / "adder.zip"),
            ],
        )

        assert result.exit_code == 0
        return tmp_path / "adder.zip"

    def test_register_without_endpoint(self, tmp_path):
        archive = tmp_path / "adder.zip"
        archive.write_bytes(b"PK")

        result = runner.invoke(app, ["register", str(archive)])

        assert result.exit_code == 3
        assert "repository.endpoint" in result.output

    def test_corrupt_archive_is_rejected_before_upload(self, tmp_path):
        archive = tmp_path / "adder.zip"
        archive.write_bytes(b"PK")

        result = runner.invoke(app, ["register", str(archive), "--endpoint", "http://127.0.0.1:1"])

        assert result.exit_code == 1

    def test_unreachable_repository(self, tmp_path):
        archive = self.pack_adder(tmp_path)

        result = runner.invoke(app, ["register", str(archive), "--endpoint", "http://127.0.0.1:1"])

        assert result.exit_code == 3

    def test_pack_then_list_directory(self, tmp_path):
        archive = self.pack_adder(tmp_path)

        assert archive.read_bytes()[:2] == b"PK"

        listing = runner.invoke(app, ["repo", "list", "--dir", str(tmp_path / "repo")])
        assert listing.exit_code == 0
        assert "No packages registered." in listing.stdout

    def test_bad_binary_option(self, tmp_path):
        cdf = tmp_path / "adder.xml"
        cdf.write_text(write_cdf(ADDER))

        result = runner.invoke(
            app, ["pack", str(cdf), "--glue-dir", str(tmp_path), "--binary", "nowhere", "--output", "x.zip"]
        )

        assert result.exit_code == 2
