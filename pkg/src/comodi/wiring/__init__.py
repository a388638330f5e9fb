"""Project loading, validation, binding and execution."""

from comodi.wiring.bind import Backend, WiringPlan, bind
from comodi.wiring.mock import load_mocks
from comodi.wiring.project import ProjectDescription, load_project
from comodi.wiring.report import render_report, report_to_xml
from comodi.wiring.runtime import ExecutionReport, MockBackend, NativeBackend, run, run_mock
from comodi.wiring.validate import validate_project

__all__ = [
    "Backend",
    "ExecutionReport",
    "MockBackend",
    "NativeBackend",
    "ProjectDescription",
    "WiringPlan",
    "bind",
    "load_mocks",
    "load_project",
    "render_report",
    "report_to_xml",
    "run",
    "run_mock",
    "validate_project",
]
