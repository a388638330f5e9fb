"""Execution report rendering."""

import xml.etree.ElementTree as ET

from comodi.utils.constants import SEPARATOR_WIDTH
from comodi.utils.xml_helpers import to_xml_text
from comodi.wiring.runtime import ExecutionReport


def _format_value(value: object) -> str:
    if value is None:
        return "(void)"
    if isinstance(value, dict):
        return "{" + ", ".join(f"{k}={v!r}" for k, v in value.items()) + "}"
    return repr(value)


def render_report(report: ExecutionReport) -> str:
    """Plain text report of one execution."""
    lines = []
    lines.append("=" * SEPARATOR_WIDTH)
    lines.append(f"COMODI RUN - {report.entry} ({report.backend})")
    lines.append("=" * SEPARATOR_WIDTH)
    lines.append("")

    lines.append("## Result")
    lines.append(f"  Value: {_format_value(report.value)}")
    lines.append(f"  Business Calls: {report.total_calls}")
    lines.append(f"  Wiring Calls During Run: {report.runtime_wiring_calls}")
    if report.remote_messages:
        lines.append(f"  Remote Messages: {report.remote_messages} ({report.remote_bytes} bytes)")
    lines.append("")

    lines.append("## Instances")
    lines.append("-" * SEPARATOR_WIDTH)
    for instance in sorted(report.link_calls):
        calls = report.call_counts.get(instance, 0)
        lines.append(f"  {instance}: linked {report.link_calls[instance]}x, {calls} calls")

    if report.port_calls:
        lines.append("")
        lines.append("## Ports")
        for port, count in sorted(report.port_calls.items()):
            lines.append(f"  {port}: {count}")

    lines.append("=" * SEPARATOR_WIDTH)
    return "\n".join(lines) + "\n"


def report_to_xml(report: ExecutionReport) -> str:
    root = ET.Element(
        "execution",
        {
            "entry": report.entry,
            "backend": report.backend,
            "runtime-wiring-calls": str(report.runtime_wiring_calls),
            "remote-messages": str(report.remote_messages),
        },
    )
    value = ET.SubElement(root, "value")
    if isinstance(report.value, dict):
        for name, field_value in report.value.items():
            ET.SubElement(value, "field", {"name": name, "value": repr(field_value)})
    elif report.value is not None:
        value.text = repr(report.value)
    for instance in sorted(report.link_calls):
        ET.SubElement(
            root,
            "instance",
            {
                "id": instance,
                "link-calls": str(report.link_calls[instance]),
                "calls": str(report.call_counts.get(instance, 0)),
            },
        )
    for port, count in sorted(report.port_calls.items()):
        ET.SubElement(root, "port", {"name": port, "calls": str(count)})
    return to_xml_text(root)
