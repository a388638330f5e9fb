"""Glue emission: C glue source and wiring metadata."""

import logging
import xml.etree.ElementTree as ET
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from jinja2 import Environment, FileSystemLoader, StrictUndefined

from comodi.glue.mangling import component_prefix
from comodi.glue.plan import GlueParam, GluePlan, ValueSlot
from comodi.utils.constants import GLUE_FILE_SUFFIX, WIRING_FILE_SUFFIX
from comodi.utils.storage_helpers import atomic_write_text
from comodi.utils.xml_helpers import to_xml_text

logger = logging.getLogger("comodi.glue")

TEMPLATE_DIR = Path(__file__).parent / "templates"


@dataclass(frozen=True)
class GlueArtifact:
    component: str
    glue_source: str
    wiring_metadata: str

    @property
    def glue_file_name(self) -> str:
        return f"{self.component}{GLUE_FILE_SUFFIX}"

    @property
    def wiring_file_name(self) -> str:
        return f"{self.component}{WIRING_FILE_SUFFIX}"


def _prototype(params: Sequence[GlueParam], fortran: bool, named: bool = False) -> str:
    if not params:
        return "void"
    parts = []
    for p in params:
        c_type = f"{p.c_type} *" if fortran and p.by_reference else p.c_type
        parts.append(f"{c_type} p_{p.name}" if named else c_type)
    return ", ".join(parts)


def _call_args(params: Sequence[GlueParam]) -> str:
    return ", ".join(f"&p_{p.name}" if p.by_reference else f"p_{p.name}" for p in params)


def _boxed_arg(p: GlueParam, value: ValueSlot, fortran: bool) -> str:
    if p.aggregate:
        return f"p_{p.name}.{value.field}"
    if value.member == "p":
        return f"(void *)p_{p.name}"
    if fortran and p.by_reference:
        return f"*p_{p.name}"
    return f"p_{p.name}"


def _environment() -> Environment:
    env = Environment(
        loader=FileSystemLoader(str(TEMPLATE_DIR)),
        trim_blocks=True,
        lstrip_blocks=True,
        keep_trailing_newline=True,
        undefined=StrictUndefined,
    )
    env.filters["prototype"] = _prototype
    env.filters["call_args"] = _call_args
    env.filters["boxed_arg"] = _boxed_arg
    return env


def _param_elements(parent: ET.Element, params: Sequence[GlueParam]) -> None:
    for p in params:
        attrs = {"name": p.name, "type": p.type_name, "argv": " ".join(str(v.index) for v in p.values)}
        if p.default is not None:
            attrs["default"] = p.default
        ET.SubElement(parent, "param", attrs)


def wiring_metadata(plan: GluePlan) -> str:
    """Slots, mangled names and defaults of a plan as XML."""
    root = ET.Element(
        "wiring",
        {"component": plan.component, "version": plan.version, "language": plan.language, "link": plan.link_entry},
    )
    names = ET.SubElement(root, "names")
    for local in sorted(plan.mangling):
        ET.SubElement(names, "name", {"local": local, "global": plan.mangling[local]})

    slots = ET.SubElement(root, "slots")
    for slot in plan.slots:
        node = ET.SubElement(
            slots,
            "slot",
            {
                "id": slot.slot_id,
                "index": str(slot.index),
                "global": slot.global_name,
                "symbol": slot.symbol,
                "return": slot.return_type,
                "argc": str(slot.total_argc),
            },
        )
        _param_elements(node, slot.params)

    trampolines = ET.SubElement(root, "trampolines")
    for t in plan.trampolines:
        node = ET.SubElement(
            trampolines,
            "trampoline",
            {
                "port": t.port,
                "global": t.global_name,
                "symbol": t.symbol,
                "return": t.return_type,
                "minArgc": str(t.required_argc),
                "maxArgc": str(t.total_argc),
            },
        )
        _param_elements(node, t.params)

    packs = ET.SubElement(root, "packs")
    for spec in plan.pack_specs:
        node = ET.SubElement(packs, "pack", {"type": spec.type_name})
        for f in spec.fields:
            ET.SubElement(node, "field", {"name": f.field, "type": f.c_type, "member": f.member})

    remotes = ET.SubElement(root, "remote")
    for port in sorted(plan.remote_plans):
        layout = plan.remote_plans[port]
        node = ET.SubElement(
            remotes,
            "layout",
            {"port": port, "request": str(layout.request_size), "response": str(layout.response_size)},
        )
        for tag, fields in (("request", layout.request), ("response", layout.response)):
            for f in fields:
                ET.SubElement(
                    node,
                    tag,
                    {"name": f.name, "wire": f.wire.name, "width": str(f.width), "offset": str(f.offset)},
                )

    unsupported = ET.SubElement(root, "unsupported")
    for name, reason in plan.unsupported:
        ET.SubElement(unsupported, "item", {"name": name, "reason": reason})
    return to_xml_text(root)


def emit_glue(plan: GluePlan) -> GlueArtifact:
    """Render the glue source and wiring metadata; equal plans give identical text."""
    template = _environment().get_template("glue.c.j2")
    source = template.render(plan=plan, prefix=component_prefix(plan.component, plan.major))
    logger.debug(f"Emitted glue for {plan.component}: {len(plan.trampolines)} trampolines, {len(plan.slots)} slots")
    return GlueArtifact(component=plan.component, glue_source=source, wiring_metadata=wiring_metadata(plan))


def write_artifact(artifact: GlueArtifact, out_dir: Path) -> list[Path]:
    """Write the generated files into ``out_dir``; never touches author sources."""
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for name, text in (
        (artifact.glue_file_name, artifact.glue_source),
        (artifact.wiring_file_name, artifact.wiring_metadata),
    ):
        path = out_dir / name
        atomic_write_text(path, text)
        written.append(path)
    logger.info(f"Wrote glue for {artifact.component} to {out_dir}")
    return written
