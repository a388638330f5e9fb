"""Glue planning and emission: naming, link entries, trampolines and remote layouts."""

from comodi.glue.emit import GlueArtifact, emit_glue, wiring_metadata, write_artifact
from comodi.glue.mangling import ManglingRegistry, component_prefix, link_entry_name, mangle_name
from comodi.glue.param_string import Binding, ParamString, parse_param_string, render_param_string
from comodi.glue.plan import GluePlan, pack_aggregate, plan_glue, unpack_aggregate
from comodi.glue.remote import (
    LoopbackTransport,
    RemoteLayout,
    RemoteSkeleton,
    RemoteStub,
    decode_request,
    decode_response,
    encode_request,
    encode_response,
    plan_remote,
)

__all__ = [
    "Binding",
    "GlueArtifact",
    "GluePlan",
    "LoopbackTransport",
    "ManglingRegistry",
    "ParamString",
    "RemoteLayout",
    "RemoteSkeleton",
    "RemoteStub",
    "component_prefix",
    "decode_request",
    "decode_response",
    "emit_glue",
    "encode_request",
    "encode_response",
    "link_entry_name",
    "mangle_name",
    "pack_aggregate",
    "parse_param_string",
    "plan_glue",
    "plan_remote",
    "render_param_string",
    "unpack_aggregate",
    "wiring_metadata",
    "write_artifact",
]
