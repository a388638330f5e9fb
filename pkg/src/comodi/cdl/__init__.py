"""Component descriptors: drafting, reading, writing and validation."""

from comodi.cdl.cdf import read_cdf, write_cdf
from comodi.cdl.draft import AuthorAnswers, DescriptorMeta, draft_descriptor, load_answers
from comodi.cdl.model import ComponentDescriptor, ParamSpec, PortKind, PortSpec
from comodi.cdl.validate import validate_cdf

__all__ = [
    "AuthorAnswers",
    "ComponentDescriptor",
    "DescriptorMeta",
    "ParamSpec",
    "PortKind",
    "PortSpec",
    "draft_descriptor",
    "load_answers",
    "read_cdf",
    "validate_cdf",
    "write_cdf",
]
