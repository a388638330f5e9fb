"""Source interface extraction."""

from comodi.extract.extractor import extract_file, extract_interface, extract_with_tree
from comodi.extract.model import FunctionSig, InterfaceModel, ParamInfo, TypeDefInfo, detect_uses_candidates
from comodi.extract.profile import LanguageProfile, load_profile
from comodi.extract.xml_io import interface_to_xml, xml_to_interface

__all__ = [
    "FunctionSig",
    "InterfaceModel",
    "LanguageProfile",
    "ParamInfo",
    "TypeDefInfo",
    "detect_uses_candidates",
    "extract_file",
    "extract_interface",
    "extract_with_tree",
    "interface_to_xml",
    "load_profile",
    "xml_to_interface",
]
