"""WebAssembly text parsing: module model, data strings, C declarations."""

from .declarations import c_identifier, signature_to_declaration
from .model import DataSegment, FunctionSignature, GlobalDef, Import, WatFunction, WatModule
from .parser import parse_module
from .strings import OffsetStringMap, decode_wat_string, extract_data_strings

__all__ = [
    "DataSegment",
    "FunctionSignature",
    "GlobalDef",
    "Import",
    "OffsetStringMap",
    "WatFunction",
    "WatModule",
    "c_identifier",
    "decode_wat_string",
    "extract_data_strings",
    "parse_module",
    "signature_to_declaration",
]
