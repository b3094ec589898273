"""Render wasm function signatures as C prototypes."""

from __future__ import annotations

import re

from .model import FunctionSignature

C_TYPES = {"i32": "int", "i64": "long long", "f32": "float", "f64": "double"}

_NON_IDENT = re.compile(r"[^A-Za-z0-9_]")


def c_identifier(name: str) -> str:
    """Map a wat identifier (which may contain ``.``, ``|`` ...) to a C identifier."""
    ident = _NON_IDENT.sub("_", name)
    if not ident or ident[0].isdigit():
        ident = "_" + ident
    return ident


def signature_to_declaration(sig: FunctionSignature) -> str:
    ret = C_TYPES[sig.results[0]] if sig.results else "void"
    params = ", ".join(C_TYPES[p] for p in sig.params) or "void"
    return f"{ret} {c_identifier(sig.name)}({params});"
