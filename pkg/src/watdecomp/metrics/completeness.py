"""How much of the decompiled output is usable C, per file and per function."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..cparse import Source, function_definitions, function_name, is_broken, top_level_functions


def syntactic_completeness(dec_text: str) -> float | None:
    """Share of detected function definitions that parse cleanly.

    A missing brace makes tree-sitter swallow the next definition into the
    broken one, so nested definitions are counted too. Returns None for a file
    with nothing in it; text that parses to no definitions at all scores 0.
    """
    src = Source(dec_text)
    defs = function_definitions(src.root, nested=True)
    if not defs:
        return 0.0 if dec_text.strip() and is_broken(src.root) else None
    good = sum(1 for d in defs if not is_broken(d))
    return good / len(defs)


def valid_function_names(dec_text: str) -> set[str]:
    src = Source(dec_text)
    names = set()
    for d in function_definitions(src.root, nested=True):
        if is_broken(d):
            continue
        name = function_name(d)
        if name is not None:
            names.add(name)
    return names


@dataclass
class FunctionCompleteness:
    score: float
    present: list[str] = field(default_factory=list)
    missing: list[str] = field(default_factory=list)
    extra: list[str] = field(default_factory=list)  # defined in dec but not in src; never raises the score


def function_completeness(src_text: str, dec_text: str) -> FunctionCompleteness:
    src_names = list(top_level_functions(Source(src_text)))
    if not src_names:
        raise ValueError("source defines no functions")
    dec_names = valid_function_names(dec_text)
    present = [n for n in src_names if n in dec_names]
    missing = [n for n in src_names if n not in dec_names]
    extra = sorted(dec_names.difference(src_names))
    return FunctionCompleteness(len(present) / len(src_names), present, missing, extra)
