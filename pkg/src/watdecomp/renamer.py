"""Rename C variables after their stack-frame slot (``local_{offset}``)."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .cparse import Source, top_level_functions, walk
from .errors import DuplicateName, DuplicateOffset, FormatError, UnmappedCollision
from .frame import frame_accesses
from .wat.model import WatFunction, WatModule

LOCAL_TEMPLATE = "local_{}"


@dataclass(frozen=True)
class OffsetEntry:
    name: str
    offset: int
    c_type: str = "int"

    @property
    def target(self) -> str:
        return LOCAL_TEMPLATE.format(self.offset)


@dataclass
class VarOffsetMap:
    functions: dict[str, list[OffsetEntry]] = field(default_factory=dict)

    def add(self, function: str, entry: OffsetEntry) -> None:
        entries = self.functions.setdefault(function, [])
        for e in entries:
            if e.offset == entry.offset:
                raise DuplicateOffset(function, entry.offset)
            if e.name == entry.name:
                raise DuplicateName(function, entry.name)
        entries.append(entry)

    def entries(self, function: str) -> list[OffsetEntry]:
        return self.functions.get(function, [])

    def __contains__(self, function: str) -> bool:
        return function in self.functions

    def __len__(self) -> int:
        return len(self.functions)

    def to_records(self) -> list[dict]:
        return [
            {"function": fn, "name": e.name, "offset": e.offset, "type": e.c_type}
            for fn, entries in self.functions.items()
            for e in entries
        ]


def offset_map_from_records(records: Iterable[dict]) -> VarOffsetMap:
    out = VarOffsetMap()
    for lineno, rec in enumerate(records, 1):
        try:
            fn, name, offset = rec["function"], rec["name"], rec["offset"]
        except (KeyError, TypeError):
            raise FormatError(f"record {lineno}: needs function, name, offset") from None
        if not isinstance(offset, int) or isinstance(offset, bool) or offset < 0:
            raise FormatError(f"record {lineno}: offset must be a non-negative integer")
        out.add(str(fn), OffsetEntry(str(name), offset, str(rec.get("type", "int"))))
    return out


def load_offset_map(path: str | Path) -> VarOffsetMap:
    records = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                records.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise FormatError(f"{path}:{lineno}: {exc}") from None
    return offset_map_from_records(records)


def infer_offsets_from_wat(func: WatFunction, module: WatModule) -> list[int]:
    """Frame-pointer-relative offsets touched by loads/stores, for use without DWARF."""
    return sorted({a.offset for a in frame_accesses(func, module)})


def _identifier_spans(src: Source, node=None) -> list[tuple[int, int, str]]:
    out = []
    for n in walk(node if node is not None else src.root):
        if n.type == "identifier":
            out.append((n.start_byte, n.end_byte, n.text.decode("utf-8")))
    return out


def _rewrite(data: bytes, edits: list[tuple[int, int, str]]) -> str:
    pieces = []
    pos = 0
    for start, end, new in sorted(edits):
        pieces.append(data[pos:start])
        pieces.append(new.encode("utf-8"))
        pos = end
    pieces.append(data[pos:])
    return b"".join(pieces).decode("utf-8")


def _substitution(entries: Iterable[OffsetEntry], present: set[str]) -> dict[str, str]:
    subst = {e.name: e.target for e in entries if e.name != e.target}
    live = {k: v for k, v in subst.items() if k in present}
    if live:
        taken = {v for v in subst.values() if v in present}
        # a target already in the text next to its source would merge two variables
        if taken:
            raise UnmappedCollision(f"identifiers {sorted(taken)} already present in renamed-to form")
    return live


def rename_c_source(c_text: str, entries: Iterable[OffsetEntry]) -> str:
    """Rewrite identifier tokens only; strings, comments and fields are untouched."""
    entries = list(entries)
    if not entries:
        return c_text
    src = Source(c_text)
    spans = _identifier_spans(src)
    subst = _substitution(entries, {s[2] for s in spans})
    if not subst:
        return c_text
    return _rewrite(src.data, [(a, b, subst[n]) for a, b, n in spans if n in subst])


def rename_c_file(c_text: str, offset_map: VarOffsetMap) -> str:
    """Apply each function's entries inside that function's definition only."""
    src = Source(c_text)
    edits = []
    for name, defn in top_level_functions(src).items():
        entries = offset_map.entries(name)
        if not entries:
            continue
        spans = _identifier_spans(src, defn)
        subst = _substitution(entries, {s[2] for s in spans})
        edits.extend((a, b, subst[n]) for a, b, n in spans if n in subst)
    if not edits:
        return c_text
    return _rewrite(src.data, edits)
