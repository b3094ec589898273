"""Produce the variable/offset exchange file from a wasm module's DWARF.

Only the subset emitted by clang at -O0 matters here: every named local
and parameter lives at ``DW_OP_fbreg <sleb>`` relative to the frame base,
which is the same frame-pointer-relative offset the wat loads and stores
use. Variables without such a location are reported, not mapped.
"""

from __future__ import annotations

import io
import json
from pathlib import Path

from elftools.dwarf.dwarfinfo import DebugSectionDescriptor, DWARFInfo, DwarfConfig

from .errors import FormatError

DW_OP_FBREG = 0x91


def _uleb(buf: bytes, i: int) -> tuple[int, int]:
    result = shift = 0
    while True:
        b = buf[i]
        i += 1
        result |= (b & 0x7F) << shift
        shift += 7
        if not b & 0x80:
            return result, i


def _sleb(buf, i: int) -> tuple[int, int]:
    result = shift = 0
    while True:
        b = buf[i]
        i += 1
        result |= (b & 0x7F) << shift
        shift += 7
        if not b & 0x80:
            if b & 0x40:
                result -= 1 << shift
            return result, i


def custom_sections(wasm: bytes) -> dict[str, bytes]:
    if wasm[:4] != b"\0asm":
        raise FormatError("not a wasm binary")
    out = {}
    i = 8
    while i < len(wasm):
        sid = wasm[i]
        size, i = _uleb(wasm, i + 1)
        end = i + size
        if sid == 0:
            nlen, j = _uleb(wasm, i)
            out[wasm[j : j + nlen].decode("utf-8")] = wasm[j + nlen : end]
        i = end
    return out


def _dwarf(sections: dict[str, bytes]) -> DWARFInfo:
    def sec(name):
        data = sections.get(name)
        if data is None:
            return None
        return DebugSectionDescriptor(io.BytesIO(data), name, None, len(data), 0)

    if ".debug_info" not in sections:
        raise FormatError("module carries no DWARF (.debug_info missing); compile with -g")
    return DWARFInfo(
        config=DwarfConfig(little_endian=True, default_address_size=4, machine_arch="wasm"),
        debug_info_sec=sec(".debug_info"),
        debug_aranges_sec=None,
        debug_abbrev_sec=sec(".debug_abbrev"),
        debug_frame_sec=None,
        eh_frame_sec=None,
        debug_str_sec=sec(".debug_str"),
        debug_loc_sec=sec(".debug_loc"),
        debug_ranges_sec=sec(".debug_ranges"),
        debug_line_sec=sec(".debug_line"),
        debug_pubtypes_sec=None,
        debug_pubnames_sec=None,
        debug_addr_sec=sec(".debug_addr"),
        debug_str_offsets_sec=sec(".debug_str_offsets"),
        debug_line_str_sec=sec(".debug_line_str"),
        debug_loclists_sec=sec(".debug_loclists"),
        debug_rnglists_sec=sec(".debug_rnglists"),
        debug_sup_sec=None,
        gnu_debugaltlink_sec=None,
        debug_types_sec=None,
    )


def _name(die) -> str | None:
    attr = die.attributes.get("DW_AT_name")
    if attr is None:
        return None
    val = attr.value
    return val.decode("utf-8") if isinstance(val, bytes) else str(val)


def type_name(die, depth: int = 0) -> str:
    """Render a DW_AT_type chain as C type text (``int``, ``char*``, ``int[8]``)."""
    if depth > 16 or "DW_AT_type" not in die.attributes and die.tag != "DW_TAG_base_type":
        return "void"
    if die.tag in ("DW_TAG_base_type", "DW_TAG_typedef"):
        return _name(die) or "void"
    if die.tag in ("DW_TAG_structure_type", "DW_TAG_union_type", "DW_TAG_enumeration_type"):
        kw = die.tag[len("DW_TAG_") : -len("_type")].replace("structure", "struct")
        return f"{kw} {_name(die) or 'anon'}"
    target = die.get_DIE_from_attribute("DW_AT_type") if "DW_AT_type" in die.attributes else None
    inner = type_name(target, depth + 1) if target is not None else "void"
    if die.tag == "DW_TAG_pointer_type":
        return inner + "*"
    if die.tag == "DW_TAG_array_type":
        dims = ""
        for sub in die.iter_children():
            if sub.tag != "DW_TAG_subrange_type":
                continue
            if "DW_AT_count" in sub.attributes:
                dims += f"[{sub.attributes['DW_AT_count'].value}]"
            elif "DW_AT_upper_bound" in sub.attributes:
                dims += f"[{sub.attributes['DW_AT_upper_bound'].value + 1}]"
            else:
                dims += "[]"
        return inner + dims
    # const/volatile/restrict and friends: the qualifier is irrelevant to renaming
    return inner


def _frame_offset(die) -> int | None:
    loc = die.attributes.get("DW_AT_location")
    if loc is None or not isinstance(loc.value, list) or not loc.value:
        return None
    expr = loc.value
    if expr[0] != DW_OP_FBREG:
        return None
    off, end = _sleb(expr, 1)
    return off if end == len(expr) else None


def _locals(die):
    for child in die.iter_children():
        if child.tag in ("DW_TAG_formal_parameter", "DW_TAG_variable"):
            yield child
        elif child.tag == "DW_TAG_lexical_block":
            yield from _locals(child)


def extract_offsets(wasm_path: str | Path, source: str | None = None) -> tuple[list[dict], list[dict]]:
    """Return (records, unmapped) for every function defined in matching CUs.

    ``source`` restricts to compile units whose file name equals its basename.
    """
    info = _dwarf(custom_sections(Path(wasm_path).read_bytes()))
    want = Path(source).name if source else None
    records: list[dict] = []
    unmapped: list[dict] = []
    for cu in info.iter_CUs():
        top = cu.get_top_DIE()
        cu_name = _name(top) or ""
        if want is not None and Path(cu_name).name != want:
            continue
        for die in top.iter_children():
            if die.tag != "DW_TAG_subprogram" or "DW_AT_frame_base" not in die.attributes:
                continue
            fname = _name(die)
            if fname is None:
                continue
            for var in _locals(die):
                vname = _name(var)
                if vname is None:
                    continue
                offset = _frame_offset(var)
                vtype = type_name(var)
                if offset is None or offset < 0:
                    unmapped.append({"function": fname, "name": vname, "type": vtype})
                    continue
                records.append({"function": fname, "name": vname, "offset": offset, "type": vtype})
    return records, unmapped


def write_offsets(records: list[dict], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")
