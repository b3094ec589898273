"""Training-record construction from a C corpus.

Per file: compile with debug info, convert to wat, read the variable/offset
map, then for every source function rename variables, swap string literals
for ``STR_{offset}`` placeholders, slice C and wat at loops and pair the
snippets. Any failure drops the whole file with a reason; nothing is repaired.
"""

from __future__ import annotations

import json
import logging
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .context import params_from_wat, spatial_info, temporal_info
from .cparse import LOOP_TYPES, Source, is_broken, top_level_functions, walk
from .errors import ToolchainMissing, UnknownCallee, WatDecompError
from .renamer import VarOffsetMap, load_offset_map, offset_map_from_records, rename_c_source
from .slicer import MARKER_RE, Snippet, slice_function, slice_text
from .wat.convert import DEFAULT_CONVERTER, wasm_to_wat
from .wat.model import WatModule
from .wat.parser import parse_module
from .wat.strings import OffsetStringMap, bytes_to_text, extract_data_strings
from .pipeline.decompile import MAIN_ALIASES
from .pipeline.strings import PLACEHOLDER_RE, c_unescape, placeholder
from .toolchain import FORGE_COMPILERS, compile_c, require, resolve

log = logging.getLogger(__name__)

RECORD_SCHEMA = "watdecomp.dataset/1"
SKIP_SCHEMA = "watdecomp.dataset-skip/1"


class Reject(WatDecompError):
    def __init__(self, reason: str, detail: str = ""):
        self.reason = reason
        self.detail = detail
        super().__init__(f"{reason}: {detail}" if detail else reason)


def slice_c_function(c_func_text: str, function_name: str) -> list[Snippet]:
    """Cut a C function at its for/while/do statements."""
    src = Source(c_func_text)
    if is_broken(src.root):
        raise Reject("c_parse_error", function_name)
    spans = [src.span(n) for n in walk(src.root) if n.type in LOOP_TYPES]
    return slice_text(c_func_text, spans, function_name, "c")


def _shape(snips: list[Snippet]) -> list[tuple[int, ...]]:
    return [tuple(int(c.rpartition("_")[2]) for c in s.child_ids) for s in snips]


def align(c_snips: list[Snippet], wat_snips: list[Snippet]) -> list[tuple[Snippet, Snippet]]:
    """Pair by block index; raises Reject on a count or nesting mismatch."""
    if len(c_snips) != len(wat_snips):
        raise Reject("count_mismatch", f"C has {len(c_snips) - 1} loops, wat has {len(wat_snips) - 1}")
    if _shape(c_snips) != _shape(wat_snips):
        raise Reject("shape_mismatch", "loop nesting differs")
    return list(zip(c_snips, wat_snips))


# --- string literals ------------------------------------------------------------------


def placeholder_strings(c_text: str, strings: OffsetStringMap, where: str = "") -> str:
    """Replace each string literal found in the data segments by its placeholder."""
    src = Source(c_text)
    edits = []
    for node in walk(src.root):
        if node.type not in ("string_literal", "concatenated_string"):
            continue
        if node.parent is not None and node.parent.type == "concatenated_string":
            continue
        parts = [node] if node.type == "string_literal" else [c for c in node.named_children if c.type == "string_literal"]
        try:
            raw = b"".join(c_unescape(src.node_text(p)) for p in parts)
        except ValueError:
            continue  # prefixed (L"", u8"") or malformed literal: left as is
        offsets = strings.offsets_of(bytes_to_text(raw)) if raw else []
        if not offsets:
            log.info("%s: literal %s not found in data segments", where, src.node_text(node)[:40])
            continue
        if len(offsets) > 1:
            log.info("%s: literal matches offsets %s, using %d", where, offsets, offsets[0])
        edits.append((node.start_byte, node.end_byte, placeholder(offsets[0])))
    if not edits:
        return c_text
    data = src.data
    out = bytearray()
    pos = 0
    for start, end, new in edits:
        out += data[pos:start] + new.encode()
        pos = end
    out += data[pos:]
    return out.decode("utf-8")


# --- records ------------------------------------------------------------------------


@dataclass
class FileResult:
    source: str
    records: list[dict] = field(default_factory=list)
    skip: dict | None = None


def _wat_name(c_name: str, module: WatModule) -> str | None:
    if c_name == "main":
        for alias in MAIN_ALIASES:
            if module.has_function(alias):
                return alias
    return c_name if module.has_function(c_name) else None


def check_record(rec: dict) -> None:
    wat_markers = MARKER_RE.findall(rec["wat_snippet"])
    c_markers = MARKER_RE.findall(rec["c_snippet"])
    if sorted(wat_markers) != sorted(c_markers):
        raise Reject("marker_parity", rec["block_id"])
    for off in PLACEHOLDER_RE.findall(rec["c_snippet"]):
        if off not in rec["offset2string"]:
            raise Reject("placeholder_coverage", f"{rec['block_id']}: STR_{off}")


def build_records(c_text: str, module: WatModule, offset_map: VarOffsetMap, source: str = "") -> list[dict]:
    """Records for every function of one C file; raises Reject to drop the file."""
    src = Source(c_text)
    if is_broken(src.root):
        raise Reject("c_parse_error", source)
    strings = extract_data_strings(module)
    records: list[dict] = []
    for c_name, node in top_level_functions(src).items():
        wat_name = _wat_name(c_name, module)
        if wat_name is None:
            raise Reject("no_wat_function", c_name)
        func = module.function(wat_name)
        try:
            renamed = rename_c_source(src.node_text(node), offset_map.entries(c_name))
        except WatDecompError as exc:
            raise Reject("rename_failed", f"{c_name}: {exc}") from None
        text = placeholder_strings(renamed, strings, f"{source}:{c_name}")
        pairs = align(slice_c_function(text, wat_name), slice_function(func))
        params = params_from_wat(func, module)
        prior: list[str] = []
        for c_snip, w_snip in pairs:
            try:
                spatial = spatial_info(w_snip, module)
            except UnknownCallee as exc:
                raise Reject("unknown_callee", str(exc)) from None
            temporal = temporal_info(prior, params)
            used = sorted({int(o) for o in PLACEHOLDER_RE.findall(c_snip.text)})
            rec = {
                "schema": RECORD_SCHEMA,
                "source": source,
                "function": wat_name,
                "c_function": c_name,
                "block_id": w_snip.block_id,
                "wat_snippet": w_snip.text,
                "c_snippet": c_snip.text,
                "spatial_info": spatial,
                "temporal_info": [{"name": v.name, "type": v.c_type} for v in temporal],
                "offset2string": {str(o): strings[o] for o in used if o in strings},
            }
            check_record(rec)
            records.append(rec)
            prior.append(c_snip.text)
    return records


def forge_file(
    c_path: str | Path,
    compiler: str = FORGE_COMPILERS["emcc"],
    converter: str = DEFAULT_CONVERTER,
    timeout: float = 120.0,
) -> FileResult:
    """Compile, convert and build records for one file. Never raises."""
    from .dwarfmap import extract_offsets  # pyelftools only needed here

    c_path = Path(c_path)
    compiler = resolve(compiler, FORGE_COMPILERS)
    result = FileResult(str(c_path))
    try:
        with tempfile.TemporaryDirectory(prefix="forge-") as tmp:
            wasm = Path(tmp) / (c_path.stem + ".wasm")
            outcome = compile_c(compiler, c_path, wasm, timeout)
            if outcome.returncode != 0 or not wasm.exists():
                raise Reject("compile_failed", outcome.stderr.decode("utf-8", "replace")[-400:])
            module = parse_module(wasm_to_wat(wasm, converter, timeout))
            side = c_path.with_suffix(".offsets.jsonl")
            if side.exists():
                offsets = load_offset_map(side)
            else:
                offsets = offset_map_from_records(extract_offsets(wasm, c_path.name)[0])
        result.records = build_records(c_path.read_text(encoding="utf-8"), module, offsets, str(c_path))
    except Reject as exc:
        result.skip = {"reason": exc.reason, "detail": exc.detail}
    except ToolchainMissing:
        raise  # environment problem, not a property of this file
    except WatDecompError as exc:
        result.skip = {"reason": type(exc).__name__, "detail": str(exc)}
    except OSError as exc:
        result.skip = {"reason": "io_error", "detail": str(exc)}
    if result.skip is not None:
        result.records = []
        log.info("skip %s: %s", c_path, result.skip["reason"])
    return result


def forge_corpus(
    corpus_root: str | Path,
    records_path: str | Path,
    skips_path: str | Path,
    *,
    compiler: str = FORGE_COMPILERS["emcc"],
    converter: str = DEFAULT_CONVERTER,
    workers: int = 1,
    timeout: float = 120.0,
) -> tuple[int, int]:
    """Returns (records written, files skipped). Output order is by file path."""
    files = sorted(Path(corpus_root).rglob("*.c"))
    compiler = require(compiler, FORGE_COMPILERS)
    require(converter, {})

    def one(p: Path) -> FileResult:
        return forge_file(p, compiler, converter, timeout)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, files))
    else:
        results = [one(p) for p in files]

    n_records = n_skipped = 0
    with open(records_path, "w", encoding="utf-8") as rec_fh, open(skips_path, "w", encoding="utf-8") as skip_fh:
        for res in results:
            for rec in res.records:
                rec_fh.write(json.dumps(rec, sort_keys=True, ensure_ascii=False) + "\n")
                n_records += 1
            if res.skip is not None:
                skip_fh.write(json.dumps({"schema": SKIP_SCHEMA, "source": res.source, **res.skip}, sort_keys=True) + "\n")
                n_skipped += 1
    return n_records, n_skipped


def mock_table(records) -> dict[str, str]:
    """sha256(wat snippet) → gold C snippet, the oracle table for the mock backend."""
    from .pipeline.backend import snippet_key

    return {snippet_key(r["wat_snippet"]): r["c_snippet"] for r in records}


__all__ = [
    "Reject",
    "align",
    "build_records",
    "check_record",
    "forge_corpus",
    "forge_file",
    "mock_table",
    "placeholder_strings",
    "slice_c_function",
]

