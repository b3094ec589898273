"""End-to-end decompilation of a parsed wat module."""

from __future__ import annotations

import json
import logging
import re
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from ..context import ContextBundle, params_from_wat, spatial_info, temporal_info
from ..cparse import Source
from ..errors import BackendError, EmptyCompletion, PromptTooLong, UnknownCallee, WatDecompError
from ..slicer import MARKER_RE, block_id, expand_block, missing_blocks, order_functions, slice_function
from ..wat.declarations import c_identifier, signature_to_declaration
from ..wat.model import WatFunction, WatModule
from ..wat.strings import extract_data_strings
from .backend import Backend, snippet_key
from .prompt import DEFAULT_MAX_TOKENS, INPUT_LABEL, INSTRUCTION, INSTRUCTION_LABEL, RESPONSE_LABEL
from .prompt import PromptRecord, count_tokens, synthesize_prompt
from .strings import recover_strings

log = logging.getLogger(__name__)

REPORT_SCHEMA = "watdecomp.decompile/1"

LIBC_HEADERS = {
    "stdio.h": "printf puts putchar getchar scanf sprintf snprintf fprintf fputs fgets fopen fclose fread fwrite getc putc",
    "stdlib.h": "malloc calloc realloc free exit abort atoi atol strtol strtoul rand srand abs labs qsort",
    "string.h": "strlen strcmp strncmp strcpy strncpy strcat strncat strchr strrchr strstr memcpy memmove memset memcmp",
    "math.h": "sqrt pow sin cos tan exp log log10 fabs floor ceil fmod round",
    "ctype.h": "isalpha isdigit isalnum isspace isupper islower toupper tolower",
}
HEADER_OF = {fn: hdr for hdr, names in LIBC_HEADERS.items() for fn in names.split()}

MAIN_ALIASES = ("__original_main", "__main_argc_argv", "__main_void")


def is_toolchain_shim(func: WatFunction, module: WatModule) -> bool:
    """Linker-synthesised functions with no source counterpart."""
    if func.name.startswith("__wasm_"):
        return True
    if func.name in ("main", "_start") and not func.loop_spans:
        targets = {module.functions[i].name for i in func.callees}
        return bool(targets) and targets <= set(MAIN_ALIASES)
    return False


# --- completion cleanup -------------------------------------------------------

_FENCE = re.compile(r"```[a-zA-Z]*\n(.*?)(?:```|\Z)", re.DOTALL)
_LABELS = (INSTRUCTION_LABEL, INPUT_LABEL, RESPONSE_LABEL)


def _balanced_end(text: str) -> int | None:
    """Offset just past the first top-level brace group's statement, if any."""
    depth = 0
    opened = False
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch in "\"'":
            j = i + 1
            while j < n and text[j] != ch and text[j] != "\n":
                j += 2 if text[j] == "\\" else 1
            i = j + 1
            continue
        if text.startswith("//", i):
            nl = text.find("\n", i)
            i = n if nl < 0 else nl
            continue
        if text.startswith("/*", i):
            close = text.find("*/", i + 2)
            i = n if close < 0 else close + 2
            continue
        if ch == "{":
            depth += 1
            opened = True
        elif ch == "}":
            depth -= 1
            if depth < 0:
                return i
            if depth == 0 and opened:
                end = i + 1
                # do { ... } while (...);
                m = re.match(r"\s*while\s*\(.*?\)\s*;", text[end:], re.DOTALL)
                if m:
                    end += m.end()
                return end
        i += 1
    return None


def postprocess(completion: str, prompt_text: str = "") -> str:
    text = completion
    if prompt_text and text.startswith(prompt_text):
        text = text[len(prompt_text) :]
    m = _FENCE.search(text)
    if m:
        text = m.group(1)
    for label in _LABELS:
        cut = text.find(label)
        if cut >= 0:
            text = text[:cut]
    end = _balanced_end(text)
    if end is not None:
        text = text[:end]
    return text.strip("\n").rstrip()


def decompile_snippet(prompt: PromptRecord, backend: Backend) -> str:
    if prompt.mode != "inference":
        raise ValueError("decompile_snippet needs an inference-mode prompt")
    raw = backend.complete(prompt)
    text = postprocess(raw, prompt.render())
    if not text.strip():
        raise EmptyCompletion("completion is empty after cleanup", prompt.block_id)
    return text


# --- results ------------------------------------------------------------------


@dataclass
class SnippetTranscript:
    block_id: str
    function: str
    status: str
    snippet_sha256: str
    prompt_tokens: int = 0
    completion_tokens: int = 0
    error: str | None = None
    completion: str | None = None
    elapsed_ms: float | None = None

    def to_record(self, timings: bool = False) -> dict:
        rec = {
            "schema": REPORT_SCHEMA,
            "kind": "snippet",
            "block_id": self.block_id,
            "function": self.function,
            "status": self.status,
            "snippet_sha256": self.snippet_sha256,
            "prompt_tokens": self.prompt_tokens,
            "completion_tokens": self.completion_tokens,
            "error": self.error,
        }
        if timings and self.elapsed_ms is not None:
            rec["elapsed_ms"] = round(self.elapsed_ms, 3)
        return rec


@dataclass
class DecompiledUnit:
    functions: dict[str, str] = field(default_factory=dict)
    includes: list[str] = field(default_factory=list)
    declarations: list[str] = field(default_factory=list)
    recovered_strings: int = 0
    unresolved_placeholders: list[int] = field(default_factory=list)
    incomplete: dict[str, str] = field(default_factory=dict)
    transcripts: list[SnippetTranscript] = field(default_factory=list)
    conflicts: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.incomplete and all(t.status == "ok" for t in self.transcripts)

    @property
    def text(self) -> str:
        parts = []
        if self.includes:
            parts.append("\n".join(f"#include <{h}>" for h in self.includes))
        if self.declarations:
            parts.append("\n".join(self.declarations))
        parts.extend(self.functions.values())
        return "\n\n".join(parts) + "\n" if parts else ""

    def report_records(self, timings: bool = False) -> list[dict]:
        recs = [t.to_record(timings) for t in self.transcripts]
        for name, reason in self.incomplete.items():
            recs.append({"schema": REPORT_SCHEMA, "kind": "function", "function": name,
                         "status": "incomplete", "reason": reason})
        recs.append(
            {
                "schema": REPORT_SCHEMA,
                "kind": "summary",
                "functions_emitted": list(self.functions),
                "functions_incomplete": sorted(self.incomplete),
                "snippets_ok": sum(t.status == "ok" for t in self.transcripts),
                "snippets_failed": sum(t.status != "ok" for t in self.transcripts),
                "recovered_strings": self.recovered_strings,
                "unresolved_placeholders": self.unresolved_placeholders,
                "declaration_conflicts": self.conflicts,
            }
        )
        return recs

    def write(self, out_c: str | Path, report: str | Path, timings: bool = False) -> None:
        for p in (Path(out_c), Path(report)):
            p.parent.mkdir(parents=True, exist_ok=True)
        Path(out_c).write_text(self.text, encoding="utf-8")
        with open(report, "w", encoding="utf-8") as fh:
            for rec in self.report_records(timings):
                fh.write(json.dumps(rec, sort_keys=True) + "\n")


# --- per-function work -----------------------------------------------------------


def dedupe_declarations(c_func: str) -> tuple[str, list[str]]:
    """Drop repeated identical declarations at function-body top level.

    Returns the new text and conflict notes for same-name, different-text pairs.
    """
    src = Source(c_func)
    defs = [n for n in src.root.children if n.type == "function_definition"]
    if len(defs) != 1:
        return c_func, []
    body = defs[0].child_by_field_name("body")
    if body is None:
        return c_func, []
    seen_text: set[str] = set()
    seen_name: dict[str, str] = {}
    drop: list[tuple[int, int]] = []
    conflicts: list[str] = []
    for stmt in body.named_children:
        if stmt.type != "declaration":
            continue
        norm = " ".join(src.node_text(stmt).split())
        names = [
            d.text.decode() for d in stmt.named_children
            if d.type in ("identifier", "init_declarator", "array_declarator", "pointer_declarator")
        ]
        if norm in seen_text:
            drop.append((stmt.start_byte, stmt.end_byte))
            continue
        seen_text.add(norm)
        for nm in names:
            key = re.split(r"[\s=\[]", nm.lstrip("*").strip(), maxsplit=1)[0]
            if key in seen_name and seen_name[key] != norm:
                conflicts.append(f"{key}: {seen_name[key]!r} vs {norm!r}")
            seen_name.setdefault(key, norm)
    if not drop:
        return c_func, conflicts
    data = src.data
    out = bytearray()
    pos = 0
    for start, end in drop:
        ls = data.rfind(b"\n", 0, start) + 1
        le = data.find(b"\n", end)
        # remove the whole line when the declaration is alone on it
        if not data[ls:start].strip() and le >= 0 and not data[end:le].strip():
            start, end = ls, le + 1
        out += data[pos:start]
        pos = end
    out += data[pos:]
    return out.decode("utf-8"), conflicts


@dataclass
class _FunctionResult:
    name: str
    text: str | None
    reason: str | None
    transcripts: list[SnippetTranscript]


def _decompile_function(
    func: WatFunction,
    module: WatModule,
    backend: Backend,
    instruction: str,
    max_tokens: int,
    timings: bool,
) -> _FunctionResult:
    snippets = slice_function(func)
    params = params_from_wat(func, module)
    completions: dict[str, str] = {}
    prior: list[str] = []
    transcripts: list[SnippetTranscript] = []
    dropped: list[str] = []
    for snip in snippets:
        t0 = time.perf_counter()
        tr = SnippetTranscript(snip.block_id, func.name, "ok", snippet_key(snip.text))
        try:
            ctx = ContextBundle(temporal_info(prior, params), tuple(spatial_info(snip, module)))
            prompt = synthesize_prompt(snip, ctx, "inference", instruction=instruction, max_tokens=max_tokens)
            tr.prompt_tokens = count_tokens(prompt.render())
            text = decompile_snippet(prompt, backend)
        except (BackendError, PromptTooLong, UnknownCallee) as exc:
            tr.status = type(exc).__name__
            tr.error = str(exc)
            transcripts.append(tr)
            continue
        finally:
            if timings:
                tr.elapsed_ms = (time.perf_counter() - t0) * 1000
        tr.completion_tokens = count_tokens(text)
        tr.completion = text
        transcripts.append(tr)
        completions[snip.block_id] = text
        prior.append(text)
        present = {m.group(1) for m in MARKER_RE.finditer(text)}
        dropped.extend(c for c in snip.child_ids if c not in present)

    root = block_id(func.name, 0)
    missing = missing_blocks(completions, root)
    if missing:
        return _FunctionResult(func.name, None, f"UnresolvedMarker: {', '.join(missing)}", transcripts)
    if dropped:
        return _FunctionResult(func.name, None, f"DroppedMarker: {', '.join(dropped)}", transcripts)
    try:
        text = expand_block(completions, root)
    except WatDecompError as exc:
        return _FunctionResult(func.name, None, f"{type(exc).__name__}: {exc}", transcripts)
    return _FunctionResult(func.name, text, None, transcripts)


def decompile_module(
    module: WatModule,
    backend: Backend,
    *,
    functions: Iterable[str] | None = None,
    skip_shims: bool = True,
    instruction: str = INSTRUCTION,
    max_tokens: int = DEFAULT_MAX_TOKENS,
    workers: int = 1,
    timings: bool = False,
) -> DecompiledUnit:
    """Slice, prompt, complete, reassemble and string-recover every function.

    Functions run concurrently up to ``workers``; snippets inside one function
    run in block order because each one's context depends on the previous ones.
    """
    wanted = set(functions) if functions is not None else None
    order = []
    for idx in order_functions(module):
        func = module.functions[idx]
        if wanted is not None and func.name not in wanted:
            continue
        if wanted is None and skip_shims and is_toolchain_shim(func, module):
            continue
        order.append(func)

    lock = threading.Lock()
    results: dict[str, _FunctionResult] = {}

    def run(func: WatFunction) -> None:
        res = _decompile_function(func, module, backend, instruction, max_tokens, timings)
        with lock:
            results[func.name] = res

    if workers > 1 and len(order) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(run, order))
    else:
        for func in order:
            run(func)

    strings = extract_data_strings(module)
    unit = DecompiledUnit()
    emitted: list[WatFunction] = []
    unresolved: set[int] = set()
    for func in order:
        res = results[func.name]
        unit.transcripts.extend(res.transcripts)
        if res.text is None:
            unit.incomplete[func.name] = res.reason or "failed"
            continue
        text, conflicts = dedupe_declarations(res.text)
        for note in conflicts:
            log.warning("%s: conflicting declarations %s", func.name, note)
        unit.conflicts.extend(f"{func.name}: {c}" for c in conflicts)
        before = len(re.findall(r"\bSTR_\d+\b", text))
        text, missing = recover_strings(text, strings)
        unit.recovered_strings += before - len(missing)
        unresolved.update(missing)
        unit.functions[func.name] = text
        emitted.append(func)
    unit.unresolved_placeholders = sorted(unresolved)

    includes: set[str] = set()
    decls: list[str] = []
    emitted_names = {f.name for f in emitted}
    for func in emitted:
        for k in sorted(func.import_callees):
            imp = module.imports[k]
            if imp.field in HEADER_OF:
                includes.add(HEADER_OF[imp.field])
            else:
                decl = signature_to_declaration(imp.signature.renamed(c_identifier(imp.field)))
                if decl not in decls:
                    decls.append(decl)
        for k in sorted(func.callees):
            callee = module.functions[k]
            if callee.name not in emitted_names:
                decl = signature_to_declaration(callee.signature)
                if decl not in decls:
                    decls.append(decl)
    unit.includes = sorted(includes)
    unit.declarations = decls
    return unit
