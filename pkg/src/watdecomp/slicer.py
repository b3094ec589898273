"""Loop-aligned program slicing and marker-based reassembly.

A function is cut into one snippet per loop plus a root snippet for the
whole body (block 0). Inside every snippet each directly nested loop is
replaced by a marker token ``<<{block_id}>>`` naming the child snippet, so
no snippet carries more than one loop of its own.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import CyclicMarker, OverlapError, UnresolvedMarker
from .wat.model import WatFunction, WatModule

MARKER_TEMPLATE = "<<{}>>"
MARKER_RE = re.compile(r"<<(\S+?)>>")


def marker(block_id: str) -> str:
    return MARKER_TEMPLATE.format(block_id)


def block_id(function_name: str, index: int) -> str:
    return f"{function_name}_{index}"


def split_block_id(bid: str) -> tuple[str, int]:
    name, _, idx = bid.rpartition("_")
    return name, int(idx)


@dataclass(frozen=True)
class MarkerRef:
    child_block_id: str

    @property
    def token(self) -> str:
        return marker(self.child_block_id)


@dataclass(frozen=True)
class Snippet:
    block_id: str
    text: str
    markers: tuple[MarkerRef, ...] = ()
    language: str = "wat"
    start: int = 0
    end: int = 0
    """Character extent of the snippet inside the function text."""

    @property
    def function(self) -> str:
        return split_block_id(self.block_id)[0]

    @property
    def index(self) -> int:
        return split_block_id(self.block_id)[1]

    @property
    def child_ids(self) -> list[str]:
        return [m.child_block_id for m in self.markers]


@dataclass(frozen=True)
class SlicedProgram:
    ordered_functions: tuple[int, ...] = ()
    blocks: dict[str, Snippet] = field(default_factory=dict)

    def marker_edges(self) -> list[tuple[str, str]]:
        return [(bid, ref.child_block_id) for bid, snip in self.blocks.items() for ref in snip.markers]

    def export(self, out_dir: str | Path, suffix: str = ".wat") -> dict:
        """Write one file per block plus ``manifest.json``; returns the manifest."""
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        entries = []
        for bid, snip in self.blocks.items():
            fname = bid.replace("/", "%2F") + suffix
            (out / fname).write_text(snip.text + "\n", encoding="utf-8")
            entries.append(
                {
                    "block_id": bid,
                    "file": fname,
                    "function": snip.function,
                    "extent": [snip.start, snip.end],
                    "markers": snip.child_ids,
                }
            )
        manifest = {
            "schema": "watdecomp.slice/1",
            "ordered_functions": list(self.ordered_functions),
            "blocks": entries,
            "edges": [list(e) for e in self.marker_edges()],
        }
        (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
        return manifest


# --- dependency ordering ----------------------------------------------------


def _sccs(n: int, succ: Sequence[Iterable[int]]) -> list[frozenset[int]]:
    """Tarjan's algorithm, iterative."""
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack: list[int] = []
    out: list[frozenset[int]] = []
    counter = 0
    for root in range(n):
        if index[root] >= 0:
            continue
        work = [(root, iter(sorted(succ[root])))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack[root] = True
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if index[w] < 0:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack[w] = True
                    work.append((w, iter(sorted(succ[w]))))
                    advanced = True
                    break
                if on_stack[w]:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                low[work[-1][0]] = min(low[work[-1][0]], low[v])
            if low[v] == index[v]:
                comp = set()
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.add(w)
                    if w == v:
                        break
                out.append(frozenset(comp))
    return out


def order_functions(module: WatModule) -> list[int]:
    """Callee-first ordering of defined functions.

    Repeated passes over the remaining functions in index order; a function
    is emitted once everything it calls has been emitted. Call cycles are
    collapsed into strongly connected components that are emitted together
    in ascending index order. Imported callees never block.
    """
    n = len(module.functions)
    succ = [f.callees for f in module.functions]
    pending = sorted(_sccs(n, succ), key=min)
    done: set[int] = set()
    ordered: list[int] = []
    while pending:
        remaining = []
        for comp in pending:
            deps = set().union(*(succ[m] for m in comp)) - comp
            if deps <= done:
                ordered.extend(sorted(comp))
                done |= comp
            else:
                remaining.append(comp)
        if len(remaining) == len(pending):  # pragma: no cover - condensation is acyclic
            raise RuntimeError("dependency ordering made no progress")
        pending = remaining
    return ordered


# --- slicing ---------------------------------------------------------------


def _widen(text: str, start: int, end: int) -> tuple[int, int, bool]:
    ls = text.rfind("\n", 0, start) + 1
    line_mode = text[ls:start].strip() == ""
    if line_mode:
        start = ls
    le = text.find("\n", end)
    le = len(text) if le < 0 else le
    if text[end:le].strip() == "":
        end = le
    return start, end, line_mode


def slice_text(
    text: str,
    spans: Sequence[tuple[int, int]],
    function_name: str,
    language: str = "wat",
) -> list[Snippet]:
    """Cut ``text`` at the given loop spans (character offsets)."""
    spans = sorted(spans)
    for i, (s1, e1) in enumerate(spans):
        if not s1 < e1:
            raise OverlapError(f"{function_name}: empty loop extent at {s1}")
        for s2, e2 in spans[i + 1 :]:
            if s2 >= e1:
                break
            if e2 > e1:
                raise OverlapError(f"{function_name}: loop extents {(s1, e1)} and {(s2, e2)} partially overlap")

    # parent links via a containment stack; index 0 is the whole text
    regions = [(0, len(text), False)] + [_widen(text, s, e) for s, e in spans]
    children: list[list[int]] = [[] for _ in regions]
    stack = [0]
    for k, (s, e) in enumerate(spans, start=1):
        while stack[-1] != 0 and spans[stack[-1] - 1][1] <= s:
            stack.pop()
        children[stack[-1]].append(k)
        stack.append(k)

    snippets = []
    for k, (s, e, _) in enumerate(regions):
        pieces = []
        pos = s
        refs = []
        for c in children[k]:
            cs, ce, line_mode = regions[c]
            child_id = block_id(function_name, c)
            pieces.append(text[pos:cs])
            indent = text[cs : spans[c - 1][0]] if line_mode else ""
            pieces.append(indent + marker(child_id))
            refs.append(MarkerRef(child_id))
            pos = ce
        pieces.append(text[pos:e])
        snippets.append(
            Snippet(block_id(function_name, k), "".join(pieces), tuple(refs), language, s, e)
        )
    return snippets


def slice_function(func: WatFunction) -> list[Snippet]:
    return slice_text(func.text, func.loop_spans, func.name, "wat")


def slice_program(module: WatModule) -> SlicedProgram:
    order = order_functions(module)
    blocks: dict[str, Snippet] = {}
    for idx in order:
        func = module.functions[idx]
        try:
            snippets = slice_function(func)
        except OverlapError as exc:
            raise OverlapError(f"in function {func.name}: {exc}") from exc
        for snip in snippets:
            blocks[snip.block_id] = snip
    return SlicedProgram(tuple(order), blocks)


# --- reassembly ------------------------------------------------------------


def _rebase(child: str, indent: str) -> str:
    lines = child.split("\n")
    first = lines[0]
    first_indent = first[: len(first) - len(first.lstrip())]
    out = []
    for line in lines:
        if line.startswith(first_indent) and line.strip():
            out.append(indent + line[len(first_indent) :])
        else:
            out.append(line)
    return "\n".join(out)


def expand_block(blocks: Mapping[str, str], root: str, _visiting: frozenset[str] = frozenset()) -> str:
    """Recursively substitute every marker in ``blocks[root]``."""
    if root in _visiting:
        raise CyclicMarker(root)
    visiting = _visiting | {root}
    text = blocks[root]
    out = []
    pos = 0
    for m in MARKER_RE.finditer(text):
        child = m.group(1)
        if child not in blocks:
            raise UnresolvedMarker(child, root)
        body = expand_block(blocks, child, visiting)
        ls = text.rfind("\n", 0, m.start()) + 1
        le = text.find("\n", m.end())
        le = len(text) if le < 0 else le
        if text[ls : m.start()].strip() == "" and text[m.end() : le].strip() == "" and ls >= pos:
            out.append(text[pos:ls])
            out.append(_rebase(body, text[ls : m.start()]))
            pos = le
        else:
            out.append(text[pos : m.start()])
            out.append(body)
            pos = m.end()
    out.append(text[pos:])
    return "".join(out)


def missing_blocks(blocks: Mapping[str, str], root: str) -> list[str]:
    """Marker targets reachable from ``root`` that have no block."""
    missing: list[str] = []
    seen: set[str] = set()
    todo = [root]
    while todo:
        bid = todo.pop()
        if bid in seen:
            continue
        seen.add(bid)
        if bid not in blocks:
            missing.append(bid)
            continue
        todo.extend(m.group(1) for m in MARKER_RE.finditer(blocks[bid]))
    return sorted(missing)


def reassemble(blocks: Mapping[str, str]) -> dict[str, str]:
    """Rebuild every function whose root block (index 0) is present."""
    out = {}
    for bid in blocks:
        name, idx = split_block_id(bid)
        if idx == 0:
            out[name] = expand_block(blocks, bid)
    return out
