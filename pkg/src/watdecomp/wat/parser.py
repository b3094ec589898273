"""Parse wat text (flat or folded) into a :class:`WatModule`.

Only the structure the rest of the toolkit needs is extracted: function
extents, loop extents, call edges, signatures, globals and data segments.
Instruction semantics are not validated.
"""

from __future__ import annotations

import re

from ..errors import ParseError, UnsupportedConstruct
from .lexer import LineIndex, SList, Token, read_sexprs
from .model import (
    VALUE_TYPES,
    DataSegment,
    FunctionSignature,
    GlobalDef,
    Import,
    WatFunction,
    WatModule,
)

_SIMD_PREFIXES = ("v128", "i8x16", "i16x8", "i32x4", "i64x2", "f32x4", "f64x2")
_UNSUPPORTED_OPS = {
    "try", "try_table", "catch", "catch_all", "throw", "throw_ref", "rethrow", "delegate",
    "return_call", "return_call_indirect", "return_call_ref", "call_ref",
}
_UNSUPPORTED_FIELDS = {"tag", "rec", "sub", "event"}
_SKIPPED_FIELDS = {"table", "export", "start", "elem"}
_TYPEUSE_HEADS = {"type", "param", "result"}


def _int(text: str) -> int:
    return int(text.replace("_", ""), 0)


def _is_num(text: str) -> bool:
    return bool(re.fullmatch(r"-?(0x[0-9a-fA-F_]+|[0-9][0-9_]*)", text))


def _check_op(tok: Token, index: LineIndex) -> None:
    t = tok.text
    if t.startswith(_SIMD_PREFIXES) or "atomic" in t or t in _UNSUPPORTED_OPS:
        raise UnsupportedConstruct(t, *index.position(tok.start))
    if t.startswith(("struct.", "array.", "ref.i31", "i31.", "br_on_")):
        raise UnsupportedConstruct(t, *index.position(tok.start))


class _ModuleParser:
    def __init__(self, text: str):
        self.text = text
        self.index = LineIndex(text)
        self.types: list[FunctionSignature] = []
        self.type_ids: dict[str, int] = {}
        self.imports: list[Import] = []
        self.globals: list[GlobalDef] = []
        self.global_ids: dict[str, int] = {}
        self.data: list[DataSegment] = []
        # wasm function index space: imports first, then definitions
        self.func_space: list[tuple[str, int]] = []
        self.func_ids: dict[str, int] = {}
        self.func_forms: list[SList] = []

    # --- helpers ---------------------------------------------------------

    def _err(self, msg: str, node) -> ParseError:
        return ParseError(msg, *self.index.position(node.start))

    def _valtype(self, tok) -> str:
        if not isinstance(tok, Token) or tok.kind != "atom":
            raise self._err("expected value type", tok)
        if tok.text not in VALUE_TYPES:
            raise UnsupportedConstruct(f"value type {tok.text}", *self.index.position(tok.start))
        return tok.text

    def _resolve_type(self, tok: Token) -> int:
        if tok.text.startswith("$"):
            if tok.text not in self.type_ids:
                raise self._err(f"unknown type {tok.text}", tok)
            return self.type_ids[tok.text]
        return _int(tok.text)

    def _typeuse(self, items: list, i: int) -> tuple[int | None, list, list, int]:
        """Consume (type N)? (param ...)* (result ...)* starting at items[i]."""
        type_idx = None
        params: list[tuple[str | None, str]] = []
        results: list[str] = []
        while i < len(items) and isinstance(items[i], SList) and items[i].head in _TYPEUSE_HEADS:
            node = items[i]
            rest = node.items[1:]
            if node.head == "type":
                type_idx = self._resolve_type(rest[0])
            elif node.head == "param":
                if rest and isinstance(rest[0], Token) and rest[0].text.startswith("$"):
                    params.append((rest[0].text, self._valtype(rest[1])))
                else:
                    params.extend((None, self._valtype(t)) for t in rest)
            else:
                results.extend(self._valtype(t) for t in rest)
            i += 1
        return type_idx, params, results, i

    def _signature(self, name: str, type_idx, params, results, node) -> FunctionSignature:
        if not params and not results and type_idx is not None:
            if type_idx >= len(self.types):
                raise self._err(f"type index {type_idx} out of range", node)
            return self.types[type_idx].renamed(name)
        if len(results) > 1:
            raise UnsupportedConstruct("multi-value result", *self.index.position(node.start))
        return FunctionSignature(name, tuple(t for _, t in params), tuple(results))

    @staticmethod
    def _id_of(items: list, i: int) -> tuple[str | None, int]:
        if i < len(items) and isinstance(items[i], Token) and items[i].text.startswith("$"):
            return items[i].text, i + 1
        return None, i

    # --- module fields ---------------------------------------------------

    def parse(self) -> WatModule:
        forms = read_sexprs(self.text, self.index)
        if not forms:
            return WatModule(text=self.text)
        if len(forms) == 1 and isinstance(forms[0], SList) and forms[0].head == "module":
            items = forms[0].items[1:]
            _, i = self._id_of(items, 0)
            if i < len(items) and isinstance(items[i], Token) and items[i].text in ("binary", "quote"):
                raise UnsupportedConstruct(f"module {items[i].text}", *self.index.position(items[i].start))
            fields = items[i:]
        else:
            fields = forms
        for f in fields:
            if not isinstance(f, SList) or f.head is None:
                raise self._err("expected module field", f)
        # types first so that typeuses anywhere can be resolved
        for f in fields:
            if f.head == "type":
                self._type_field(f)
        for f in fields:
            head = f.head
            if head == "type":
                continue
            if head in _UNSUPPORTED_FIELDS:
                raise UnsupportedConstruct(head, *self.index.position(f.start))
            if head == "import":
                self._import_field(f)
            elif head == "func":
                self._func_header(f)
            elif head == "global":
                self._global_field(f)
            elif head == "memory":
                self._memory_field(f)
            elif head == "data":
                self._data_field(f)
            elif head in _SKIPPED_FIELDS:
                continue
            else:
                raise UnsupportedConstruct(head, *self.index.position(f.start))
        functions = tuple(self._function(k, f) for k, f in enumerate(self.func_forms))
        return WatModule(
            functions=functions,
            data_segments=tuple(self.data),
            imports=tuple(self.imports),
            types=tuple(self.types),
            globals=tuple(self.globals),
            text=self.text,
        )

    def _type_field(self, f: SList) -> None:
        ident, i = self._id_of(f.items, 1)
        body = f.items[i] if i < len(f.items) else None
        if not isinstance(body, SList) or body.head != "func":
            raise UnsupportedConstruct("non-function type", *self.index.position(f.start))
        _, params, results, _ = self._typeuse(body.items, 1)
        if len(results) > 1:
            raise UnsupportedConstruct("multi-value result", *self.index.position(f.start))
        if ident:
            self.type_ids[ident] = len(self.types)
        self.types.append(FunctionSignature("", tuple(t for _, t in params), tuple(results)))

    def _add_import_func(self, ident, module, field_name, sig_items, node) -> None:
        type_idx, params, results, _ = self._typeuse(sig_items, 0)
        name = ident[1:] if ident else field_name
        sig = self._signature(name, type_idx, params, results, node)
        if ident:
            self.func_ids[ident] = len(self.func_space)
        self.func_space.append(("import", len(self.imports)))
        self.imports.append(Import(module, field_name, sig))

    def _import_field(self, f: SList) -> None:
        mod, fld, desc = f.items[1], f.items[2], f.items[3]
        if not isinstance(desc, SList):
            raise self._err("malformed import", f)
        ident, i = self._id_of(desc.items, 1)
        if desc.head == "func":
            self._add_import_func(ident, mod.text[1:-1], fld.text[1:-1], desc.items[i:], f)
        elif desc.head == "global":
            self._add_global(ident, desc.items[i], f)
        elif desc.head == "memory":
            self._memory_field(desc)

    def _func_header(self, f: SList) -> None:
        ident, i = self._id_of(f.items, 1)
        items = f.items
        while i < len(items) and isinstance(items[i], SList) and items[i].head == "export":
            i += 1
        if i < len(items) and isinstance(items[i], SList) and items[i].head == "import":
            imp = items[i]
            self._add_import_func(ident, imp.items[1].text[1:-1], imp.items[2].text[1:-1], items[i + 1 :], f)
            return
        if ident:
            self.func_ids[ident] = len(self.func_space)
        self.func_space.append(("func", len(self.func_forms)))
        self.func_forms.append(f)

    def _add_global(self, ident, gtype, node) -> None:
        if isinstance(gtype, SList) and gtype.head == "mut":
            valtype, mutable = self._valtype(gtype.items[1]), True
        else:
            valtype, mutable = self._valtype(gtype), False
        name = ident[1:] if ident else f"global{len(self.globals)}"
        if ident:
            self.global_ids[ident] = len(self.globals)
        self.globals.append(GlobalDef(name, valtype, mutable))

    def _global_field(self, f: SList) -> None:
        ident, i = self._id_of(f.items, 1)
        items = f.items
        while i < len(items) and isinstance(items[i], SList) and items[i].head in ("export", "import"):
            i += 1
        self._add_global(ident, items[i], f)

    def _memory_field(self, f: SList) -> None:
        for it in f.items:
            if isinstance(it, Token) and it.text == "shared":
                raise UnsupportedConstruct("shared memory", *self.index.position(it.start))
            if isinstance(it, Token) and it.text == "i64":
                raise UnsupportedConstruct("memory64", *self.index.position(it.start))

    def _data_field(self, f: SList) -> None:
        ident, i = self._id_of(f.items, 1)
        items = f.items
        if i < len(items) and isinstance(items[i], SList) and items[i].head == "memory":
            i += 1
        if i >= len(items) or not isinstance(items[i], SList):
            raise UnsupportedConstruct("passive data segment", *self.index.position(f.start))
        expr = items[i]
        inner = expr.items
        if expr.head == "offset":
            inner = inner[1:]
            if len(inner) == 1 and isinstance(inner[0], SList):
                inner = inner[0].items
        if len(inner) != 2 or not isinstance(inner[0], Token) or inner[0].text not in ("i32.const", "i64.const"):
            raise UnsupportedConstruct("non-constant data offset", *self.index.position(expr.start))
        base = _int(inner[1].text)
        if base < 0:
            base &= 0xFFFFFFFF
        parts = []
        for tok in items[i + 1 :]:
            if not isinstance(tok, Token) or tok.kind != "string":
                raise self._err("expected string in data segment", tok)
            parts.append(tok.text[1:-1])
        self.data.append(
            DataSegment(base, "".join(parts), ident[1:] if ident else None, self.index.line(f.start))
        )

    # --- functions -------------------------------------------------------

    def _span(self, start: int, end: int) -> tuple[int, int]:
        """Widen [start, end) to whole lines when only whitespace surrounds it."""
        text = self.text
        ls = text.rfind("\n", 0, start) + 1
        if text[ls:start].strip() == "":
            start = ls
        le = text.find("\n", end)
        le = len(text) if le < 0 else le
        if text[end:le].strip() == "":
            end = le
        return start, end

    def _function(self, k: int, f: SList) -> WatFunction:
        items = f.items
        ident, i = self._id_of(items, 1)
        while i < len(items) and isinstance(items[i], SList) and items[i].head == "export":
            i += 1
        type_idx, params, results, i = self._typeuse(items, i)
        wasm_index = len(self.imports) + k
        name = ident[1:] if ident else f"func{wasm_index}"
        sig = self._signature(name, type_idx, params, results, f)
        local_types: list[str] = []
        local_names: list[str | None] = []
        while i < len(items) and isinstance(items[i], SList) and items[i].head == "local":
            rest = items[i].items[1:]
            if rest and isinstance(rest[0], Token) and rest[0].text.startswith("$"):
                local_types.append(self._valtype(rest[1]))
                local_names.append(rest[0].text[1:])
            else:
                local_types.extend(self._valtype(t) for t in rest)
                local_names.extend(None for _ in rest)
            i += 1

        scan = _BodyScan(self)
        scan.seq(items[i:])
        if scan.flat_stack:
            raise self._err("unterminated block/loop/if", scan.flat_stack[-1][1])

        start, end = self._span(f.start, f.end)
        loops = sorted(scan.loops)
        callees = set()
        import_callees = set()
        for target in scan.calls:
            kind, idx = self.func_space[target]
            (callees if kind == "func" else import_callees).add(idx)
        return WatFunction(
            index=k,
            name=name,
            signature=sig,
            text=self.text[start:end],
            start_line=self.index.line(start),
            end_line=self.index.line(end),
            loop_extents=tuple((self.index.line(s), self.index.line(e - 1)) for s, e in loops),
            loop_spans=tuple((s - start, e - start) for s, e in loops),
            callees=frozenset(callees),
            import_callees=frozenset(import_callees),
            param_names=tuple(n[1:] if n else None for n, _ in params) if params else (),
            local_types=tuple(local_types),
            local_names=tuple(local_names),
            wasm_index=wasm_index,
        )

    def resolve_func(self, tok) -> int:
        if not isinstance(tok, Token) or tok.kind != "atom":
            raise self._err("expected function reference", tok)
        if tok.text.startswith("$"):
            if tok.text not in self.func_ids:
                raise self._err(f"unknown function {tok.text}", tok)
            return self.func_ids[tok.text]
        idx = _int(tok.text)
        if not 0 <= idx < len(self.func_space):
            raise self._err(f"function index {idx} out of range", tok)
        return idx


class _BodyScan:
    """Walk a function body collecting loop spans and call targets."""

    def __init__(self, parser: _ModuleParser):
        self.p = parser
        self.loops: list[tuple[int, int]] = []
        self.calls: list[int] = []
        self.flat_stack: list[tuple[str, Token]] = []

    def seq(self, items: list) -> None:
        i = 0
        n = len(items)
        while i < n:
            it = items[i]
            if isinstance(it, SList):
                self.folded(it)
                i += 1
                continue
            if it.kind != "atom":
                raise self.p._err("unexpected string in function body", it)
            op = it.text
            if op.startswith("$") or "=" in op or _is_num(op):
                i += 1
                continue
            _check_op(it, self.p.index)
            if op in ("block", "loop", "if"):
                self.flat_stack.append((op, it))
            elif op == "end":
                if not self.flat_stack:
                    raise self.p._err("'end' without open block", it)
                kind, opener = self.flat_stack.pop()
                end = it.end
                if i + 1 < n and isinstance(items[i + 1], Token) and items[i + 1].text.startswith("$"):
                    end = items[i + 1].end
                if kind == "loop":
                    self.loops.append((opener.start, end))
            elif op == "call":
                if i + 1 >= n:
                    raise self.p._err("call without target", it)
                self.calls.append(self.p.resolve_func(items[i + 1]))
                i += 1
            i += 1

    def folded(self, node: SList) -> None:
        head = node.head
        if head is None:
            raise self.p._err("expected instruction", node)
        if head in _TYPEUSE_HEADS or head == "local":
            return
        if head in ("then", "else"):
            self.seq(node.items[1:])
            return
        if node.items[0].text.startswith(_SIMD_PREFIXES) or head in _UNSUPPORTED_OPS or "atomic" in head:
            _check_op(node.items[0], self.p.index)
        if head in ("block", "loop", "if"):
            depth = len(self.flat_stack)
            self.seq(node.items[1:])
            if len(self.flat_stack) != depth:
                raise self.p._err(f"unbalanced flat instructions inside folded {head}", node)
            if head == "loop":
                self.loops.append((node.start, node.end))
            return
        self.seq(node.items)


def parse_module(wat_text: str) -> WatModule:
    """Parse wat text. Raises ParseError / UnsupportedConstruct on bad input."""
    return _ModuleParser(wat_text).parse()
