"""Immutable structural model of a parsed wat module."""

from __future__ import annotations

from dataclasses import dataclass, field

VALUE_TYPES = ("i32", "i64", "f32", "f64")


@dataclass(frozen=True)
class FunctionSignature:
    name: str
    params: tuple[str, ...] = ()
    results: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if len(self.results) > 1:
            raise ValueError(f"{self.name}: at most one result is supported")
        for t in self.params + self.results:
            if t not in VALUE_TYPES:
                raise ValueError(f"{self.name}: unsupported value type {t!r}")

    def renamed(self, name: str) -> FunctionSignature:
        return FunctionSignature(name, self.params, self.results)


@dataclass(frozen=True)
class Import:
    module: str
    field: str
    signature: FunctionSignature

    @property
    def name(self) -> str:
        return self.signature.name


@dataclass(frozen=True)
class GlobalDef:
    name: str
    valtype: str
    mutable: bool


@dataclass(frozen=True)
class DataSegment:
    base_offset: int
    literal: str
    """Concatenated string contents exactly as written, escapes undecoded."""
    name: str | None = None
    line: int = 0

    @property
    def raw_bytes(self) -> bytes:
        from .strings import decode_wat_string

        return decode_wat_string(self.literal)


@dataclass(frozen=True)
class WatFunction:
    index: int
    name: str
    signature: FunctionSignature
    text: str
    """Exact source text of the function, whole lines where possible."""
    start_line: int
    end_line: int
    loop_extents: tuple[tuple[int, int], ...] = ()
    loop_spans: tuple[tuple[int, int], ...] = ()
    """(start, end) character offsets of each loop inside ``text``."""
    callees: frozenset[int] = frozenset()
    import_callees: frozenset[int] = frozenset()
    param_names: tuple[str | None, ...] = ()
    local_types: tuple[str, ...] = ()
    local_names: tuple[str | None, ...] = ()
    wasm_index: int = 0

    @property
    def body_lines(self) -> list[tuple[int, str]]:
        return [(self.start_line + i, line) for i, line in enumerate(self.text.split("\n"))]

    @property
    def nesting_depth(self) -> int:
        depth = 0
        for i, (s, e) in enumerate(self.loop_spans):
            d = 1 + sum(1 for (s2, e2) in self.loop_spans[:i] if s2 <= s and e <= e2)
            depth = max(depth, d)
        return depth


@dataclass(frozen=True)
class WatModule:
    functions: tuple[WatFunction, ...] = ()
    data_segments: tuple[DataSegment, ...] = ()
    imports: tuple[Import, ...] = ()
    types: tuple[FunctionSignature, ...] = ()
    globals: tuple[GlobalDef, ...] = ()
    text: str = ""
    _by_name: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self) -> None:
        if not self._by_name:
            self._by_name.update({f.name: f.index for f in self.functions})

    def function(self, name: str) -> WatFunction:
        return self.functions[self._by_name[name]]

    def has_function(self, name: str) -> bool:
        return name in self._by_name

    def signature_of(self, name: str) -> FunctionSignature | None:
        if name in self._by_name:
            return self.functions[self._by_name[name]].signature
        for imp in self.imports:
            if imp.name == name:
                return imp.signature
        return None

    @property
    def lines(self) -> list[str]:
        return self.text.split("\n")
