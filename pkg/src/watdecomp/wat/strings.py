"""Data-segment string decoding and the offset → string table."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Mapping

from ..errors import BadEscape

_SIMPLE_ESCAPES = {"t": 0x09, "n": 0x0A, "r": 0x0D, '"': 0x22, "'": 0x27, "\\": 0x5C}
_HEX = "0123456789abcdefABCDEF"


def decode_wat_string(literal: str) -> bytes:
    """Decode the contents of a wat string literal (no surrounding quotes)."""
    out = bytearray()
    i = 0
    n = len(literal)
    while i < n:
        ch = literal[i]
        if ch != "\\":
            out += ch.encode("utf-8")
            i += 1
            continue
        if i + 1 >= n:
            raise BadEscape(f"dangling backslash at position {i}")
        nxt = literal[i + 1]
        if nxt in _SIMPLE_ESCAPES:
            out.append(_SIMPLE_ESCAPES[nxt])
            i += 2
        elif nxt == "u":
            close = literal.find("}", i)
            if i + 2 >= n or literal[i + 2] != "{" or close < 0:
                raise BadEscape(f"malformed unicode escape at position {i}")
            digits = literal[i + 3 : close].replace("_", "")
            try:
                out += chr(int(digits, 16)).encode("utf-8")
            except ValueError as exc:
                raise BadEscape(f"bad unicode escape {literal[i:close + 1]!r}") from exc
            i = close + 1
        elif i + 2 < n and nxt in _HEX and literal[i + 2] in _HEX:
            out.append(int(literal[i + 1 : i + 3], 16))
            i += 3
        else:
            raise BadEscape(f"bad escape {literal[i:i + 3]!r} at position {i}")
    return bytes(out)


def bytes_to_text(raw: bytes) -> str:
    try:
        return raw.decode("utf-8")
    except UnicodeDecodeError:
        return raw.decode("latin-1")


@dataclass
class OffsetStringMap(Mapping[int, str]):
    """Linear-memory byte offset → NUL-free string constant."""

    entries: dict[int, str] = field(default_factory=dict)

    def __getitem__(self, offset: int) -> str:
        return self.entries[offset]

    def __iter__(self) -> Iterator[int]:
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def offsets_of(self, text: str) -> list[int]:
        return sorted(off for off, s in self.entries.items() if s == text)

    def to_json(self) -> dict[str, str]:
        return {str(k): v for k, v in sorted(self.entries.items())}

    @classmethod
    def from_json(cls, obj: Mapping[str, str]) -> OffsetStringMap:
        return cls({int(k): v for k, v in obj.items()})


def extract_data_strings(module) -> OffsetStringMap:
    entries: dict[int, str] = {}
    for seg in module.data_segments:
        raw = decode_wat_string(seg.literal)
        pos = 0
        for piece in raw.split(b"\x00"):
            if piece:
                entries[seg.base_offset + pos] = bytes_to_text(piece)
            pos += len(piece) + 1
    return OffsetStringMap(entries)
