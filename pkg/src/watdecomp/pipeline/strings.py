"""``STR_{offset}`` placeholders and C string literal encoding/decoding."""

from __future__ import annotations

import re
from typing import Mapping

PLACEHOLDER_TEMPLATE = "STR_{}"
PLACEHOLDER_RE = re.compile(r"\bSTR_(\d+)\b")

# strings and comments are copied verbatim; only bare placeholders are rewritten
_SCAN = re.compile(
    r"""(?P<skip>//[^\n]*|/\*.*?\*/|"(?:[^"\\\n]|\\.)*"|'(?:[^'\\\n]|\\.)*')|\bSTR_(?P<off>\d+)\b""",
    re.DOTALL,
)

_ESCAPES = {"\\": "\\\\", '"': '\\"', "\n": "\\n", "\t": "\\t", "\r": "\\r"}
_DECODE = {"n": "\n", "t": "\t", "r": "\r", "a": "\a", "b": "\b", "f": "\f", "v": "\v",
           "\\": "\\", '"': '"', "'": "'", "?": "?"}


def placeholder(offset: int) -> str:
    return PLACEHOLDER_TEMPLATE.format(offset)


def c_escape(text: str) -> str:
    out = []
    for ch in text:
        if ch in _ESCAPES:
            out.append(_ESCAPES[ch])
        elif ord(ch) < 0x20 or ord(ch) == 0x7F:
            out.append(f"\\{ord(ch):03o}")
        else:
            out.append(ch)
    return '"' + "".join(out) + '"'


def c_unescape(literal: str) -> bytes:
    """Bytes denoted by a plain (unprefixed) C string literal, quotes included."""
    if len(literal) < 2 or literal[0] != '"' or literal[-1] != '"':
        raise ValueError(f"not a plain string literal: {literal!r}")
    body = literal[1:-1]
    out = bytearray()
    i = 0
    while i < len(body):
        ch = body[i]
        if ch != "\\":
            out += ch.encode("utf-8")
            i += 1
            continue
        nxt = body[i + 1]
        if nxt in _DECODE:
            out += _DECODE[nxt].encode()
            i += 2
        elif nxt in "01234567":
            m = re.match(r"[0-7]{1,3}", body[i + 1 :])
            out.append(int(m.group(), 8) & 0xFF)
            i += 1 + len(m.group())
        elif nxt == "x":
            m = re.match(r"[0-9a-fA-F]+", body[i + 2 :])
            if m is None:
                raise ValueError("\\x without hex digits")
            out.append(int(m.group(), 16) & 0xFF)
            i += 2 + len(m.group())
        elif nxt in "uU":
            width = 4 if nxt == "u" else 8
            out += chr(int(body[i + 2 : i + 2 + width], 16)).encode("utf-8")
            i += 2 + width
        else:
            raise ValueError(f"unknown escape \\{nxt}")
    return bytes(out)


def recover_strings(c_text: str, strings: Mapping[int, str]) -> tuple[str, list[int]]:
    """Replace known placeholders by literals; returns (text, unresolved offsets)."""
    unresolved: list[int] = []

    def sub(m: re.Match) -> str:
        if m.group("skip") is not None:
            return m.group()
        off = int(m.group("off"))
        if off in strings:
            return c_escape(strings[off])
        unresolved.append(off)
        return m.group()

    return _SCAN.sub(sub, c_text), unresolved
