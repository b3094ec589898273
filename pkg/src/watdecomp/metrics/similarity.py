"""Token-level scores: cosine similarity of term frequencies and line bloat."""

from __future__ import annotations

import math
import re
from collections import Counter

from ..errors import EmptyText

_COMMENT_OR_LITERAL = re.compile(
    r'"(?:[^"\\\n]|\\.)*"|\'(?:[^\'\\\n]|\\.)*\'|//[^\n]*|/\*.*?(?:\*/|\Z)',
    re.DOTALL,
)
TOKEN_RE = re.compile(
    r'"(?:[^"\\\n]|\\.)*"'
    r"|'(?:[^'\\\n]|\\.)*'"
    r"|[A-Za-z_]\w*"
    r"|\.?\d(?:[eEpP][+-]|[\w.])*"
    r"|<<=|>>=|\.\.\.|->|\+\+|--|<<|>>|<=|>=|==|!=|&&|\|\||[-+*/%&|^]="
    r"|\S"
)


def strip_comments(text: str) -> str:
    """Drop // and /* */ comments; newlines inside block comments are kept."""

    def repl(m: re.Match) -> str:
        s = m.group(0)
        if s.startswith("//"):
            return ""
        if s.startswith("/*"):
            return " " + "\n" * s.count("\n")
        return s

    return _COMMENT_OR_LITERAL.sub(repl, text)


def code_tokens(text: str) -> list[str]:
    return TOKEN_RE.findall(strip_comments(text))


def cosine_similarity(a_text: str, b_text: str) -> float:
    a = Counter(code_tokens(a_text))
    b = Counter(code_tokens(b_text))
    if not a or not b:
        raise EmptyText("cosine similarity needs at least one token on each side")
    dot = sum(n * b[t] for t, n in a.items())
    # integer product under one sqrt keeps identical vectors at exactly 1.0
    norm = math.sqrt(sum(n * n for n in a.values()) * sum(n * n for n in b.values()))
    return min(1.0, dot / norm)


def count_lines(text: str) -> int:
    """Non-blank lines once comments are gone."""
    return sum(1 for line in strip_comments(text).splitlines() if line.strip())


def bloat_rate(src_lines: int, dec_lines: int) -> float:
    """Absolute relative change in line count, as a percentage."""
    if src_lines <= 0:
        raise ValueError("source line count must be positive")
    return abs(dec_lines - src_lines) / src_lines * 100.0


def bloat_rate_text(src_text: str, dec_text: str) -> float:
    return bloat_rate(count_lines(src_text), count_lines(dec_text))
