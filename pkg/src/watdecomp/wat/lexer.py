"""Tokenizer and s-expression reader for wat text.

Every token keeps its character offset so later stages can cut the
original text without reformatting it.
"""

from __future__ import annotations

import bisect
import re
from dataclasses import dataclass, field

from ..errors import ParseError

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<linecomment>;;[^\n]*)
  | (?P<blockopen>\(;)
  | (?P<lparen>\()
  | (?P<rparen>\))
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<atom>[^\s()";]+)
    """,
    re.VERBOSE,
)


@dataclass(frozen=True, slots=True)
class Token:
    kind: str  # "(", ")", "string" or "atom"
    text: str
    start: int
    end: int


@dataclass(slots=True)
class SList:
    open: Token
    close: Token | None = None
    items: list = field(default_factory=list)

    @property
    def start(self) -> int:
        return self.open.start

    @property
    def end(self) -> int:
        assert self.close is not None
        return self.close.end

    @property
    def head(self) -> str | None:
        if self.items and isinstance(self.items[0], Token) and self.items[0].kind == "atom":
            return self.items[0].text
        return None


class LineIndex:
    """Maps character offsets to 0-based (line, column)."""

    def __init__(self, text: str):
        self._starts = [0]
        self._starts.extend(m.end() for m in re.finditer("\n", text))

    def line(self, offset: int) -> int:
        return bisect.bisect_right(self._starts, offset) - 1

    def position(self, offset: int) -> tuple[int, int]:
        line = self.line(offset)
        return line, offset - self._starts[line]

    def line_start(self, line: int) -> int:
        return self._starts[line]


def _skip_block_comment(text: str, pos: int, index: LineIndex) -> int:
    depth = 1
    i = pos + 2
    n = len(text)
    while i < n:
        if text.startswith("(;", i):
            depth += 1
            i += 2
        elif text.startswith(";)", i):
            depth -= 1
            i += 2
            if depth == 0:
                return i
        else:
            i += 1
    raise ParseError("unterminated block comment", *index.position(pos))


def tokenize(text: str, index: LineIndex | None = None) -> list[Token]:
    index = index or LineIndex(text)
    tokens: list[Token] = []
    pos = 0
    n = len(text)
    match = _TOKEN_RE.match
    while pos < n:
        m = match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", *index.position(pos))
        kind = m.lastgroup
        if kind == "blockopen":
            pos = _skip_block_comment(text, pos, index)
            continue
        end = m.end()
        if kind == "lparen":
            tokens.append(Token("(", "(", pos, end))
        elif kind == "rparen":
            tokens.append(Token(")", ")", pos, end))
        elif kind == "string":
            tokens.append(Token("string", m.group(), pos, end))
        elif kind == "atom":
            tokens.append(Token("atom", m.group(), pos, end))
        pos = end
    return tokens


def read_sexprs(text: str, index: LineIndex | None = None) -> list:
    """Read all top-level forms. Returns a list of SList and bare Tokens."""
    index = index or LineIndex(text)
    forms: list = []
    stack: list[SList] = []
    for tok in tokenize(text, index):
        if tok.kind == "(":
            node = SList(open=tok)
            (stack[-1].items if stack else forms).append(node)
            stack.append(node)
        elif tok.kind == ")":
            if not stack:
                raise ParseError("unbalanced ')'", *index.position(tok.start))
            stack.pop().close = tok
        else:
            (stack[-1].items if stack else forms).append(tok)
    if stack:
        raise ParseError("unclosed '('", *index.position(stack[-1].start))
    return forms
