"""tree-sitter C front end shared by the renamer, the forge and the metrics.

tree-sitter reports byte offsets; everything else in the package works on
``str`` offsets, so conversions go through :class:`Source`.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Iterator

import tree_sitter_c
from tree_sitter import Language, Node, Parser, Tree

C_LANGUAGE = Language(tree_sitter_c.language())
LOOP_TYPES = ("for_statement", "while_statement", "do_statement")

_local = threading.local()


def _parser() -> Parser:
    # Parser objects are not safe to share between threads.
    p = getattr(_local, "parser", None)
    if p is None:
        p = _local.parser = Parser(C_LANGUAGE)
    return p


class Source:
    """C text plus its parse tree, with byte↔char offset conversion."""

    def __init__(self, text: str):
        self.text = text
        self.data = text.encode("utf-8")
        self.tree: Tree = _parser().parse(self.data)
        self._ascii = len(self.data) == len(text)

    @property
    def root(self) -> Node:
        return self.tree.root_node

    def char(self, byte_offset: int) -> int:
        if self._ascii:
            return byte_offset
        return len(self.data[:byte_offset].decode("utf-8", errors="replace"))

    def span(self, node: Node) -> tuple[int, int]:
        return self.char(node.start_byte), self.char(node.end_byte)

    def node_text(self, node: Node) -> str:
        return self.data[node.start_byte : node.end_byte].decode("utf-8", errors="replace")


def walk(node: Node) -> Iterator[Node]:
    """Pre-order traversal without recursion."""
    stack = [node]
    while stack:
        n = stack.pop()
        yield n
        stack.extend(reversed(n.children))


def is_broken(node: Node) -> bool:
    return node.has_error or any(n.is_missing for n in walk(node))


def function_name(defn: Node) -> str | None:
    decl = defn.child_by_field_name("declarator")
    while decl is not None and decl.type != "function_declarator":
        decl = decl.child_by_field_name("declarator")
    if decl is None:
        return None
    ident = decl.child_by_field_name("declarator")
    while ident is not None and ident.type not in ("identifier", "field_identifier"):
        ident = ident.child_by_field_name("declarator")
    return ident.text.decode("utf-8") if ident is not None else None


def function_definitions(node: Node, nested: bool = True) -> list[Node]:
    """All ``function_definition`` nodes under ``node`` in document order."""
    out = []
    stack = [node]
    while stack:
        n = stack.pop()
        if n.type == "function_definition":
            out.append(n)
            if not nested:
                continue
        stack.extend(reversed(n.children))
    return out


def top_level_functions(src: Source) -> dict[str, Node]:
    out: dict[str, Node] = {}
    for defn in function_definitions(src.root, nested=False):
        name = function_name(defn)
        if name is not None and name not in out:
            out[name] = defn
    return out


@dataclass
class LabeledTree:
    """Ordered tree of node-type labels; the input to tree edit distance."""

    label: str
    children: list[LabeledTree]

    def size(self) -> int:
        count = 0
        stack = [self]
        while stack:
            t = stack.pop()
            count += 1
            stack.extend(t.children)
        return count

    def to_tuple(self) -> tuple:
        return (self.label, tuple(c.to_tuple() for c in self.children))

    @classmethod
    def from_tuple(cls, t: tuple) -> LabeledTree:
        return cls(t[0], [cls.from_tuple(c) for c in t[1]])


def c_skeleton(node: Node) -> LabeledTree:
    """Named-node type skeleton (token text and comments dropped)."""
    root = LabeledTree(node.type, [])
    stack = [(node, root)]
    while stack:
        n, t = stack.pop()
        for child in n.named_children:
            if child.type == "comment":
                continue
            sub = LabeledTree(child.type, [])
            t.children.append(sub)
            stack.append((child, sub))
    return root


def parse_skeleton(text: str) -> LabeledTree:
    return c_skeleton(Source(text).root)
