"""Node-type skeletons for C (tree-sitter) and wat (s-expression reader)."""

from __future__ import annotations

from ..cparse import LabeledTree, parse_skeleton
from ..wat.lexer import SList, Token, read_sexprs

LANGUAGES = ("c", "wat")


def _atom_label(tok: Token) -> str:
    if tok.kind == "string":
        return "str"
    text = tok.text
    if text.startswith("$"):
        return "id"
    if text[0].isdigit() or text[0] in "+-":
        return "num"
    # memarg immediates keep only their key: offset=8 → offset
    return text.split("=", 1)[0]


def wat_skeleton(text: str) -> LabeledTree:
    """Lists become nodes labelled by their head keyword; atoms become leaves."""
    root = LabeledTree("wat", [])
    stack: list[tuple[list, LabeledTree]] = [(read_sexprs(text), root)]
    while stack:
        items, parent = stack.pop()
        for item in items:
            if isinstance(item, SList):
                node = LabeledTree(item.head or "list", [])
                parent.children.append(node)
                rest = item.items[1:] if item.head is not None else item.items
                stack.append((rest, node))
            else:
                parent.children.append(LabeledTree(_atom_label(item), []))
    return root


def skeleton(text: str, language: str = "c") -> LabeledTree:
    if language == "c":
        return parse_skeleton(text)
    if language == "wat":
        return wat_skeleton(text)
    raise ValueError(f"unknown language {language!r}; expected one of {LANGUAGES}")
