"""McCabe complexity of C functions: one plus the number of decision points."""

from __future__ import annotations

from ..cparse import Source, function_definitions, function_name, is_broken, walk
from ..errors import CParseError

_BRANCH_NODES = {"if_statement", "for_statement", "while_statement", "do_statement", "conditional_expression"}


def _decisions(node) -> int:
    count = 0
    for n in walk(node):
        t = n.type
        if t in _BRANCH_NODES:
            count += 1
        elif t == "case_statement" and n.child_by_field_name("value") is not None:
            count += 1  # `default:` is not a decision
        elif t == "binary_expression":
            op = n.child_by_field_name("operator")
            if op is not None and op.type in ("&&", "||"):
                count += 1
    return count


def node_complexity(defn) -> int:
    return 1 + _decisions(defn.child_by_field_name("body") or defn)


def function_complexities(c_text: str, strict: bool = False) -> dict[str, int]:
    """Name → V(G) for every well-formed function definition in the text."""
    src = Source(c_text)
    out: dict[str, int] = {}
    for defn in function_definitions(src.root, nested=False):
        if is_broken(defn):
            if strict:
                raise CParseError(f"function {function_name(defn)!r} does not parse")
            continue
        name = function_name(defn)
        if name is not None and name not in out:
            out[name] = node_complexity(defn)
    return out


def cyclomatic(c_function_text: str) -> int:
    """V(G) of the single function in ``c_function_text``."""
    src = Source(c_function_text)
    defs = function_definitions(src.root, nested=False)
    if len(defs) != 1 or is_broken(src.root):
        raise CParseError("expected exactly one well-formed function definition")
    return node_complexity(defs[0])


def ccn_similarity(src: dict[str, int], dec: dict[str, int]) -> float:
    """Mean over source functions of min/max complexity; missing ones score 0."""
    if not src:
        return 1.0 if not dec else 0.0
    total = 0.0
    for name, vs in src.items():
        vd = dec.get(name)
        if vd is not None:
            total += min(vs, vd) / max(vs, vd)
    return total / len(src)
