"""Approximate operand-stack simulation for frame-relative memory traffic.

Unoptimised builds keep every C local in a linear-memory stack frame: the
prologue copies the stack-pointer global minus the frame size into a local
(the frame pointer) and every variable access becomes a load/store at a
constant offset from it. This module tracks just enough of the operand
stack to recover those offsets.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator

from .wat.lexer import SList, Token, read_sexprs
from .wat.model import WatFunction, WatModule

_BINARY = re.compile(
    r"\.(add|sub|mul|div(_[su])?|rem_[su]|and|or|xor|shl|shr_[su]|rotl|rotr|eq|ne|"
    r"[lg][te](_[su])?|min|max|copysign)$"
)
_UNARY = re.compile(
    r"\.(clz|ctz|popcnt|eqz|neg|abs|sqrt|ceil|floor|trunc|nearest|wrap_i64|extend_i32_[su]|"
    r"extend(8|16|32)_s|trunc(_sat)?_f(32|64)_[su]|convert_i(32|64)_[su]|demote_f64|promote_f32|"
    r"reinterpret_[if](32|64))$"
)
_LOAD = re.compile(r"^[if](32|64)\.load(8|16|32)?(_[su])?$")
_STORE = re.compile(r"^[if](32|64)\.store(8|16|32)?$")
_TYPEUSE = {"type", "param", "result", "local"}


@dataclass(frozen=True)
class Access:
    kind: str  # "load", "store" or "addr"
    offset: int
    value: tuple | None = None
    """For stores, the tag of the stored value (e.g. ``("param", 0)``)."""


def _is_immediate(tok: Token) -> bool:
    t = tok.text
    return (
        tok.kind == "string"
        or t.startswith("$")
        or "=" in t
        or bool(re.fullmatch(r"[-+]?(0x[0-9a-fA-F_.pP+-]+|[0-9][0-9_.eE+-]*|inf|nan(:0x[0-9a-fA-F_]+)?)", t))
    )


def iter_instructions(items: list) -> Iterator[tuple[str, list]]:
    """Yield (opcode, immediates) in execution order for flat or folded code."""
    i = 0
    n = len(items)
    while i < n:
        it = items[i]
        if isinstance(it, SList):
            yield from _folded(it)
            i += 1
            continue
        op = it.text
        imms: list = []
        i += 1
        while i < n:
            nxt = items[i]
            if isinstance(nxt, SList):
                if nxt.head in _TYPEUSE:
                    imms.append(nxt)
                    i += 1
                    continue
                break
            if _is_immediate(nxt):
                imms.append(nxt)
                i += 1
                continue
            break
        yield op, imms


def _folded(node: SList) -> Iterator[tuple[str, list]]:
    head = node.head
    if head in _TYPEUSE or head is None:
        return
    items = node.items
    if head in ("block", "loop"):
        j = 1
        imms = []
        while j < len(items) and (
            (isinstance(items[j], Token) and items[j].text.startswith("$"))
            or (isinstance(items[j], SList) and items[j].head in _TYPEUSE)
        ):
            imms.append(items[j])
            j += 1
        yield head, imms
        yield from iter_instructions(items[j:])
        yield "end", []
        return
    if head == "if":
        j = 1
        imms = []
        while j < len(items) and (
            (isinstance(items[j], Token) and items[j].text.startswith("$"))
            or (isinstance(items[j], SList) and items[j].head in _TYPEUSE)
        ):
            imms.append(items[j])
            j += 1
        then = other = None
        conds = []
        for it in items[j:]:
            if isinstance(it, SList) and it.head == "then":
                then = it
            elif isinstance(it, SList) and it.head == "else":
                other = it
            else:
                conds.append(it)
        yield from iter_instructions(conds)
        yield "if", imms
        if then is not None:
            yield from iter_instructions(then.items[1:])
        if other is not None:
            yield "else", []
            yield from iter_instructions(other.items[1:])
        yield "end", []
        return
    # plain folded instruction: operands first, then the operator
    op_imms = []
    operands = []
    for it in items[1:]:
        if isinstance(it, SList) and it.head not in _TYPEUSE:
            operands.append(it)
        else:
            op_imms.append(it)
    for operand in operands:
        yield from _folded(operand)
    yield head, op_imms


def function_body(func: WatFunction) -> list:
    """Items of the function's s-expression after the header."""
    forms = [f for f in read_sexprs(func.text) if isinstance(f, SList)]
    items = forms[0].items
    i = 1
    while i < len(items):
        it = items[i]
        if isinstance(it, Token) and it.text.startswith("$"):
            i += 1
        elif isinstance(it, SList) and it.head in ("export", "type", "param", "result", "local"):
            i += 1
        else:
            break
    return items[i:]


def stack_pointer_globals(module: WatModule) -> set[str]:
    """Names/indices (as written in wat) that refer to the shadow-stack pointer."""
    refs: set[str] = set()
    for k, g in enumerate(module.globals):
        if g.name == "__stack_pointer":
            refs.update({"$" + g.name, str(k)})
    if not refs:
        for k, g in enumerate(module.globals):
            if g.mutable and g.valtype == "i32":
                refs.update({"$" + g.name, str(k)})
                break
    return refs


def _imm_int(imms: list, key: str, default: int = 0) -> int:
    for tok in imms:
        if isinstance(tok, Token) and tok.text.startswith(key + "="):
            return int(tok.text.split("=", 1)[1].replace("_", ""), 0)
    return default


def _local_index(func: WatFunction, tok: Token) -> int | None:
    t = tok.text
    if t.startswith("$"):
        if t[1:] in func.param_names:
            return func.param_names.index(t[1:])
        if t[1:] in func.local_names:
            return len(func.signature.params) + func.local_names.index(t[1:])
        return None
    try:
        return int(t)
    except ValueError:
        return None


def _call_arity(module: WatModule, imms: list, indirect: bool) -> tuple[int, int]:
    sig = None
    if indirect:
        for it in imms:
            if isinstance(it, SList) and it.head == "type":
                ref = it.items[1].text
                if ref.isdigit() and int(ref) < len(module.types):
                    sig = module.types[int(ref)]
        pops = 1
    else:
        pops = 0
        if imms:
            ref = imms[0].text
            if ref.startswith("$"):
                sig = module.signature_of(ref[1:])
            elif ref.isdigit():
                k = int(ref)
                if k < len(module.imports):
                    sig = module.imports[k].signature
                elif k - len(module.imports) < len(module.functions):
                    sig = module.functions[k - len(module.imports)].signature
    if sig is None:
        return -1, -1
    return pops + len(sig.params), len(sig.results)


def frame_accesses(func: WatFunction, module: WatModule) -> list[Access]:
    """Loads, stores and address computations at frame pointer + constant."""
    sp_refs = stack_pointer_globals(module)
    nparams = len(func.signature.params)
    stack: list = []
    frames: list[tuple[str, int, int]] = []  # (kind, base, result count)
    local_tags: dict[int, tuple] = {}
    assigned: set[int] = set()
    out: list[Access] = []

    def pop():
        if frames and len(stack) <= frames[-1][1]:
            return None
        return stack.pop() if stack else None

    def reset_to_base():
        base = frames[-1][1] if frames else 0
        del stack[base:]

    for op, imms in iter_instructions(function_body(func)):
        if op.endswith(".const"):
            val = None
            if op == "i32.const" and imms:
                try:
                    val = int(imms[0].text.replace("_", ""), 0)
                except ValueError:
                    val = None
            stack.append(("const", val) if val is not None else None)
        elif op == "local.get":
            idx = _local_index(func, imms[0]) if imms else None
            if idx is None:
                stack.append(None)
            elif idx in local_tags:
                stack.append(local_tags[idx])
            elif idx < nparams and idx not in assigned:
                stack.append(("param", idx))
            else:
                stack.append(None)
        elif op in ("local.set", "local.tee"):
            val = pop()
            idx = _local_index(func, imms[0]) if imms else None
            if idx is not None:
                assigned.add(idx)
                if val is not None and val[0] in ("fp", "sp"):
                    local_tags[idx] = val
                else:
                    local_tags.pop(idx, None)
            if op == "local.tee":
                stack.append(val)
        elif op == "global.get":
            ref = imms[0].text if imms else ""
            stack.append(("sp",) if ref in sp_refs else None)
        elif op == "global.set" or op == "drop":
            pop()
        elif op == "select":
            pop(), pop(), pop()
            stack.append(None)
        elif _LOAD.match(op):
            addr = pop()
            if addr is not None and addr[0] == "fp":
                out.append(Access("load", addr[1] + _imm_int(imms, "offset")))
            stack.append(None)
        elif _STORE.match(op):
            val = pop()
            addr = pop()
            if addr is not None and addr[0] == "fp":
                out.append(Access("store", addr[1] + _imm_int(imms, "offset"), val))
        elif _BINARY.search(op):
            b = pop()
            a = pop()
            res = None
            if op == "i32.sub" and a == ("sp",) and b is not None and b[0] == "const":
                res = ("fp", 0)
            elif op == "i32.add" and a is not None and b is not None:
                if a[0] == "fp" and b[0] == "const":
                    res = ("fp", a[1] + b[1])
                elif b[0] == "fp" and a[0] == "const":
                    res = ("fp", b[1] + a[1])
            elif op == "i32.sub" and a is not None and a[0] == "fp" and b is not None and b[0] == "const":
                res = ("fp", a[1] - b[1])
            if res is not None and res[0] == "fp" and res[1] != 0:
                # address-taken slot (arrays, &x); nothing loads it at a constant offset
                out.append(Access("addr", res[1]))
            stack.append(res)
        elif _UNARY.search(op) or op == "memory.grow":
            pop()
            stack.append(None)
        elif op == "memory.size":
            stack.append(None)
        elif op in ("memory.fill", "memory.copy", "memory.init"):
            pop(), pop(), pop()
        elif op in ("call", "call_indirect"):
            pops, pushes = _call_arity(module, imms, op == "call_indirect")
            if pops < 0:
                reset_to_base()
            else:
                for _ in range(pops):
                    pop()
                stack.extend([None] * pushes)
        elif op in ("block", "loop", "if"):
            if op == "if":
                pop()
            results = sum(
                len(it.items) - 1 for it in imms if isinstance(it, SList) and it.head == "result"
            )
            frames.append((op, len(stack), results))
        elif op == "else":
            reset_to_base()
        elif op == "end":
            if frames:
                _, base, results = frames.pop()
                del stack[base:]
                stack.extend([None] * results)
        elif op == "br_if":
            pop()
        elif op in ("br", "br_table", "return", "unreachable"):
            if op == "br_table":
                pop()
            reset_to_base()
        elif op == "nop":
            pass
        else:
            reset_to_base()
    return out
