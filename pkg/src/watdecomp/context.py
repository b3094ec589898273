"""Per-snippet prompt context: variables already defined, callee prototypes."""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field

from .errors import ParseError, UnknownCallee
from .frame import frame_accesses
from .slicer import Snippet
from .wat.declarations import C_TYPES, signature_to_declaration
from .wat.lexer import tokenize
from .wat.model import WatFunction, WatModule

log = logging.getLogger(__name__)

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


@dataclass(frozen=True)
class VariableDef:
    name: str
    c_type: str

    def __post_init__(self) -> None:
        if not _IDENT.match(self.name):
            raise ValueError(f"not a C identifier: {self.name!r}")

    def render(self) -> str:
        base, dims = (self.c_type.split("[", 1) + [""])[:2]
        dims = "[" + dims if dims else ""
        return f"{base} {self.name}{dims};"


@dataclass(frozen=True)
class ContextBundle:
    defined_before: tuple[VariableDef, ...] = ()
    callee_declarations: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        names = [v.name for v in self.defined_before]
        if len(names) != len(set(names)):
            raise ValueError("defined_before holds duplicate names")


# --- spatial ---------------------------------------------------------------


def _call_targets(text: str) -> list[tuple[str, str]]:
    """(kind, ref) per call site in textual order; kind is 'direct' or 'indirect'."""
    toks = [t for t in tokenize(text) if t.kind in ("atom", "(", ")")]
    out = []
    for i, tok in enumerate(toks):
        if tok.kind != "atom":
            continue
        if tok.text == "call" and i + 1 < len(toks) and toks[i + 1].kind == "atom":
            out.append(("direct", toks[i + 1].text))
        elif tok.text == "call_indirect":
            # typeuse "(type N)" follows; a leading table index may precede it
            for j in range(i + 1, min(i + 6, len(toks) - 1)):
                if toks[j].text == "type" and toks[j - 1].kind == "(":
                    out.append(("indirect", toks[j + 1].text))
                    break
            else:
                out.append(("indirect", "?"))
    return out


def _resolve(module: WatModule, ref: str):
    if ref.startswith("$"):
        return module.signature_of(ref[1:])
    if ref.isdigit():
        k = int(ref)
        if k < len(module.imports):
            return module.imports[k].signature
        k -= len(module.imports)
        if k < len(module.functions):
            return module.functions[k].signature
    return None


def spatial_info(snippet: Snippet | str, module: WatModule) -> list[str]:
    """Prototypes for every distinct callee, in first-call order."""
    text = snippet.text if isinstance(snippet, Snippet) else snippet
    seen: set[tuple[str, str]] = set()
    decls: list[str] = []
    for kind, ref in _call_targets(text):
        if (kind, ref) in seen:
            continue
        seen.add((kind, ref))
        if kind == "direct":
            sig = _resolve(module, ref)
            if sig is None:
                raise UnknownCallee(f"no signature for call target {ref}")
        else:
            idx = int(ref) if ref.isdigit() else -1
            if not 0 <= idx < len(module.types):
                raise UnknownCallee(f"call_indirect with unresolvable type {ref}")
            sig = module.types[idx].renamed(f"indirect_{idx}")
        decl = signature_to_declaration(sig)
        if decl not in decls:
            decls.append(decl)
    return decls


# --- temporal --------------------------------------------------------------

_COMMENT_OR_STRING = re.compile(
    r"""//[^\n]*|/\*.*?\*/|"(?:[^"\\\n]|\\.)*"|'(?:[^'\\\n]|\\.)*'""", re.DOTALL
)
_BASE_TYPE = (
    r"(?:(?:const|volatile|static|register|signed|unsigned|short|long)\s+)*"
    r"(?:int|char|short|long|float|double|_Bool|bool|size_t|(?:struct|union|enum)\s+\w+)"
    r"|(?:signed|unsigned)(?!\s+(?:int|char|short|long)\b)"
)
_DECL_HEAD = re.compile(r"(?:^|(?<=[;{}(]))\s*(" + _BASE_TYPE + r")\b\s*(?=[*A-Za-z_])")
_DECLARATOR = re.compile(r"\s*(\**)\s*([A-Za-z_]\w*)\s*((?:\[[^\]]*\])*)")


def _blank(m: re.Match) -> str:
    return re.sub(r"[^\n]", " ", m.group())


def _split_declarators(rest: str) -> tuple[list[str], bool]:
    """Cut ``rest`` at top-level commas up to the terminating ';'."""
    parts = []
    depth = 0
    cur = []
    for ch in rest:
        if ch in "([{":
            depth += 1
        elif ch in ")]}":
            if depth == 0:
                return parts, False
            depth -= 1
        elif ch == "," and depth == 0:
            parts.append("".join(cur))
            cur = []
            continue
        elif ch == ";" and depth == 0:
            parts.append("".join(cur))
            return parts, True
        cur.append(ch)
    return parts, False


def declared_variables(c_text: str) -> list[VariableDef]:
    """Statement-level declarations of the supported scalar/array/pointer types."""
    text = _COMMENT_OR_STRING.sub(_blank, c_text)
    found: list[VariableDef] = []
    for m in _DECL_HEAD.finditer(text):
        base = re.sub(r"\b(?:const|volatile|static|register)\s+", "", m.group(1))
        base = re.sub(r"\s+", " ", base).strip()
        parts, terminated = _split_declarators(text[m.end() :])
        if not terminated:
            continue  # function header or malformed text
        for part in parts:
            d = _DECLARATOR.match(part)
            if d is None:
                break
            tail = part[d.end() :].strip()
            if tail and not tail.startswith("="):
                break
            stars, name, dims = d.groups()
            found.append(VariableDef(name, base + stars + re.sub(r"\s+", "", dims)))
    return found


def temporal_info(prior_c_snippets, params=()) -> tuple[VariableDef, ...]:
    """Parameters plus every variable declared in the earlier snippets."""
    out: dict[str, VariableDef] = {}
    for v in params:
        out.setdefault(v.name, v)
    for snippet in prior_c_snippets:
        try:
            decls = declared_variables(snippet)
        except (ValueError, re.error) as exc:  # pragma: no cover - scan is total on str input
            log.warning("declaration scan failed: %s", exc)
            continue
        for v in decls:
            out.setdefault(v.name, v)
    return tuple(out.values())


def params_from_wat(func: WatFunction, module: WatModule) -> list[VariableDef]:
    """Parameters named after the frame slot their value is spilled to."""
    slots: dict[int, int] = {}
    try:
        accesses = frame_accesses(func, module)
    except ParseError:
        return []
    for acc in accesses:
        if acc.kind == "store" and acc.value and acc.value[0] == "param":
            slots.setdefault(acc.value[1], acc.offset)
    out = []
    for p in range(len(func.signature.params)):
        if p in slots:
            out.append(VariableDef(f"local_{slots[p]}", C_TYPES[func.signature.params[p]]))
    return out
