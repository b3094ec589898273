"""CodeBLEU for C: n-gram, keyword-weighted, syntax-subtree and dataflow matches.

Each component lies in [0, 1] and the score is their unweighted mean. The
dataflow part works from syntactic def-use pairs rather than a semantic
analysis, so it only approximates the published metric.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import asdict, dataclass

from ..cparse import Source, is_broken, walk
from ..errors import EmptyText
from .similarity import code_tokens

C_KEYWORDS = frozenset(
    """auto break case char const continue default do double else enum extern float for goto if
    inline int long register restrict return short signed sizeof static struct switch typedef
    union unsigned void volatile while _Bool _Complex _Imaginary _Alignas _Alignof _Atomic
    _Generic _Noreturn _Static_assert _Thread_local""".split()
)
KEYWORD_WEIGHT = 5.0
MAX_ORDER = 4
_EPS = 1e-9  # stands in for a zero n-gram precision so the geometric mean stays defined


def _ngrams(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def _brevity(ref_len: int, cand_len: int) -> float:
    if cand_len == 0:
        return 0.0
    return 1.0 if cand_len >= ref_len else math.exp(1.0 - ref_len / cand_len)


def bleu(ref: list[str], cand: list[str], max_order: int = MAX_ORDER) -> float:
    logs = []
    for n in range(1, max_order + 1):
        c = _ngrams(cand, n)
        total = sum(c.values())
        if total == 0:
            continue  # candidate shorter than n
        r = _ngrams(ref, n)
        hit = sum(min(k, r[g]) for g, k in c.items())
        logs.append(math.log(hit / total if hit else _EPS))
    if not logs:
        return 0.0
    return min(1.0, _brevity(len(ref), len(cand)) * math.exp(sum(logs) / len(logs)))


def weighted_unigram(ref: list[str], cand: list[str]) -> float:
    def w(tok: str) -> float:
        return KEYWORD_WEIGHT if tok in C_KEYWORDS else 1.0

    c = Counter(cand)
    if not c:
        return 0.0
    r = Counter(ref)
    hit = sum(min(k, r[t]) * w(t) for t, k in c.items())
    total = sum(k * w(t) for t, k in c.items())
    return min(1.0, _brevity(len(ref), len(cand)) * hit / total)


# --- syntax ------------------------------------------------------------------------


def _subtree_ids(root, table: dict[tuple, int]) -> Counter:
    """Multiset of subtree shapes (named node types only), hash-consed through ``table``.

    Both trees must share ``table`` so equal shapes get equal ids.
    """
    out: Counter = Counter()
    ids: dict[int, int] = {}
    # explicit post-order so deep trees do not hit the recursion limit
    stack = [(root, False)]
    while stack:
        node, done = stack.pop()
        kids = [c for c in node.named_children if c.type != "comment"]
        if not done:
            stack.append((node, True))
            stack.extend((c, False) for c in reversed(kids))
            continue
        sid = table.setdefault((node.type, tuple(ids[c.id] for c in kids)), len(table))
        ids[node.id] = sid
        out[sid] += 1
    return out


def syntax_match(ref_root, cand_root) -> float:
    table: dict[tuple, int] = {}
    ref = _subtree_ids(ref_root, table)
    cand = _subtree_ids(cand_root, table)
    total = sum(ref.values())
    if total == 0:
        return 1.0
    return sum(min(n, cand[k]) for k, n in ref.items()) / total


# --- dataflow ----------------------------------------------------------------------

_DECL_PARENTS = ("init_declarator", "declaration", "parameter_declaration")
_DECLARATOR_WRAPPERS = ("pointer_declarator", "array_declarator", "parenthesized_declarator")


def _is_variable(node) -> bool:
    p = node.parent
    if p is None:
        return False
    if p.type == "call_expression" and p.child_by_field_name("function") == node:
        return False
    if p.type in ("function_declarator", "goto_statement", "labeled_statement"):
        return False
    return True


def _def_site(node):
    """The construct that defines ``node``, or None for a plain read."""
    child, p = node, node.parent
    while p is not None and p.type in _DECLARATOR_WRAPPERS and p.child_by_field_name("declarator") == child:
        child, p = p, p.parent
    if p is None:
        return None
    if p.type in _DECL_PARENTS and p.child_by_field_name("declarator") == child:
        return p
    if p.type == "assignment_expression" and p.child_by_field_name("left") == node:
        return p
    if p.type == "update_expression" and p.child_by_field_name("argument") == node:
        return p
    return None


def dataflow_edges(root) -> Counter:
    """Def-use edges with variable names replaced by first-appearance ordinals."""
    idents = [n for n in walk(root) if n.type == "identifier" and _is_variable(n)]
    var_ids = {n.id for n in idents}
    order: dict[str, int] = {}
    for n in idents:
        order.setdefault(n.text.decode("utf-8", "replace"), len(order))

    events = []  # (position, rank, kind, name, sources)
    for n in idents:
        name = n.text.decode("utf-8", "replace")
        site = _def_site(n)
        if site is None:
            events.append((n.start_byte, 0, "read", name, ()))
            continue
        sources: set[str] = set()
        if site.type == "init_declarator":
            value = site.child_by_field_name("value")
            if value is not None:
                sources = {m.text.decode("utf-8", "replace") for m in walk(value) if m.id in var_ids}
        elif site.type == "assignment_expression":
            right = site.child_by_field_name("right")
            sources = {m.text.decode("utf-8", "replace") for m in walk(right) if m.id in var_ids}
            if site.child_by_field_name("operator").type != "=":
                sources.add(name)
        elif site.type == "update_expression":
            sources = {name}
        # a definition takes effect after its right-hand side has been read
        events.append((site.end_byte, 1, "def", name, tuple(sorted(order[s] for s in sources))))

    defs: Counter = Counter()
    edges: Counter = Counter()
    for _, _, kind, name, sources in sorted(events, key=lambda e: e[:2]):
        v = order[name]
        if kind == "def":
            defs[name] += 1
            edges[(v, "comesFrom", sources)] += 1
        else:
            edges[(v, "reads", defs[name])] += 1
    return edges


def dataflow_match(ref_root, cand_root) -> float:
    ref = dataflow_edges(ref_root)
    total = sum(ref.values())
    if total == 0:
        return 1.0  # nothing to miss
    cand = dataflow_edges(cand_root)
    return sum(min(n, cand[e]) for e, n in ref.items()) / total


# --- composite ---------------------------------------------------------------------


@dataclass(frozen=True)
class CodeBleu:
    score: float
    ngram: float
    weighted_ngram: float
    syntax: float
    dataflow: float
    parse_failure: bool = False

    def as_dict(self) -> dict:
        return asdict(self)


def codebleu(reference_c: str, candidate_c: str) -> CodeBleu:
    ref_tokens = code_tokens(reference_c)
    if not ref_tokens:
        raise EmptyText("reference has no tokens")
    cand_tokens = code_tokens(candidate_c)
    if not cand_tokens:
        return CodeBleu(0.0, 0.0, 0.0, 0.0, 0.0)
    ngram = bleu(ref_tokens, cand_tokens)
    weighted = weighted_unigram(ref_tokens, cand_tokens)
    ref_src, cand_src = Source(reference_c), Source(candidate_c)
    if is_broken(ref_src.root) or is_broken(cand_src.root):
        syntax = flow = 0.0
        failed = True
    else:
        syntax = syntax_match(ref_src.root, cand_src.root)
        flow = dataflow_match(ref_src.root, cand_src.root)
        failed = False
    score = (ngram + weighted + syntax + flow) / 4.0
    return CodeBleu(score, ngram, weighted, syntax, flow, failed)
