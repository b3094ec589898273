import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import module, stems
from watdecomp.errors import CyclicMarker, OverlapError, UnresolvedMarker
from watdecomp.slicer import (
    expand_block,
    marker,
    missing_blocks,
    order_functions,
    reassemble,
    slice_function,
    slice_program,
    slice_text,
)
from watdecomp.wat import parse_module
from watdecomp.wat.lexer import tokenize

NESTED = """(module
  (func $f (param i32) (result i32)
    block
      loop
        block
          loop
            local.get 0
            br_if 0
          end
        end
        local.get 0
        br_if 0
      end
    end
    block
      loop
        br 0
      end
    end
    i32.const 0))
"""

MUTUAL = """(module
  (func $even (param i32) (result i32)
    local.get 0
    call $odd)
  (func $odd (param i32) (result i32)
    local.get 0
    call $even)
  (func $top (result i32)
    i32.const 4
    call $even)
  (func $leaf (result i32)
    i32.const 1))
"""


def _rstrip_lines(text):
    return [line.rstrip() for line in text.rstrip().split("\n")]


def loops_in(text):
    return sum(1 for t in tokenize(text) if t.kind == "atom" and t.text == "loop")


def test_loop_free_function_is_one_snippet():
    f = parse_module("(module (func $g (result i32) i32.const 1))").function("g")
    snips = slice_function(f)
    assert [s.block_id for s in snips] == ["g_0"]
    assert snips[0].markers == ()


def test_nested_marker_tree():
    f = parse_module(NESTED).function("f")
    snips = {s.block_id: s for s in slice_function(f)}
    assert set(snips) == {"f_0", "f_1", "f_2", "f_3"}
    assert snips["f_0"].child_ids == ["f_1", "f_3"]
    assert snips["f_1"].child_ids == ["f_2"]
    assert snips["f_2"].child_ids == []
    assert marker("f_2") in snips["f_1"].text
    for s in snips.values():
        assert loops_in(s.text) <= 1


def test_manifest_edges(tmp_path):
    manifest = slice_program(parse_module(NESTED)).export(tmp_path)
    assert manifest["edges"] == [["f_0", "f_1"], ["f_0", "f_3"], ["f_1", "f_2"]]
    assert json.loads((tmp_path / "manifest.json").read_text()) == manifest
    assert (tmp_path / "f_2.wat").exists()


def test_empty_module_manifest(tmp_path):
    manifest = slice_program(parse_module("(module)")).export(tmp_path)
    assert manifest["blocks"] == [] and manifest["edges"] == []


def test_partial_overlap_rejected():
    with pytest.raises(OverlapError):
        slice_text("abcdefghij", [(0, 5), (3, 8)], "f")


def test_unresolved_and_cyclic_markers():
    with pytest.raises(UnresolvedMarker):
        expand_block({"f_0": "x\n<<f_1>>\n"}, "f_0")
    with pytest.raises(CyclicMarker):
        expand_block({"f_0": "<<f_1>>", "f_1": "<<f_0>>"}, "f_0")
    assert missing_blocks({"f_0": "<<f_1>>\n<<f_2>>", "f_1": ""}, "f_0") == ["f_2"]


def test_reassemble_rebases_indentation():
    blocks = {"f_0": "top\n    <<f_1>>\nbottom", "f_1": "loop\n  body\nend"}
    assert reassemble(blocks)["f"] == "top\n    loop\n      body\n    end\nbottom"


def test_mutual_recursion_terminates_and_groups_scc():
    m = parse_module(MUTUAL)
    order = [m.functions[i].name for i in order_functions(m)]
    assert sorted(order) == ["even", "leaf", "odd", "top"]
    assert order.index("even") < order.index("top")
    assert order.index("odd") < order.index("top")
    # even and odd form one component and are emitted back to back
    assert abs(order.index("even") - order.index("odd")) == 1


def callee_first(m):
    """Every callee precedes its caller unless both sit on a call cycle."""
    order = order_functions(m)
    pos = {idx: k for k, idx in enumerate(order)}
    reach = {f.index: set(f.callees) for f in m.functions}
    changed = True
    while changed:
        changed = False
        for a in reach:
            extra = set().union(*(reach[b] for b in reach[a])) - reach[a]
            if extra:
                reach[a] |= extra
                changed = True
    for f in m.functions:
        for c in f.callees:
            if pos[c] > pos[f.index] and f.index not in reach[c]:
                return False
    return sorted(order) == list(range(len(m.functions)))


def test_corpus_ordering_property():
    for stem in stems():
        assert callee_first(module(stem)), stem
    assert callee_first(parse_module(MUTUAL))


@pytest.mark.parametrize("stem", stems())
def test_corpus_round_trip(stem):
    for f in module(stem).functions:
        snips = slice_function(f)
        assert all(loops_in(s.text) <= 1 for s in snips)
        rebuilt = reassemble({s.block_id: s.text for s in snips})[f.name]
        assert _rstrip_lines(rebuilt) == _rstrip_lines(f.text)


# --- generated nestings -------------------------------------------------------------

trees = st.recursive(st.just([]), lambda kids: st.lists(kids, max_size=3), max_leaves=8)


def render(children, depth=1):
    """Text plus loop spans for a forest of nested loops."""
    lines, spans = [], []
    pos = 0

    def emit(line):
        nonlocal pos
        lines.append(line)
        pos += len(line) + 1

    def rec(kids, d):
        for k in kids:
            pad = "  " * d
            emit(pad + "nop")
            start = pos + len(pad)
            span_index = len(spans)
            spans.append(None)
            emit(pad + "loop")
            emit(pad + "  i32.const 1")
            rec(k, d + 1)
            emit(pad + "  br_if 0")
            end = pos + len(pad) + 3
            emit(pad + "end")
            spans[span_index] = (start, end)

    emit("(func $g")
    rec(children, depth)
    emit("  nop)")
    return "\n".join(lines), spans


@settings(max_examples=150, deadline=None)
@given(trees)
def test_generated_round_trip(forest):
    text, spans = render(forest)
    snips = slice_text(text, spans, "g")
    assert len(snips) == len(spans) + 1
    for s in snips:
        assert s.text.count("loop") <= 1
    rebuilt = reassemble({s.block_id: s.text for s in snips})["g"]
    assert _rstrip_lines(rebuilt) == _rstrip_lines(text)


@pytest.mark.parametrize("body, expected", [
    ("(func $a) (func $b) (func $c)", [0, 1, 2]),
    ("(func $a call $b) (func $b call $c) (func $c)", [2, 1, 0]),
    ("(func $a call $b) (func $b call $a) (func $c call $a)", [0, 1, 2]),
    ('(import "env" "x" (func $x)) (func $a call $x) (func $b call $a)', [0, 1]),
])
def test_order_examples(body, expected):
    assert order_functions(parse_module(f"(module {body})")) == expected
