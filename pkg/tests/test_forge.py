import json
import shutil

import pytest

from conftest import CORPUS, c_text, forged, module, needs_wasm2wat, stems
from watdecomp.cparse import LOOP_TYPES, Source, top_level_functions, walk
from watdecomp.errors import ToolchainMissing
from watdecomp.forge import (
    RECORD_SCHEMA,
    Reject,
    align,
    check_record,
    forge_corpus,
    placeholder_strings,
    slice_c_function,
)
from watdecomp.slicer import MARKER_RE, slice_text
from watdecomp.wat.strings import OffsetStringMap, extract_data_strings


def test_loop_free_function_one_snippet():
    snips = slice_c_function("int f(int a) {\n  return a + 1;\n}", "f")
    assert [s.block_id for s in snips] == ["f_0"]
    assert snips[0].markers == ()


def test_single_loop_two_snippets():
    text = "int f(int n) {\n  int s = 0;\n  for (int i = 0; i < n; i++) {\n    s += i;\n  }\n  return s;\n}"
    root, loop = slice_c_function(text, "f")
    assert root.text == "int f(int n) {\n  int s = 0;\n  <<f_1>>\n  return s;\n}"
    assert loop.text.startswith("  for (int i = 0;")


def test_do_inside_while_three_snippets():
    text = "void f(int n) {\n  while (n) {\n    do {\n      n--;\n    } while (n > 5);\n  }\n}"
    snips = slice_c_function(text, "f")
    assert [s.child_ids for s in snips] == [["f_1"], ["f_2"], []]
    assert "do {" in snips[2].text


def test_broken_c_rejected():
    with pytest.raises(Reject) as info:
        slice_c_function("int f( {", "f")
    assert info.value.reason == "c_parse_error"


def test_align_mismatches():
    one = slice_text("a\nloop\nend\nb", [(2, 10)], "f")
    two = slice_text("a\nloop\nend\nloop\nend\nb", [(2, 10), (11, 19)], "f")
    nested = slice_text("a\nloop\nloop\nend\nend\nb", [(2, 19), (7, 15)], "f")
    with pytest.raises(Reject) as info:
        align(one, two)
    assert info.value.reason == "count_mismatch"
    with pytest.raises(Reject) as info:
        align(two, nested)
    assert info.value.reason == "shape_mismatch"
    assert len(align(two, two)) == 3


def test_placeholder_strings():
    strings = OffsetStringMap({1024: "Hi", 1030: "x\n"})
    text = 'int main(void) { puts("Hi"); printf("x\\n"); puts("gone"); return 0; }'
    assert placeholder_strings(text, strings) == 'int main(void) { puts(STR_1024); printf(STR_1030); puts("gone"); return 0; }'


def test_placeholder_concatenated_literal():
    strings = OffsetStringMap({8: "ab"})
    assert placeholder_strings('char *s = "a" "b";', strings) == "char *s = STR_8;"


def test_check_record_catches_violations():
    base = {"block_id": "f_0", "wat_snippet": "<<f_1>>", "c_snippet": "<<f_1>> puts(STR_4);", "offset2string": {"4": "x"}}
    check_record(base)
    with pytest.raises(Reject, match="marker_parity"):
        check_record({**base, "c_snippet": "puts(STR_4);"})
    with pytest.raises(Reject, match="placeholder_coverage"):
        check_record({**base, "offset2string": {}})


def c_loops(stem):
    """Loop count per source function, straight from the C parse tree."""
    src = Source(c_text(stem))
    return {name: sum(1 for n in walk(node) if n.type in LOOP_TYPES) for name, node in top_level_functions(src).items()}


@pytest.mark.parametrize("stem", stems())
def test_fixture_records(stem):
    records, reject = forged(stem)
    if stem == "goto_loop":
        # the goto loop compiles to a wasm loop with no C counterpart
        assert reject is not None and reject.reason == "count_mismatch"
        return
    assert reject is None
    per_func = {}
    for r in records:
        assert r["schema"] == RECORD_SCHEMA
        check_record(r)
        assert sorted(MARKER_RE.findall(r["wat_snippet"])) == sorted(MARKER_RE.findall(r["c_snippet"]))
        per_func[r["c_function"]] = per_func.get(r["c_function"], 0) + 1
    # F + L: one root record per function plus one per loop
    assert per_func == {name: 1 + n for name, n in c_loops(stem).items()}


def test_offset2string_matches_data(records):
    for r in records:
        for off, text in r["offset2string"].items():
            stem = r["source"]
            assert extract_data_strings(module(stem))[int(off)] == text


def test_temporal_info_grows(records):
    bubble = [r for r in records if r["function"] == "bubble"]
    assert [r["block_id"] for r in bubble] == ["bubble_0", "bubble_1", "bubble_2"]
    first = {v["name"] for v in bubble[0]["temporal_info"]}
    last = {v["name"] for v in bubble[2]["temporal_info"]}
    assert first <= last and len(last) > len(first)


def test_missing_compiler_is_fatal(tmp_path):
    with pytest.raises(ToolchainMissing):
        forge_corpus(CORPUS, tmp_path / "r.jsonl", tmp_path / "s.jsonl", compiler="no-such-cc {in} -o {out}")


@needs_wasm2wat
def test_forge_corpus_with_zig(tmp_path):
    corpus = tmp_path / "corpus"
    corpus.mkdir()
    for stem in ("bubble", "goto_loop", "strings_esc"):
        shutil.copy(CORPUS / f"{stem}.c", corpus)
    n, skipped = forge_corpus(corpus, tmp_path / "r.jsonl", tmp_path / "s.jsonl", compiler="zig", workers=3)
    recs = [json.loads(line) for line in (tmp_path / "r.jsonl").read_text().splitlines()]
    skips = [json.loads(line) for line in (tmp_path / "s.jsonl").read_text().splitlines()]
    assert (n, skipped) == (len(recs), 1)
    assert skips[0]["reason"] == "count_mismatch" and skips[0]["source"].endswith("goto_loop.c")
    # DWARF-derived offsets agree with the checked-in fixtures
    expected = forged("bubble")[0] + forged("strings_esc")[0]
    strip = lambda r: {k: v for k, v in r.items() if k != "source"}
    assert [strip(r) for r in recs] == [strip(r) for r in expected]
