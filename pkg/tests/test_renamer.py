import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import c_text, gold, module, offset_map, stems
from watdecomp.cparse import parse_skeleton
from watdecomp.errors import DuplicateName, DuplicateOffset, FormatError, UnmappedCollision
from watdecomp.renamer import (
    OffsetEntry,
    VarOffsetMap,
    infer_offsets_from_wat,
    offset_map_from_records,
    rename_c_file,
    rename_c_source,
)

FUNC = """int f(int n) {
  int i, total = 0; // i counts
  struct { int i; } s;
  for (i = 0; i < n; i++) { total += i; s.i = i; }
  printf("i=%d total\\n", i);
  return total;
}"""
ENTRIES = [OffsetEntry("n", 12), OffsetEntry("i", 8), OffsetEntry("total", 4)]


def test_rename_identifiers_only():
    out = rename_c_source(FUNC, ENTRIES)
    assert "int local_8, local_4 = 0; // i counts" in out
    assert "s.i = local_8" in out  # field names are not identifiers
    assert '"i=%d total\\n"' in out
    assert "int f(int local_12)" in out


def test_rename_is_idempotent():
    once = rename_c_source(FUNC, ENTRIES)
    assert rename_c_source(once, ENTRIES) == once


def test_collision_detected():
    with pytest.raises(UnmappedCollision):
        rename_c_source("int f(int n) { int local_12 = n; return local_12; }", ENTRIES)


def test_duplicate_entries_rejected():
    m = VarOffsetMap()
    m.add("f", OffsetEntry("a", 4))
    with pytest.raises(DuplicateOffset):
        m.add("f", OffsetEntry("b", 4))
    with pytest.raises(DuplicateName):
        m.add("f", OffsetEntry("a", 8))
    with pytest.raises(FormatError):
        offset_map_from_records([{"function": "f", "name": "x", "offset": -1}])


def test_rename_file_scopes_per_function():
    text = "int g(int n) { return n; }\nint h(int n) { return n + 1; }\n"
    m = offset_map_from_records([{"function": "g", "name": "n", "offset": 12}])
    assert rename_c_file(text, m) == "int g(int local_12) { return local_12; }\nint h(int n) { return n + 1; }\n"


def test_inferred_offsets_cover_dwarf_offsets():
    # without debug info the wat still shows which frame slots are in use
    for stem in stems():
        m = module(stem)
        for fname, entries in offset_map(stem).functions.items():
            wat_name = "__original_main" if fname == "main" else fname
            inferred = set(infer_offsets_from_wat(m.function(wat_name), m))
            assert {e.offset for e in entries} <= inferred, (stem, fname)


@pytest.mark.parametrize("stem", stems())
def test_fixture_renaming_preserves_skeleton(stem):
    renamed = gold(stem)
    assert parse_skeleton(renamed) == parse_skeleton(c_text(stem))
    assert rename_c_file(renamed, offset_map(stem)) == renamed


idents = st.from_regex(r"[a-z]{1,3}", fullmatch=True).filter(lambda s: s not in {"do", "if", "int"})


@settings(max_examples=100, deadline=None)
@given(st.lists(idents, min_size=1, max_size=5, unique=True))
def test_generated_rename_keeps_shape(names):
    body = " ".join(f"int {n} = {k};" for k, n in enumerate(names))
    uses = " + ".join(names)
    text = f"int f(void) {{ {body} return {uses}; }}"
    entries = [OffsetEntry(n, 4 * (k + 1)) for k, n in enumerate(names)]
    out = rename_c_source(text, entries)
    assert parse_skeleton(out) == parse_skeleton(text)
    assert rename_c_source(out, entries) == out
    for e in entries:
        assert e.target in out
