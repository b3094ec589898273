import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import module
from watdecomp.context import (
    ContextBundle,
    VariableDef,
    declared_variables,
    params_from_wat,
    spatial_info,
    temporal_info,
)
from watdecomp.errors import UnknownCallee
from watdecomp.slicer import slice_function
from watdecomp.wat import parse_module

INDIRECT = """(module
  (type (;0;) (func (param i32) (result i32)))
  (type (;1;) (func (param f64)))
  (import "env" "abs" (func $abs (type 0)))
  (func $f (type 0) (param i32) (result i32)
    local.get 0
    call $abs
    local.get 0
    call 0
    f64.const 1
    i32.const 0
    call_indirect (type 1)
    local.get 0))
"""


def test_spatial_direct_and_indirect():
    m = parse_module(INDIRECT)
    decls = spatial_info(m.function("f").text, m)
    assert decls == ["int abs(int);", "void indirect_1(double);"]


def test_spatial_unknown_callee():
    m = parse_module(INDIRECT)
    with pytest.raises(UnknownCallee):
        spatial_info("call $nowhere", m)


def test_spatial_on_fixture_snippets():
    m = module("strings_esc")
    snips = slice_function(m.function("banner"))
    assert [spatial_info(s, m) for s in snips] == [["int printf(int, int);"]] * 2


def test_declared_variables():
    text = "int a, *p = &a; char buf[16]; unsigned long n = 3; for (int i = 0; i < 2; i++) {}"
    got = [(v.name, v.c_type) for v in declared_variables(text)]
    assert got == [("a", "int"), ("p", "int*"), ("buf", "char[16]"), ("n", "unsigned long"), ("i", "int")]


def test_declared_variables_ignores_strings_and_prototypes():
    assert declared_variables('puts("int x;"); /* int y; */ int f(int a);') == []


def test_params_use_spill_slots():
    m = module("arith")
    assert params_from_wat(m.function("add"), m) == [VariableDef("local_12", "int"), VariableDef("local_8", "int")]


def test_render_array_declaration():
    assert VariableDef("local_16", "int[10]").render() == "int local_16[10];"
    with pytest.raises(ValueError):
        VariableDef("not valid", "int")


def test_bundle_rejects_duplicates():
    v = VariableDef("a", "int")
    with pytest.raises(ValueError):
        ContextBundle((v, v))


names = st.from_regex(r"[a-z][a-z0-9_]{0,5}", fullmatch=True)
snippets = st.lists(st.lists(names, max_size=4).map(lambda ns: " ".join(f"int {n};" for n in ns)), max_size=5)


@given(snippets)
def test_temporal_info_is_monotone(prior):
    previous: set[str] = set()
    for k in range(len(prior) + 1):
        now = {v.name for v in temporal_info(prior[:k])}
        assert previous <= now
        previous = now
