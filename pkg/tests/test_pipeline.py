import json

import httpx
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import gold, module, oneline, stems
from watdecomp.context import ContextBundle, VariableDef
from watdecomp.errors import BackendUnavailable, BudgetExhausted, EmptyCompletion, PromptTooLong
from watdecomp.forge import mock_table
from watdecomp.pipeline.backend import BackendConfig, HttpBackend, MockBackend, snippet_key
from watdecomp.pipeline.decompile import (
    decompile_module,
    dedupe_declarations,
    is_toolchain_shim,
    postprocess,
)
from watdecomp.pipeline.prompt import (
    INPUT_LABEL,
    INSTRUCTION_LABEL,
    RESPONSE_LABEL,
    PromptRecord,
    count_tokens,
    synthesize_prompt,
)
from watdecomp.pipeline.strings import PLACEHOLDER_RE, c_escape, c_unescape, recover_strings
from watdecomp.slicer import Snippet


def _prompt(wat="i32.const 1", **kw):
    return PromptRecord("f_0", "translate", ("int local_4;",), ("int puts(int);",), wat, **kw)


# --- prompt -------------------------------------------------------------------------


def test_prompt_layout():
    text = _prompt().render()
    assert text.index(INSTRUCTION_LABEL) < text.index(INPUT_LABEL) < text.index(RESPONSE_LABEL)
    assert "Defined variables:\nint local_4;\nFunction declarations:\nint puts(int);\nWat:\ni32.const 1" in text
    assert text.endswith(RESPONSE_LABEL + "\n")


def test_finetune_prompt_appends_response():
    p = _prompt(mode="finetune", response="return 1;")
    assert p.render().endswith(RESPONSE_LABEL + "\nreturn 1;")
    assert p.prefix == _prompt().render()
    with pytest.raises(ValueError):
        _prompt(mode="finetune")


def test_prompt_budget():
    snip = Snippet("f_0", "i32.const 1\n" * 400)
    with pytest.raises(PromptTooLong) as info:
        synthesize_prompt(snip, ContextBundle(), max_tokens=500)
    assert info.value.tokens > 500
    ok = synthesize_prompt(Snippet("f_0", "nop"), ContextBundle((VariableDef("local_8", "int"),)))
    assert ok.defined_vars == ("int local_8;",)


def test_count_tokens():
    assert count_tokens("i32.const 1") == 4
    assert count_tokens("") == 0


# --- backends -----------------------------------------------------------------------


def test_mock_backend_lookup():
    b = MockBackend({snippet_key("i32.const 1"): "return 1;"})
    assert b.complete(_prompt()) == "return 1;"
    with pytest.raises(EmptyCompletion):
        b.complete(_prompt("nop"))


def _http(handler, **cfg):
    cfg.setdefault("backoff", 0.0)
    return HttpBackend(BackendConfig(endpoint="http://model.test/v1/completions", **cfg), httpx.MockTransport(handler))


def test_http_backend_payload_and_retry():
    seen = []

    def handler(request):
        seen.append(json.loads(request.content))
        if len(seen) < 3:
            return httpx.Response(503 if len(seen) == 1 else 429)
        return httpx.Response(200, json={"choices": [{"text": "x = 1;", "finish_reason": "stop"}]})

    b = _http(handler, retries=3, model="m", api_key="k")
    assert b.complete(_prompt()) == "x = 1;"
    assert len(seen) == 3
    assert seen[0]["model"] == "m" and seen[0]["temperature"] == 0.0
    assert seen[0]["prompt"] == _prompt().render()


def test_http_backend_gives_up():
    b = _http(lambda r: httpx.Response(500), retries=1)
    with pytest.raises(BackendUnavailable):
        b.complete(_prompt())


def test_http_backend_transport_error():
    def handler(request):
        raise httpx.ConnectError("refused", request=request)

    with pytest.raises(BackendUnavailable):
        _http(handler, retries=0).complete(_prompt())


def test_http_backend_length_cutoff():
    b = _http(lambda r: httpx.Response(200, json={"choices": [{"text": "for (", "finish_reason": "length"}]}))
    with pytest.raises(BudgetExhausted):
        b.complete(_prompt())


def test_http_backend_client_error_not_retried():
    calls = []

    def handler(request):
        calls.append(1)
        return httpx.Response(400, text="bad")

    with pytest.raises(BackendUnavailable):
        _http(handler, retries=3).complete(_prompt())
    assert len(calls) == 1


# --- cleanup and strings ------------------------------------------------------------


def test_postprocess():
    assert postprocess("```c\nint x = 1;\n```\ntrailing") == "int x = 1;"
    assert postprocess("x++;\n[Instruction]\nmore") == "x++;"
    assert postprocess("int f(void) {\n  return 1;\n}\nint g(void) { }") == "int f(void) {\n  return 1;\n}"
    assert postprocess("do {\n  i++;\n} while (i < 3);\nextra") == "do {\n  i++;\n} while (i < 3);"


def test_escape_round_trip_examples():
    assert c_escape('say "hi"\n\t\\') == r'"say \"hi\"\n\t\\"'
    assert c_escape("\x01") == r'"\001"'
    assert c_unescape(r'"a\x41\101\n"') == b"aAA\n"


def test_recover_strings_skips_literals_and_comments():
    text = 'puts(STR_10); /* STR_10 */ puts("STR_10"); puts(STR_99);'
    out, missing = recover_strings(text, {10: "ok\n"})
    assert out == 'puts("ok\\n"); /* STR_10 */ puts("STR_10"); puts(STR_99);'
    assert missing == [99]


printable = st.text(st.characters(min_codepoint=1, max_codepoint=0x2FF), max_size=12)


@given(printable)
def test_c_escape_inverts(s):
    assert c_unescape(c_escape(s)) == s.encode("utf-8")


@given(st.lists(st.tuples(st.sampled_from(["x = ", "puts(", "f(1, "]), st.integers(0, 5)), max_size=6), printable)
def test_recover_only_touches_placeholders(parts, value):
    text = "\n".join(f"{head}STR_{k});" for head, k in parts)
    out, _ = recover_strings(text, {k: value for k in range(3)})
    # outside placeholder spans the text is unchanged
    assert PLACEHOLDER_RE.sub("@", text).split("@")[0] == out[: len(PLACEHOLDER_RE.sub("@", text).split("@")[0])]
    rest = out
    for head, k in parts:
        assert rest.startswith(head)
        rest = rest[len(head):]
        lit = c_escape(value) if k < 3 else f"STR_{k}"
        assert rest.startswith(lit)
        rest = rest[len(lit):].lstrip(");\n")


# --- end to end ---------------------------------------------------------------------


def test_dedupe_declarations():
    text = "void f(void) {\n  int a;\n  int a;\n  a = 1;\n  long a;\n}"
    out, conflicts = dedupe_declarations(text)
    assert out == "void f(void) {\n  int a;\n  a = 1;\n  long a;\n}"
    assert conflicts and conflicts[0].startswith("a:")


def test_shims_detected():
    m = module("arith")
    shims = {f.name for f in m.functions if is_toolchain_shim(f, m)}
    assert shims == {"__wasm_call_ctors", "main"}


@pytest.mark.parametrize("stem", ["bubble", "strings_esc", "matmul", "wordcount"])
def test_mock_decompile_reproduces_gold(stem, records):
    unit = decompile_module(module(stem), MockBackend(mock_table(records)))
    assert unit.ok
    assert unit.unresolved_placeholders == []
    assert oneline(unit.text) == oneline(gold(stem))


def test_partial_table_reports_incomplete(records):
    table = mock_table(records)
    m = module("bubble")
    # drop the innermost loop of bubble()
    victim = next(r for r in records if r["function"] == "bubble" and r["block_id"] == "bubble_2")
    del table[snippet_key(victim["wat_snippet"])]
    unit = decompile_module(m, MockBackend(table), workers=2)
    assert not unit.ok
    assert "bubble" in unit.incomplete and "UnresolvedMarker" in unit.incomplete["bubble"]
    assert "__original_main" in unit.functions
    assert "void bubble(int, int);" in unit.declarations
    recs = unit.report_records()
    assert recs[-1]["kind"] == "summary" and recs[-1]["functions_incomplete"] == ["bubble"]


def test_report_is_deterministic(tmp_path, records):
    outs = []
    for k in range(2):
        unit = decompile_module(module("sieve"), MockBackend(mock_table(records)), workers=3)
        unit.write(tmp_path / f"{k}.c", tmp_path / f"{k}.jsonl")
        outs.append(((tmp_path / f"{k}.c").read_bytes(), (tmp_path / f"{k}.jsonl").read_bytes()))
    assert outs[0] == outs[1]
