import json

import pytest

from conftest import CORPUS, WAT_DIR, gold, needs_zig, oneline
from watdecomp.cli import main
from watdecomp.config import load_config
from watdecomp.errors import ConfigError
from watdecomp.forge import mock_table


def test_defaults():
    cfg = load_config(env={})
    assert cfg.backend.temperature == 0.0
    assert cfg.toolchain.compare == "bytes"
    assert cfg.pipeline.skip_shims is True


def test_layering(tmp_path):
    toml = tmp_path / "c.toml"
    toml.write_text('[backend]\nendpoint = "http://file"\nmodel = "m-file"\nretries = 5\n'
                    '[pipeline]\nworkers = 3\nskip_shims = false\n')
    cfg = load_config(toml, env={"WATDECOMP_MODEL": "m-env", "WATDECOMP_API_KEY": "s3cret"},
                      overrides={"backend": {"model": "m-flag", "endpoint": None}})
    assert cfg.backend.endpoint == "http://file"
    assert cfg.backend.model == "m-flag"
    assert cfg.backend.retries == 5
    assert cfg.pipeline.workers == 3 and cfg.pipeline.skip_shims is False
    assert cfg.as_dict()["backend"]["api_key"] == "***"
    assert cfg.as_dict(redact=False)["backend"]["api_key"] == "s3cret"


@pytest.mark.parametrize("body", [
    "[backend]\nendpont = 'x'\n",
    "[extras]\na = 1\n",
    "[pipeline]\nworkers = 'many'\n",
    "[pipeline]\nworkers = 0\n",
    "[toolchain]\ncompare = 'fuzzy'\n",
    "not toml = = =",
])
def test_bad_config(tmp_path, body, capsys):
    toml = tmp_path / "c.toml"
    toml.write_text(body)
    with pytest.raises(ConfigError):
        load_config(toml, env={})
    assert main(["--config", str(toml), "config"]) == 2
    assert "config error" in capsys.readouterr().err


def test_config_command_prints_resolved(capsys, monkeypatch):
    monkeypatch.setenv("WATDECOMP_ENDPOINT", "http://env")
    assert main(["config"]) == 0
    assert json.loads(capsys.readouterr().out)["backend"]["endpoint"] == "http://env"


def test_usage_error_exit_code():
    with pytest.raises(SystemExit) as info:
        main(["decompile"])
    assert info.value.code == 2


def test_slice_command(tmp_path):
    out = tmp_path / "blocks"
    assert main(["slice", str(WAT_DIR / "bubble.wat"), "-o", str(out)]) == 0
    manifest = json.loads((out / "manifest.json").read_text())
    ids = [b["block_id"] for b in manifest["blocks"]]
    assert {"bubble_0", "bubble_1", "bubble_2"} <= set(ids)
    assert ["bubble_1", "bubble_2"] in manifest["edges"]
    assert (out / "bubble_2.wat").read_text().lstrip().startswith("loop")


@pytest.fixture()
def table_file(tmp_path, records):
    p = tmp_path / "table.json"
    p.write_text(json.dumps(mock_table(records)))
    return p


def test_decompile_mock_and_eval(tmp_path, table_file):
    dec = tmp_path / "dec"
    src = tmp_path / "src"
    src.mkdir()
    outputs = []
    for run in range(2):
        out = dec / f"run{run}" / "sieve.c"
        rc = main(["decompile", str(WAT_DIR / "sieve.wat"), "-o", str(out),
                   "--endpoint", "mock", "--mock-table", str(table_file), "--workers", "2"])
        assert rc == 0
        outputs.append((out.read_bytes(), out.with_suffix(".report.jsonl").read_bytes()))
    assert outputs[0] == outputs[1]
    assert oneline(outputs[0][0].decode()) == oneline(gold("sieve"))
    (src / "sieve.c").write_text(gold("sieve"))
    assert main(["eval", str(src), str(dec / "run0"), "--report", str(tmp_path / "ev" / "e.jsonl")]) == 0
    row = json.loads((tmp_path / "ev" / "e.jsonl").read_text().splitlines()[0])
    assert row["aed_s"] >= 0.99 and row["bloat_rate"] <= 2.0
    assert (tmp_path / "ev" / "e.png").exists()


def test_decompile_mock_miss_is_partial(tmp_path):
    (tmp_path / "empty.json").write_text("{}")
    out = tmp_path / "x.c"
    rc = main(["decompile", str(WAT_DIR / "gcd.wat"), "-o", str(out), "--endpoint", "mock",
               "--mock-table", str(tmp_path / "empty.json")])
    assert rc == 1
    summary = json.loads(out.with_suffix(".report.jsonl").read_text().splitlines()[-1])
    assert summary["functions_incomplete"]


def test_decompile_unreachable_backend(tmp_path):
    toml = tmp_path / "c.toml"
    toml.write_text('[backend]\nendpoint = "http://127.0.0.1:9/v1/completions"\nretries = 0\ntimeout = 2.0\n')
    out = tmp_path / "x.c"
    rc = main(["--config", str(toml), "decompile", str(WAT_DIR / "gcd.wat"), "-o", str(out)])
    assert rc != 0
    assert "gcd" not in (out.read_text() if out.exists() else "")


def test_eval_exit_codes(tmp_path):
    src, dec = tmp_path / "src", tmp_path / "dec"
    src.mkdir()
    dec.mkdir()
    assert main(["eval", str(src), str(dec)]) == 1
    (src / "a.c").write_text("int f(void) { return 0; }\n")
    assert main(["eval", str(src), str(dec)]) == 1
    (dec / "a.c").write_text("int f(void) { return 0; }\n")
    assert main(["eval", str(src), str(dec)]) == 0


@needs_zig
def test_exec_missing_runtime_exit_code(tmp_path):
    assert main(["exec", str(CORPUS), str(CORPUS), "--compiler", "zig", "--runtime", "nope {wasm}"]) == 2


def test_decompile_default_output_name(tmp_path, table_file, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert main(["decompile", str(WAT_DIR / "gcd.wat"), "--endpoint", "mock", "--mock-table", str(table_file)]) == 0
    assert oneline((tmp_path / "gcd.decomp.c").read_text()) == oneline(gold("gcd"))
    assert (tmp_path / "gcd.decomp.report.jsonl").exists()
