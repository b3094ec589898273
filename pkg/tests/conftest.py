import importlib.util
import shutil
import sys
from functools import lru_cache
from pathlib import Path

import pytest

HERE = Path(__file__).resolve().parent
sys.path.insert(0, str(HERE))  # tests/oracles.py

FIXTURES = HERE / "fixtures"
CORPUS = FIXTURES / "corpus"
WAT_DIR = FIXTURES / "wat"
OFFSETS_DIR = FIXTURES / "offsets"

HAS_ZIG = importlib.util.find_spec("ziglang") is not None
HAS_WASMTIME = importlib.util.find_spec("wasmtime") is not None
HAS_WASM2WAT = shutil.which("wasm2wat") is not None

needs_zig = pytest.mark.skipif(not (HAS_ZIG and HAS_WASMTIME), reason="ziglang/wasmtime not installed")
needs_wasm2wat = pytest.mark.skipif(not (HAS_ZIG and HAS_WASM2WAT), reason="ziglang/wasm2wat not installed")


def stems():
    return sorted(p.stem for p in CORPUS.glob("*.c"))


@lru_cache(maxsize=None)
def c_text(stem):
    return (CORPUS / f"{stem}.c").read_text(encoding="utf-8")


@lru_cache(maxsize=None)
def module(stem):
    from watdecomp.wat import parse_module

    return parse_module((WAT_DIR / f"{stem}.wat").read_text(encoding="utf-8"))


@lru_cache(maxsize=None)
def offset_map(stem):
    from watdecomp.renamer import load_offset_map

    return load_offset_map(OFFSETS_DIR / f"{stem}.offsets.jsonl")


@lru_cache(maxsize=None)
def gold(stem):
    """The source with every variable renamed to its frame slot."""
    from watdecomp.renamer import rename_c_file

    return rename_c_file(c_text(stem), offset_map(stem))


@lru_cache(maxsize=None)
def forged(stem):
    """(records, reject) from the checked-in wat and offset fixtures."""
    from watdecomp.forge import Reject, build_records

    try:
        return build_records(c_text(stem), module(stem), offset_map(stem), stem), None
    except Reject as exc:
        return [], exc


def all_records():
    return [r for s in stems() for r in forged(s)[0]]


def oneline(text):
    return " ".join(text.split())


@pytest.fixture(scope="session")
def records():
    return all_records()


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    setattr(item, f"rep_{rep.when}", rep)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")
