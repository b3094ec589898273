"""Rebuild the checked-in wat and offset-map fixtures from corpus/*.c.

Needs the ``ziglang`` wheel and ``wasm2wat`` on PATH:

    python tests/fixtures/regen.py
"""

from __future__ import annotations

import sys
import tempfile
from pathlib import Path

from watdecomp.dwarfmap import extract_offsets, write_offsets
from watdecomp.wat.convert import wasm_to_wat
from watdecomp.zigcc import build

HERE = Path(__file__).resolve().parent


def main() -> int:
    corpus = HERE / "corpus"
    (HERE / "wat").mkdir(exist_ok=True)
    (HERE / "offsets").mkdir(exist_ok=True)
    failed = 0
    with tempfile.TemporaryDirectory() as tmp:
        for src in sorted(corpus.glob("*.c")):
            wasm = Path(tmp) / (src.stem + ".wasm")
            proc = build(src, wasm, profile="module")
            if proc.returncode != 0:
                print(f"{src.name}: build failed\n{proc.stderr}", file=sys.stderr)
                failed += 1
                continue
            (HERE / "wat" / (src.stem + ".wat")).write_text(wasm_to_wat(wasm), encoding="utf-8")
            records, _ = extract_offsets(wasm, src.name)
            write_offsets(records, HERE / "offsets" / (src.stem + ".offsets.jsonl"))
            print(src.name)
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
