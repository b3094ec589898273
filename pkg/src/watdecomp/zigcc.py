"""C to wasm32 driver built on the ``ziglang`` wheel.

Usable where no Emscripten install exists. Two profiles:

``wasi``    a runnable WASI command module (libc linked in).
``module``  an unlinked-libc module: libc calls stay imports, every
            definition is exported, so the wat holds only the user's code.

Both compile at -O0 with DWARF, which keeps locals in the stack frame.

    python -m watdecomp.zigcc [--profile wasi|module] in.c -o out.wasm
"""

from __future__ import annotations

import argparse
import subprocess
import sys
import tempfile
from pathlib import Path

CFLAGS = ["-target", "wasm32-wasi", "-O0", "-g", "-fno-sanitize=undefined", "-fno-stack-protector"]


def _zig(*args: str) -> list[str]:
    return [sys.executable, "-m", "ziglang", *args]


def build(src: str | Path, out: str | Path, profile: str = "wasi") -> subprocess.CompletedProcess:
    if profile == "wasi":
        return subprocess.run(_zig("cc", *CFLAGS, str(src), "-o", str(out)), capture_output=True, text=True)
    if profile != "module":
        raise ValueError(f"unknown profile {profile!r}")
    with tempfile.TemporaryDirectory(prefix="zigcc-") as tmp:
        obj = Path(tmp) / (Path(src).stem + ".o")
        proc = subprocess.run(_zig("cc", *CFLAGS, "-c", str(src), "-o", str(obj)), capture_output=True, text=True)
        if proc.returncode != 0:
            return proc
        link = ["wasm-ld", "--no-entry", "--export-all", "--allow-undefined", str(obj), "-o", str(out)]
        return subprocess.run(_zig(*link), capture_output=True, text=True)


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(prog="python -m watdecomp.zigcc")
    ap.add_argument("src")
    ap.add_argument("-o", dest="out", required=True)
    ap.add_argument("--profile", choices=("wasi", "module"), default="wasi")
    args = ap.parse_args(argv)
    proc = build(args.src, args.out, args.profile)
    sys.stdout.write(proc.stdout)
    sys.stderr.write(proc.stderr)
    return proc.returncode


if __name__ == "__main__":
    sys.exit(main())
