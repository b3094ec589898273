"""Run a WASI command module under wasmtime-py.

Usage: ``python -m watdecomp.wasirun prog.wasm [args...] < input``

Guest stdout/stderr are relayed to this process's streams. The guest gets
no preopened directories and no network. Exit status is the guest's
``proc_exit`` code, or 134 on a trap.
"""

from __future__ import annotations

import os
import sys
import tempfile

import wasmtime

TRAP_STATUS = 134


def run(wasm_path: str, argv: list[str], stdin: bytes) -> tuple[int, bytes, bytes]:
    with tempfile.TemporaryDirectory(prefix="wasirun-") as scratch:
        paths = {k: os.path.join(scratch, k) for k in ("stdin", "stdout", "stderr")}
        with open(paths["stdin"], "wb") as fh:
            fh.write(stdin)
        cfg = wasmtime.WasiConfig()
        cfg.argv = [os.path.basename(wasm_path), *argv]
        cfg.stdin_file = paths["stdin"]
        cfg.stdout_file = paths["stdout"]
        cfg.stderr_file = paths["stderr"]

        engine = wasmtime.Engine()
        store = wasmtime.Store(engine)
        store.set_wasi(cfg)
        linker = wasmtime.Linker(engine)
        linker.define_wasi()
        module = wasmtime.Module.from_file(engine, wasm_path)
        status = 0
        try:
            instance = linker.instantiate(store, module)
            start = instance.exports(store).get("_start")
            if start is None:
                raise SystemExit(f"{wasm_path}: no _start export")
            start(store)
        except wasmtime.ExitTrap as exc:
            status = exc.code
        except wasmtime.Trap as exc:
            status = TRAP_STATUS
            with open(paths["stderr"], "ab") as fh:
                fh.write(f"trap: {exc}\n".encode())
        # read back before the scratch dir disappears
        with open(paths["stdout"], "rb") as fh:
            out = fh.read()
        with open(paths["stderr"], "rb") as fh:
            err = fh.read()
    return status, out, err


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    if not argv:
        print("usage: python -m watdecomp.wasirun prog.wasm [args...]", file=sys.stderr)
        return 2
    status, out, err = run(argv[0], argv[1:], sys.stdin.buffer.read())
    sys.stdout.buffer.write(out)
    sys.stderr.buffer.write(err)
    sys.stdout.flush()
    return status


if __name__ == "__main__":
    sys.exit(main())
