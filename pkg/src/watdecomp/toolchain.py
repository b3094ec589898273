"""External command templates: C compilers and wasm runtimes.

Templates are shell-like strings split with :mod:`shlex`; ``{in}``,
``{out}``, ``{wasm}`` and ``{python}`` are substituted per argument, so paths
with spaces survive.
"""

from __future__ import annotations

import shutil
import subprocess
import sys
import time
from dataclasses import dataclass
from pathlib import Path

from .errors import RuntimeMissing, ToolchainMissing
from .wat.convert import render_command

# Runnable command modules, for recompilation and execution.
EXEC_COMPILERS = {
    "emcc": "emcc -O0 {in} -o {out}",
    "zig": "{python} -m watdecomp.zigcc --profile wasi {in} -o {out}",
}
# Debug-info builds whose wat is sliced for training data.
FORGE_COMPILERS = {
    "emcc": "emcc -O0 -g -sSTANDALONE_WASM -sERROR_ON_UNDEFINED_SYMBOLS=0 --no-entry {in} -o {out}",
    "zig": "{python} -m watdecomp.zigcc --profile module {in} -o {out}",
}
RUNTIMES = {
    "wasmtime-py": "{python} -m watdecomp.wasirun {wasm}",
    "wasmtime": "wasmtime run {wasm}",
}


def resolve(template: str, presets: dict[str, str]) -> str:
    """A preset name or a literal template."""
    return presets.get(template, template)


def require(template: str, presets: dict[str, str], missing=ToolchainMissing) -> str:
    """Resolve ``template`` and check its program exists; raises ``missing`` otherwise."""
    template = resolve(template, presets)
    head = argv_for(template, **{"in": "x", "out": "x", "wasm": "x"})[0]
    if shutil.which(head) is None and not Path(head).exists():
        raise missing(f"{head!r} not found on PATH")
    return template


def argv_for(template: str, **values) -> list[str]:
    values.setdefault("python", sys.executable)
    argv = render_command(template, **{k: str(v) for k, v in values.items()})
    if not argv:
        raise ToolchainMissing("empty command template")
    return argv


@dataclass
class CommandOutcome:
    argv: list[str]
    returncode: int | None
    stdout: bytes
    stderr: bytes
    wall_time: float
    timed_out: bool


def run_command(argv: list[str], *, stdin: bytes = b"", timeout: float, cwd: str | Path | None = None,
                missing=ToolchainMissing) -> CommandOutcome:
    if shutil.which(argv[0]) is None and not Path(argv[0]).exists():
        raise missing(f"{argv[0]!r} not found on PATH")
    t0 = time.perf_counter()
    try:
        proc = subprocess.run(argv, input=stdin, capture_output=True, timeout=timeout, cwd=cwd)
    except subprocess.TimeoutExpired as exc:
        return CommandOutcome(argv, None, exc.stdout or b"", exc.stderr or b"", time.perf_counter() - t0, True)
    return CommandOutcome(argv, proc.returncode, proc.stdout, proc.stderr, time.perf_counter() - t0, False)


def compile_c(template: str, src: str | Path, out: str | Path, timeout: float = 120.0) -> CommandOutcome:
    return run_command(argv_for(template, **{"in": src, "out": out}), timeout=timeout)


__all__ = [
    "CommandOutcome",
    "EXEC_COMPILERS",
    "FORGE_COMPILERS",
    "RUNTIMES",
    "RuntimeMissing",
    "argv_for",
    "compile_c",
    "require",
    "resolve",
    "run_command",
]
