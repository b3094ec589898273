"""Optional adapter: turn a .wasm binary into wat via an external converter."""

from __future__ import annotations

import shlex
import shutil
import subprocess
import tempfile
from pathlib import Path

from ..errors import ConverterError
from .model import WatModule
from .parser import parse_module

DEFAULT_CONVERTER = "wasm2wat {in} -o {out}"


def render_command(template: str, **values: str) -> list[str]:
    """Split a command template and substitute ``{name}`` placeholders per argument."""
    argv = []
    for part in shlex.split(template):
        for key, val in values.items():
            part = part.replace("{" + key + "}", str(val))
        argv.append(part)
    return argv


def wasm_to_wat(wasm_path: str | Path, template: str = DEFAULT_CONVERTER, timeout: float = 120.0) -> str:
    with tempfile.TemporaryDirectory(prefix="wat-") as tmp:
        out = Path(tmp) / (Path(wasm_path).stem + ".wat")
        argv = render_command(template, **{"in": str(wasm_path), "out": str(out)})
        if shutil.which(argv[0]) is None:
            raise ConverterError(f"converter {argv[0]!r} not found on PATH")
        proc = subprocess.run(argv, capture_output=True, text=True, timeout=timeout)
        if proc.returncode != 0 or not out.exists():
            raise ConverterError(f"{' '.join(argv)} failed: {proc.stderr.strip()}")
        return out.read_text(encoding="utf-8")


def load_module(path: str | Path, converter: str = DEFAULT_CONVERTER) -> WatModule:
    """Parse a .wat file, or convert and parse a .wasm file."""
    path = Path(path)
    if path.suffix == ".wasm":
        return parse_module(wasm_to_wat(path, converter))
    return parse_module(path.read_text(encoding="utf-8"))
