"""Recompile decompiled C, run original and recompiled modules, compare outputs.

Every artifact goes into a per-run scratch directory; inputs are only read.
"""

from __future__ import annotations

import csv
import hashlib
import json
import shutil
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .errors import RuntimeMissing, ToolchainMissing
from .metrics.evaluate import match_files
from .toolchain import EXEC_COMPILERS, RUNTIMES, argv_for, require, resolve, run_command

EXEC_SCHEMA = "watdecomp.exec/1"
DEFAULT_TIMEOUT = 10.0
TRAP_STATUS = 134  # wasmtime reports traps as 128 + SIGABRT
COMPARE_MODES = ("bytes", "lines")


@dataclass
class ExecResult:
    compiled: bool
    executed: bool = False
    exit_code: int | None = None
    stdout: bytes = b""
    stderr: bytes = b""
    wall_time: float = 0.0
    timed_out: bool = False

    def __post_init__(self):
        if self.executed and not self.compiled:
            raise ValueError("executed implies compiled")
        if self.timed_out and self.executed:
            raise ValueError("a timed-out run does not count as executed")

    def summary(self, timings: bool = False) -> dict:
        out = {
            "compiled": self.compiled,
            "executed": self.executed,
            "exit_code": self.exit_code,
            "timed_out": self.timed_out,
            "stdout_sha256": hashlib.sha256(self.stdout).hexdigest(),
            "stdout_len": len(self.stdout),
            "stderr_tail": self.stderr[-300:].decode("utf-8", "replace"),
        }
        if timings:
            out["wall_time"] = round(self.wall_time, 4)
        return out


@dataclass(frozen=True)
class ConsistencyVerdict:
    recompiled: bool
    re_executed: bool
    output_consistent: bool

    def __post_init__(self):
        if self.output_consistent and not self.re_executed or self.re_executed and not self.recompiled:
            raise ValueError("verdict chain must be monotone")

    def as_tuple(self) -> tuple[bool, bool, bool]:
        return (self.recompiled, self.re_executed, self.output_consistent)


def recompile(c_path: str | Path, out_wasm: str | Path, compiler: str = "emcc", timeout: float = 120.0) -> ExecResult:
    """Compile phase only; a nonzero exit or missing artifact means compiled=False."""
    argv = argv_for(resolve(compiler, EXEC_COMPILERS), **{"in": c_path, "out": out_wasm})
    outcome = run_command(argv, timeout=timeout)
    ok = outcome.returncode == 0 and Path(out_wasm).exists()
    return ExecResult(ok, False, outcome.returncode, outcome.stdout, outcome.stderr, outcome.wall_time, outcome.timed_out)


def run_module(
    wasm_path: str | Path,
    stdin: bytes = b"",
    timeout: float = DEFAULT_TIMEOUT,
    runtime: str = "wasmtime-py",
    scratch: str | Path | None = None,
) -> ExecResult:
    argv = argv_for(resolve(runtime, RUNTIMES), wasm=Path(wasm_path).resolve())
    with tempfile.TemporaryDirectory(prefix="run-", dir=scratch) as cwd:
        outcome = run_command(argv, stdin=stdin, timeout=timeout, cwd=cwd, missing=RuntimeMissing)
    finished = not outcome.timed_out and outcome.returncode != TRAP_STATUS
    return ExecResult(True, finished, outcome.returncode, outcome.stdout, outcome.stderr, outcome.wall_time, outcome.timed_out)


def _normalise(out: bytes) -> bytes:
    lines = out.replace(b"\r\n", b"\n").split(b"\n")
    return b"\n".join(line.rstrip() for line in lines).rstrip(b"\n")


def judge(original: ExecResult, recompiled: ExecResult, compare: str = "bytes") -> ConsistencyVerdict:
    if compare not in COMPARE_MODES:
        raise ValueError(f"compare must be one of {COMPARE_MODES}")
    rc = recompiled.compiled
    rx = rc and recompiled.executed
    if compare == "bytes":
        same = original.stdout == recompiled.stdout
    else:
        same = _normalise(original.stdout) == _normalise(recompiled.stdout)
    consistent = rx and original.executed and same and original.exit_code == recompiled.exit_code
    return ConsistencyVerdict(rc, rx, consistent)


# --- batch -------------------------------------------------------------------------


@dataclass
class ExecRow:
    stem: str
    source: str
    decompiled: str | None
    original: ExecResult
    recompiled: ExecResult
    verdict: ConsistencyVerdict

    def record(self, timings: bool = False) -> dict:
        return {
            "schema": EXEC_SCHEMA,
            "kind": "pair",
            "stem": self.stem,
            "source": self.source,
            "decompiled": self.decompiled,
            "recompiled": self.verdict.recompiled,
            "re_executed": self.verdict.re_executed,
            "output_consistent": self.verdict.output_consistent,
            "original_run": self.original.summary(timings),
            "recompiled_run": self.recompiled.summary(timings),
        }


def _stdin_for(src: Path) -> bytes:
    p = src.with_suffix(".stdin")
    return p.read_bytes() if p.exists() else b""


def exec_pair(
    stem: str,
    src: Path,
    dec: Path | None,
    work: Path,
    *,
    compiler: str = "emcc",
    runtime: str = "wasmtime-py",
    timeout: float = DEFAULT_TIMEOUT,
    compile_timeout: float = 120.0,
    compare: str = "bytes",
) -> ExecRow:
    work.mkdir(parents=True, exist_ok=True)
    stdin = _stdin_for(src)
    prebuilt = src.with_suffix(".wasm")
    if prebuilt.exists():
        original = run_module(prebuilt, stdin, timeout, runtime, work)
    else:
        built = recompile(src, work / "original.wasm", compiler, compile_timeout)
        original = run_module(work / "original.wasm", stdin, timeout, runtime, work) if built.compiled else built
    if dec is None:
        recompiled = ExecResult(False, stderr=b"no decompiled file")
    else:
        recompiled = recompile(dec, work / "recompiled.wasm", compiler, compile_timeout)
        if recompiled.compiled:
            run = run_module(work / "recompiled.wasm", stdin, timeout, runtime, work)
            run.stderr = recompiled.stderr + run.stderr
            recompiled = run
    return ExecRow(stem, str(src), str(dec) if dec else None, original, recompiled, judge(original, recompiled, compare))


@dataclass
class ExecReport:
    rows: list[ExecRow]

    def rates(self) -> dict[str, float]:
        n = len(self.rows)
        if n == 0:
            return {"recompiled": 0.0, "re_executed": 0.0, "output_consistent": 0.0}
        return {
            "recompiled": 100.0 * sum(r.verdict.recompiled for r in self.rows) / n,
            "re_executed": 100.0 * sum(r.verdict.re_executed for r in self.rows) / n,
            "output_consistent": 100.0 * sum(r.verdict.output_consistent for r in self.rows) / n,
        }

    def table(self) -> str:
        lines = ["file\trecompiled\tre_executed\tconsistent"]
        for r in self.rows:
            lines.append("\t".join([r.stem, *("yes" if v else "no" for v in r.verdict.as_tuple())]))
        rates = self.rates()
        lines.append("rate(%)\t" + "\t".join(f"{v:.2f}" for v in rates.values()))
        return "\n".join(lines)

    def write(self, report_path: str | Path, figure: bool = True, timings: bool = False) -> list[Path]:
        report_path = Path(report_path)
        report_path.parent.mkdir(parents=True, exist_ok=True)
        with open(report_path, "w", encoding="utf-8") as fh:
            for r in self.rows:
                fh.write(json.dumps(r.record(timings), sort_keys=True) + "\n")
            agg = {"schema": EXEC_SCHEMA, "kind": "aggregate", "programs": len(self.rows), "rates_percent": self.rates()}
            fh.write(json.dumps(agg, sort_keys=True) + "\n")
        csv_path = report_path.with_suffix(".csv")
        with open(csv_path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["file", "recompiled", "re_executed", "output_consistent", "original_exit", "recompiled_exit"])
            for r in self.rows:
                w.writerow([r.stem, *map(int, r.verdict.as_tuple()), r.original.exit_code, r.recompiled.exit_code])
        written = [report_path, csv_path]
        if figure and self.rows:
            from .plotting import chain_bars

            written.append(chain_bars(self.rates(), report_path.with_suffix(".png"), "recompile / re-execute / consistent"))
        return written


def exec_dirs(
    src_root: str | Path,
    dec_root: str | Path,
    *,
    compiler: str = "emcc",
    runtime: str = "wasmtime-py",
    timeout: float = DEFAULT_TIMEOUT,
    compile_timeout: float = 120.0,
    compare: str = "bytes",
    workers: int = 1,
    scratch: str | Path | None = None,
    keep_scratch: bool = False,
) -> ExecReport:
    """Run every matched pair; tool availability is checked once up front."""
    # fail fast with a clear error rather than per-row noise
    compiler = require(compiler, EXEC_COMPILERS, ToolchainMissing)
    runtime = require(runtime, RUNTIMES, RuntimeMissing)
    pairs = match_files(src_root, dec_root)
    root = Path(tempfile.mkdtemp(prefix="exec-", dir=scratch))
    try:
        def one(item):
            i, (stem, src, dec) = item
            return exec_pair(stem, src, dec, root / f"{i:05d}", compiler=compiler, runtime=runtime,
                             timeout=timeout, compile_timeout=compile_timeout, compare=compare)

        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                rows = list(pool.map(one, enumerate(pairs)))
        else:
            rows = [one(x) for x in enumerate(pairs)]
    finally:
        if not keep_scratch:
            shutil.rmtree(root, ignore_errors=True)
    return ExecReport(rows)
