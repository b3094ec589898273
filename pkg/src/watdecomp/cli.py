"""``watdecomp`` command line.

Exit codes: 0 full success, 1 partial or input failure (details in the
report), 2 usage, configuration or missing-tool errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .config import RunConfig, load_config
from .errors import ConfigError, RuntimeMissing, ToolchainMissing, WatDecompError

log = logging.getLogger("watdecomp")

EXIT_OK, EXIT_PARTIAL, EXIT_USAGE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse exits 2 already; keep the message format ours
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


# --- subcommands -------------------------------------------------------------------


def cmd_slice(args, cfg: RunConfig) -> int:
    from .slicer import slice_program
    from .wat.convert import load_module

    module = load_module(args.input, cfg.toolchain.converter)
    manifest = slice_program(module).export(args.out_dir)
    print(f"{len(manifest['blocks'])} blocks, {len(manifest['edges'])} marker edges -> {args.out_dir}")
    return EXIT_OK


def cmd_decompile(args, cfg: RunConfig) -> int:
    from .pipeline.backend import make_backend
    from .pipeline.decompile import decompile_module
    from .wat.convert import load_module

    module = load_module(args.input, cfg.toolchain.converter)
    backend = make_backend(cfg.backend)
    try:
        unit = decompile_module(
            module,
            backend,
            functions=args.functions.split(",") if args.functions else None,
            skip_shims=cfg.pipeline.skip_shims,
            instruction=cfg.pipeline.instruction(),
            max_tokens=cfg.pipeline.prompt_max_tokens,
            workers=cfg.pipeline.workers,
            timings=args.timings,
        )
    finally:
        close = getattr(backend, "close", None)
        if close is not None:
            close()
    out = Path(args.output) if args.output else Path(Path(args.input).stem + ".decomp.c")
    report = Path(args.report) if args.report else out.with_suffix(".report.jsonl")
    unit.write(out, report, timings=args.timings)
    failed = sum(t.status != "ok" for t in unit.transcripts)
    print(f"{len(unit.functions)} functions emitted, {len(unit.incomplete)} incomplete, "
          f"{failed} snippet failures -> {out}")
    return EXIT_OK if unit.ok else EXIT_PARTIAL


def cmd_eval(args, cfg: RunConfig) -> int:
    from .metrics.evaluate import evaluate_dirs

    report = evaluate_dirs(args.src_root, args.dec_root, workers=cfg.pipeline.workers)
    if not report.pairs:
        print(f"no .c files under {args.src_root}", file=sys.stderr)
        return EXIT_PARTIAL
    print(report.table())
    if args.report:
        for p in report.write(args.report, figure=not args.no_figure):
            log.info("wrote %s", p)
    missing = [p.stem for p in report.pairs if p.decompiled is None]
    if missing:
        print(f"missing decompiled files: {', '.join(missing)}", file=sys.stderr)
        return EXIT_PARTIAL
    return EXIT_OK


def cmd_exec(args, cfg: RunConfig) -> int:
    from .execharness import exec_dirs

    tc = cfg.toolchain
    report = exec_dirs(
        args.src_root,
        args.dec_root,
        compiler=tc.exec_compiler,
        runtime=tc.runtime,
        timeout=tc.exec_timeout,
        compile_timeout=tc.compile_timeout,
        compare=tc.compare,
        workers=cfg.pipeline.workers,
        scratch=args.scratch,
        keep_scratch=args.keep_scratch,
    )
    print(report.table())
    if args.report:
        for p in report.write(args.report, figure=not args.no_figure, timings=args.timings):
            log.info("wrote %s", p)
    originals_ok = all(r.original.executed for r in report.rows)
    if not originals_ok:
        print("some original programs did not run to completion", file=sys.stderr)
    return EXIT_OK if report.rows and originals_ok else EXIT_PARTIAL


def cmd_dataset(args, cfg: RunConfig) -> int:
    from .forge import forge_corpus, mock_table

    out = Path(args.output)
    skips = Path(args.skips) if args.skips else out.with_suffix(".skips.jsonl")
    n_rec, n_skip = forge_corpus(
        args.corpus_root,
        out,
        skips,
        compiler=cfg.toolchain.forge_compiler,
        converter=cfg.toolchain.converter,
        workers=cfg.pipeline.workers,
        timeout=cfg.toolchain.compile_timeout,
    )
    if args.mock_table:
        with open(out, encoding="utf-8") as fh:
            table = mock_table(json.loads(line) for line in fh if line.strip())
        Path(args.mock_table).write_text(json.dumps(table, indent=1, sort_keys=True) + "\n", encoding="utf-8")
    print(f"{n_rec} records, {n_skip} files skipped -> {out}")
    return EXIT_PARTIAL if n_skip else EXIT_OK


def cmd_offsets(args, cfg: RunConfig) -> int:
    from .dwarfmap import extract_offsets, write_offsets

    records, unmapped = extract_offsets(args.wasm, args.source)
    write_offsets(records, args.output)
    for u in unmapped:
        log.warning("no frame offset for %s:%s", u["function"], u["name"])
    print(f"{len(records)} variables, {len(unmapped)} without a frame slot -> {args.output}")
    return EXIT_OK


def cmd_config(args, cfg: RunConfig) -> int:
    print(json.dumps(cfg.as_dict(), indent=2, sort_keys=True))
    return EXIT_OK


# --- wiring ------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="watdecomp", description="Loop-sliced wat-to-C decompilation toolkit.")
    ap.add_argument("--config", help="TOML config file")
    ap.add_argument("-v", "--verbose", action="count", default=0)
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("slice", help="cut a wat/wasm module into loop-bounded blocks")
    p.add_argument("input")
    p.add_argument("-o", "--out-dir", required=True)
    p.add_argument("--converter", dest="toolchain.converter")
    p.set_defaults(func=cmd_slice)

    p = sub.add_parser("decompile", help="decompile a wat/wasm module to C")
    p.add_argument("input")
    p.add_argument("-o", "--output", help="C file to write (default: ./<input stem>.decomp.c)")
    p.add_argument("--report", help="JSONL run report (default: <output>.report.jsonl)")
    p.add_argument("--functions", help="comma-separated function names (default: all but toolchain shims)")
    p.add_argument("--timings", action="store_true", help="include wall times in the report")
    p.add_argument("--endpoint", dest="backend.endpoint", help="completion URL, or 'mock'")
    p.add_argument("--model", dest="backend.model")
    p.add_argument("--mock-table", dest="backend.mock_table")
    p.add_argument("--temperature", dest="backend.temperature", type=float)
    p.add_argument("--max-tokens", dest="backend.max_tokens", type=int)
    p.add_argument("--max-in-flight", dest="backend.max_in_flight", type=int)
    p.add_argument("--workers", dest="pipeline.workers", type=int)
    p.add_argument("--converter", dest="toolchain.converter")
    p.set_defaults(func=cmd_decompile)

    p = sub.add_parser("eval", help="score decompiled C against source C")
    p.add_argument("src_root")
    p.add_argument("dec_root")
    p.add_argument("--report", help="JSONL report; CSV and PNG are written beside it")
    p.add_argument("--no-figure", action="store_true")
    p.add_argument("--workers", dest="pipeline.workers", type=int)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("exec", help="recompile and re-execute decompiled C")
    p.add_argument("src_root")
    p.add_argument("dec_root")
    p.add_argument("--report", help="JSONL report; CSV and PNG are written beside it")
    p.add_argument("--no-figure", action="store_true")
    p.add_argument("--timings", action="store_true")
    p.add_argument("--scratch", help="parent directory for the per-run scratch dir")
    p.add_argument("--keep-scratch", action="store_true")
    p.add_argument("--compiler", dest="toolchain.exec_compiler", help="preset (emcc, zig) or template")
    p.add_argument("--runtime", dest="toolchain.runtime", help="preset (wasmtime-py, wasmtime) or template")
    p.add_argument("--timeout", dest="toolchain.exec_timeout", type=float)
    p.add_argument("--compare", dest="toolchain.compare", choices=("bytes", "lines"))
    p.add_argument("--workers", dest="pipeline.workers", type=int)
    p.set_defaults(func=cmd_exec)

    p = sub.add_parser("dataset", help="build training records from a C corpus")
    p.add_argument("corpus_root")
    p.add_argument("-o", "--output", required=True, help="records JSONL")
    p.add_argument("--skips", help="skip report (default: <output>.skips.jsonl)")
    p.add_argument("--mock-table", help="also write a sha256(wat) -> C snippet table")
    p.add_argument("--compiler", dest="toolchain.forge_compiler", help="preset (emcc, zig) or template")
    p.add_argument("--converter", dest="toolchain.converter")
    p.add_argument("--workers", dest="pipeline.workers", type=int)
    p.set_defaults(func=cmd_dataset)

    p = sub.add_parser("offsets", help="dump DWARF variable frame offsets of a debug build")
    p.add_argument("wasm")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--source", help="only compile units with this file name")
    p.set_defaults(func=cmd_offsets)

    p = sub.add_parser("config", help="print the resolved configuration")
    p.set_defaults(func=cmd_config)
    return ap


def _overrides(args) -> dict[str, dict]:
    out: dict[str, dict] = {}
    for key, value in vars(args).items():
        if "." in key and value is not None:
            section, name = key.split(".", 1)
            out.setdefault(section, {})[name] = value
    return out


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        cfg = load_config(args.config, overrides=_overrides(args))
    except ConfigError as exc:
        print(f"watdecomp: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args, cfg)
    except (ConfigError, ToolchainMissing, RuntimeMissing) as exc:
        print(f"watdecomp: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (WatDecompError, OSError) as exc:
        print(f"watdecomp: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_PARTIAL


if __name__ == "__main__":
    sys.exit(main())
