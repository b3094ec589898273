"""Score decompiled C against its source, per file pair and over a directory."""

from __future__ import annotations

import csv
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from statistics import fmean

from ..cparse import Source, function_definitions, function_name, is_broken, top_level_functions
from ..errors import EmptyText
from .codebleu import codebleu
from .completeness import function_completeness, syntactic_completeness
from .cyclomatic import ccn_similarity, function_complexities, node_complexity
from .similarity import bloat_rate_text, cosine_similarity
from .skeleton import skeleton
from .ted import aed_similarity

EVAL_SCHEMA = "watdecomp.eval/1"
COLUMNS = ("aed_s", "ccn_sim", "cosine", "codebleu", "bloat_rate", "c_at_syntax", "c_at_func")
DECOMP_SUFFIX = ".decomp"


@dataclass
class MetricReport:
    aed_s: float
    ccn_sim: float
    cosine: float
    codebleu: float
    bloat_rate: float
    c_at_syntax: float | None  # None: no function definitions to judge
    c_at_func: float

    def __post_init__(self):
        for k in COLUMNS:
            v = getattr(self, k)
            if v is None:
                continue
            hi = float("inf") if k == "bloat_rate" else 1.0
            if not 0.0 <= v <= hi:
                raise ValueError(f"{k}={v} out of range")


@dataclass
class FunctionRow:
    name: str
    present: bool
    aed_s: float
    ccn_sim: float
    cosine: float
    codebleu: float


@dataclass
class PairResult:
    stem: str
    source: str
    decompiled: str | None
    metrics: MetricReport
    functions: list[FunctionRow] = field(default_factory=list)
    extra_functions: list[str] = field(default_factory=list)
    codebleu_parse_failure: bool = False

    def record(self) -> dict:
        return {
            "schema": EVAL_SCHEMA,
            "kind": "pair",
            "stem": self.stem,
            "source": self.source,
            "decompiled": self.decompiled,
            **asdict(self.metrics),
            "extra_functions": self.extra_functions,
            "codebleu_parse_failure": self.codebleu_parse_failure,
            "functions": [asdict(f) for f in self.functions],
        }


def _cosine(a: str, b: str) -> float:
    try:
        return cosine_similarity(a, b)
    except EmptyText:
        return 0.0


def _valid_defs(text: str) -> dict[str, str]:
    src = Source(text)
    out: dict[str, str] = {}
    for d in function_definitions(src.root, nested=True):
        name = function_name(d)
        if name is not None and name not in out and not is_broken(d):
            out[name] = src.node_text(d)
    return out


def _function_rows(src_text: str, dec_text: str) -> list[FunctionRow]:
    src = Source(src_text)
    dec = _valid_defs(dec_text)
    rows = []
    for name, node in top_level_functions(src).items():
        s_text = src.node_text(node)
        d_text = dec.get(name)
        if d_text is None:
            rows.append(FunctionRow(name, False, 0.0, 0.0, 0.0, 0.0))
            continue
        d_node = function_definitions(Source(d_text).root, nested=False)[0]
        vs, vd = node_complexity(node), node_complexity(d_node)
        rows.append(FunctionRow(
            name,
            True,
            aed_similarity(skeleton(s_text), skeleton(d_text)),
            min(vs, vd) / max(vs, vd),
            _cosine(s_text, d_text),
            codebleu(s_text, d_text).score,
        ))
    return rows


def score_pair(src_text: str, dec_text: str | None, stem: str = "", source: str = "", decompiled: str | None = None) -> PairResult:
    """All columns for one file pair; ``dec_text`` None means the output is missing."""
    if dec_text is None:
        rows = [FunctionRow(n, False, 0.0, 0.0, 0.0, 0.0) for n in top_level_functions(Source(src_text))]
        absent = MetricReport(0.0, 0.0, 0.0, 0.0, 100.0, None, 0.0)
        return PairResult(stem, source, None, absent, rows)
    fc = function_completeness(src_text, dec_text)
    cb = codebleu(src_text, dec_text)
    report = MetricReport(
        aed_s=aed_similarity(skeleton(src_text), skeleton(dec_text)),
        ccn_sim=ccn_similarity(function_complexities(src_text), function_complexities(dec_text)),
        cosine=_cosine(src_text, dec_text),
        codebleu=cb.score,
        bloat_rate=bloat_rate_text(src_text, dec_text),
        c_at_syntax=syntactic_completeness(dec_text),
        c_at_func=fc.score,
    )
    return PairResult(stem, source, decompiled, report, _function_rows(src_text, dec_text), fc.extra, cb.parse_failure)


# --- directories -------------------------------------------------------------------


def _key(path: Path, root: Path) -> str:
    rel = path.relative_to(root).with_suffix("")
    name = rel.name[: -len(DECOMP_SUFFIX)] if rel.name.endswith(DECOMP_SUFFIX) else rel.name
    return str(rel.with_name(name))


def match_files(src_root: str | Path, dec_root: str | Path) -> list[tuple[str, Path, Path | None]]:
    """(key, source, decompiled-or-None) for every source ``.c``; ``x.decomp.c`` matches ``x.c``."""
    src_root, dec_root = Path(src_root), Path(dec_root)
    decs: dict[str, Path] = {}
    for p in sorted(dec_root.rglob("*.c")):
        k = _key(p, dec_root)
        # an exact x.c wins over x.decomp.c only if both exist; sorted order makes this stable
        decs.setdefault(k, p)
    out = []
    for p in sorted(src_root.rglob("*.c")):
        if p.name.endswith(DECOMP_SUFFIX + ".c"):
            continue
        k = _key(p, src_root)
        out.append((k, p, decs.get(k)))
    return out


def _score_files(job: tuple[str, str, str | None]) -> PairResult:
    key, src_path, dec_path = job
    src_text = Path(src_path).read_text(encoding="utf-8")
    dec_text = Path(dec_path).read_text(encoding="utf-8", errors="replace") if dec_path else None
    return score_pair(src_text, dec_text, key, src_path, dec_path)


def _mean(values) -> float | None:
    vals = [v for v in values if v is not None]
    return fmean(vals) if vals else None


@dataclass
class EvalReport:
    pairs: list[PairResult]

    def file_means(self) -> dict[str, float | None]:
        return {k: _mean(getattr(p.metrics, k) for p in self.pairs) for k in COLUMNS}

    def function_means(self) -> dict[str, float | None]:
        rows = [f for p in self.pairs for f in p.functions]
        out: dict[str, float | None] = {k: _mean(getattr(f, k) for f in rows) for k in ("aed_s", "ccn_sim", "cosine", "codebleu")}
        out["c_at_func"] = _mean(1.0 if f.present else 0.0 for f in rows)
        return out

    def aggregate_record(self) -> dict:
        return {
            "schema": EVAL_SCHEMA,
            "kind": "aggregate",
            "pairs": len(self.pairs),
            "functions": sum(len(p.functions) for p in self.pairs),
            "file_mean": self.file_means(),
            "function_mean": self.function_means(),
        }

    def table(self) -> str:
        head = ["file"] + list(COLUMNS)
        lines = ["\t".join(head)]

        def fmt(v):
            return "-" if v is None else f"{v:.4f}"

        for p in self.pairs:
            lines.append("\t".join([p.stem] + [fmt(getattr(p.metrics, k)) for k in COLUMNS]))
        fm = self.file_means()
        lines.append("\t".join(["mean(file)"] + [fmt(fm[k]) for k in COLUMNS]))
        gm = self.function_means()
        lines.append("\t".join(["mean(function)"] + [fmt(gm.get(k)) for k in COLUMNS]))
        return "\n".join(lines)

    def write(self, report_path: str | Path, figure: bool = True) -> list[Path]:
        """JSONL at ``report_path``; CSV and PNG beside it with the same stem."""
        report_path = Path(report_path)
        report_path.parent.mkdir(parents=True, exist_ok=True)
        with open(report_path, "w", encoding="utf-8") as fh:
            for p in self.pairs:
                fh.write(json.dumps(p.record(), sort_keys=True) + "\n")
            fh.write(json.dumps(self.aggregate_record(), sort_keys=True) + "\n")
        csv_path = report_path.with_suffix(".csv")
        with open(csv_path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["file", *COLUMNS])
            for p in self.pairs:
                w.writerow([p.stem] + ["" if getattr(p.metrics, k) is None else round(getattr(p.metrics, k), 6) for k in COLUMNS])
        written = [report_path, csv_path]
        if figure and self.pairs:
            from ..plotting import metric_bars

            written.append(metric_bars(self.file_means(), self.function_means(), report_path.with_suffix(".png"), "evaluation means"))
        return written


def evaluate_dirs(src_root: str | Path, dec_root: str | Path, workers: int = 1) -> EvalReport:
    jobs = [(k, str(s), str(d) if d else None) for k, s, d in match_files(src_root, dec_root)]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            pairs = list(pool.map(_score_files, jobs))
    else:
        pairs = [_score_files(j) for j in jobs]
    return EvalReport(pairs)
