"""Report figures. Uses the non-interactive Agg backend; never opens a window."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

# Software/date metadata would make reruns differ byte-wise.
_PNG_META = {"Software": None}


def _finish(fig, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata=_PNG_META)
    plt.close(fig)
    return path


def metric_bars(file_means: dict[str, float | None], function_means: dict[str, float | None], path, title="") -> Path:
    """Grouped bars of the [0, 1] similarity columns; bloat goes in its own panel."""
    sims = [k for k in file_means if k != "bloat_rate"]
    fig, (ax, ax2) = plt.subplots(1, 2, figsize=(9, 3.6), gridspec_kw={"width_ratios": [5, 1]})
    xs = range(len(sims))
    w = 0.38
    ax.bar([x - w / 2 for x in xs], [file_means[k] or 0.0 for k in sims], w, label="file mean", color="#4c72b0")
    ax.bar([x + w / 2 for x in xs], [function_means.get(k) or 0.0 for k in sims], w, label="function mean", color="#dd8452")
    ax.set_xticks(list(xs))
    ax.set_xticklabels(sims, rotation=30, ha="right")
    ax.set_ylim(0, 1.05)
    ax.set_ylabel("score")
    ax.legend(frameon=False, fontsize=8, loc="lower left")
    ax.spines[["top", "right"]].set_visible(False)
    ax2.bar([0], [file_means.get("bloat_rate") or 0.0], 0.6, color="#55a868")
    ax2.set_xticks([0])
    ax2.set_xticklabels(["bloat %"])
    ax2.spines[["top", "right"]].set_visible(False)
    if title:
        fig.suptitle(title, fontsize=10)
    return _finish(fig, path)


def chain_bars(rates: dict[str, float], path, title="") -> Path:
    """Recompiled / re-executed / consistent percentages as three bars."""
    fig, ax = plt.subplots(figsize=(4.2, 3.2))
    names = list(rates)
    ax.bar(names, [rates[n] for n in names], color=["#4c72b0", "#dd8452", "#55a868"][: len(names)])
    for i, n in enumerate(names):
        ax.text(i, rates[n] + 1, f"{rates[n]:.1f}%", ha="center", fontsize=8)
    ax.set_ylim(0, 110)
    ax.set_ylabel("% of programs")
    ax.spines[["top", "right"]].set_visible(False)
    if title:
        ax.set_title(title, fontsize=10)
    return _finish(fig, path)
