"""Figure rendering for the report paths.

Every CLI command that emits delimited curve data also renders a PNG next to
it; these helpers own the matplotlib side. The Agg backend is forced so runs
are headless and deterministic.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .metrics import MetricReport, OpenSetCurve, RocPoint  # noqa: E402

_PNG_META = {"Software": "biomeval"}


def plot_roc_curves(curves: dict[str, list[RocPoint]], path: str | Path, title: str) -> None:
    """Overlay per-sub-protocol ROC curves, FMR on a log axis."""
    fig, ax = plt.subplots(figsize=(6.4, 4.8))
    for label in sorted(curves):
        pts = [p for p in curves[label] if p.fmr > 0.0]
        if not pts:
            continue
        ax.plot([p.fmr for p in pts], [p.fnmr for p in pts], label=label or "(all)")
    ax.set_xscale("log")
    ax.set_xlabel("FMR")
    ax.set_ylabel("FNMR")
    ax.set_ylim(0.0, 1.0)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(loc="best", fontsize=8)
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150, metadata=_PNG_META)
    plt.close(fig)


def plot_openset_curve(curve: OpenSetCurve, path: str | Path, title: str) -> None:
    """TPIR over FPIR at rank 1; the right-hand end (FPIR=1) is the closed-set rate."""
    fig, ax = plt.subplots(figsize=(6.4, 4.8))
    pts = [p for p in curve.points if p.fpir > 0.0]
    ax.plot([p.fpir for p in pts], [p.tpir for p in pts], marker=".", markersize=3)
    ax.set_xscale("log")
    ax.set_xlabel("FPIR")
    ax.set_ylabel("TPIR (rank 1)")
    ax.set_ylim(0.0, 1.05)
    ax.grid(True, which="both", alpha=0.3)
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150, metadata=_PNG_META)
    plt.close(fig)


def plot_rate_bars(report: MetricReport, path: str | Path, title: str) -> None:
    """Per-sub-protocol FMR/FNMR bars (in percent) at the report's thresholds."""
    labels = sorted(report.per_sub_protocol)
    fmr = [100.0 * (report.per_sub_protocol[l].fmr or 0.0) for l in labels]
    fnmr = [100.0 * (report.per_sub_protocol[l].fnmr or 0.0) for l in labels]
    x = range(len(labels))
    width = 0.38
    fig, ax = plt.subplots(figsize=(max(6.4, 1.0 + 0.9 * len(labels)), 4.8))
    ax.bar([i - width / 2 for i in x], fmr, width, label="FMR %")
    ax.bar([i + width / 2 for i in x], fnmr, width, label="FNMR %")
    if report.policy is not None and report.policy.fmr_target is not None:
        ax.axhline(100.0 * report.policy.fmr_target, linestyle="--", linewidth=1.0,
                   color="gray", label="FMR target %")
    ax.set_xticks(list(x))
    ax.set_xticklabels([l or "(all)" for l in labels], rotation=30, ha="right", fontsize=8)
    ax.set_ylabel("error rate (%)")
    ax.grid(True, axis="y", alpha=0.3)
    ax.legend(fontsize=8)
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150, metadata=_PNG_META)
    plt.close(fig)


def plot_comparison_bars(
    rows: list[dict], path: str | Path, title: str, metric: str = "fnmr"
) -> None:
    """Grouped per-label bars comparing several evaluation reports.

    ``rows`` carry {"name": str, "per_label": {label: rate-or-None}} entries.
    """
    labels = sorted({label for row in rows for label in row["per_label"]})
    width = 0.8 / max(1, len(rows))
    fig, ax = plt.subplots(figsize=(max(6.4, 1.0 + 1.2 * len(labels)), 4.8))
    for k, row in enumerate(rows):
        values = [100.0 * (row["per_label"].get(l) or 0.0) for l in labels]
        offsets = [i + (k - (len(rows) - 1) / 2) * width for i in range(len(labels))]
        ax.bar(offsets, values, width, label=row["name"])
    ax.set_xticks(range(len(labels)))
    ax.set_xticklabels([l or "(all)" for l in labels], rotation=30, ha="right", fontsize=8)
    ax.set_ylabel(f"eval {metric.upper()} (%)")
    ax.grid(True, axis="y", alpha=0.3)
    ax.legend(fontsize=8)
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150, metadata=_PNG_META)
    plt.close(fig)
