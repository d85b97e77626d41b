"""Chart-data emission and matplotlib figure rendering for evaluation runs.

Every chart is written twice: as delimited text (roc.csv, detection.csv,
lift.csv) and as a PNG rendered next to it.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .metrics import EvalCurves

__all__ = ["write_curves", "render_curves", "write_metrics_report",
           "render_sweep"]


def write_curves(curves: EvalCurves, out_dir: Path):
    out_dir = Path(out_dir)
    with open(out_dir / "roc.csv", "w") as f:
        f.write("fpr,tpr\n")
        for x, y in curves.roc:
            f.write(f"{x!r},{y!r}\n")
    with open(out_dir / "detection.csv", "w") as f:
        f.write("percent,rate\n")
        for p in sorted(curves.detection_rates):
            f.write(f"{p!r},{curves.detection_rates[p]!r}\n")
    with open(out_dir / "lift.csv", "w") as f:
        f.write("percent,lift\n")
        for p in sorted(curves.lifts):
            f.write(f"{p!r},{curves.lifts[p]!r}\n")


def render_curves(curves: EvalCurves, out_dir: Path):
    out_dir = Path(out_dir)

    fig, ax = plt.subplots(figsize=(5, 4))
    ax.plot([x for x, _ in curves.roc], [y for _, y in curves.roc],
            marker=".", lw=1.2)
    ax.plot([0, 1], [0, 1], ls="--", c="gray", lw=0.8)
    ax.set_xlabel("False positive rate")
    ax.set_ylabel("True positive rate")
    ax.set_title(f"ROC (AUC = {curves.auc:.3f})")
    fig.tight_layout()
    fig.savefig(out_dir / "roc.png", dpi=120)
    plt.close(fig)

    for name, mapping, ylabel in (
        ("detection", curves.detection_rates, "Detection rate"),
        ("lift", curves.lifts, "Lift"),
    ):
        ps = sorted(mapping)
        fig, ax = plt.subplots(figsize=(5, 4))
        ax.plot(ps, [mapping[p] for p in ps], marker="o")
        ax.set_xlabel("Top % of predictions")
        ax.set_ylabel(ylabel)
        fig.tight_layout()
        fig.savefig(out_dir / f"{name}.png", dpi=120)
        plt.close(fig)


def write_metrics_report(curves: EvalCurves, path: Path, model_kind: str):
    """Plain-text metrics summary; deterministic for a fixed run."""
    lines = [f"model: {model_kind}", f"auc: {curves.auc!r}", ""]
    lines.append("top_percent,detection_rate,lift")
    for p in sorted(curves.detection_rates):
        lines.append(
            f"{p!r},{curves.detection_rates[p]!r},{curves.lifts[p]!r}"
        )
    Path(path).write_text("\n".join(lines) + "\n")


def render_sweep(rows: list[tuple[float, float, float]], path: Path,
                 value_label: str):
    """Two-axis sweep figure: AUC and training seconds vs the swept value."""
    values = [r[0] for r in rows]
    aucs = [r[1] for r in rows]
    secs = [r[2] for r in rows]
    fig, ax1 = plt.subplots(figsize=(5.5, 4))
    ax1.plot(values, aucs, marker="o", color="tab:blue", label="test AUC")
    ax1.set_xlabel(value_label)
    ax1.set_ylabel("Test AUC", color="tab:blue")
    ax2 = ax1.twinx()
    ax2.plot(values, secs, marker="s", color="tab:red", label="train seconds")
    ax2.set_ylabel("Training seconds", color="tab:red")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
