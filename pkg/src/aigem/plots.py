"""Figure rendering. Every plot is a pure function of an on-disk artifact
(curves CSV, ablation CSV, or evaluation report JSON), never of in-memory
state, so figures can be regenerated from cached runs alone.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from aigem.ablation import load_ablation_csv
from aigem.evaluation import BUCKETS, load_report_json
from aigem.training import load_curves_csv


def plot_curves(curves_csv: str, out_path: str) -> None:
    """Training and validation RMSE per epoch."""
    curves = load_curves_csv(curves_csv)
    epochs = [c.epoch for c in curves]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(epochs, [c.train_rmse for c in curves], label="train")
    ax.plot(epochs, [c.val_rmse for c in curves], label="validation")
    ax.set_xlabel("epoch")
    ax.set_ylabel("RMSE (m)")
    ax.set_title("Training curves")
    ax.legend()
    fig.tight_layout()
    fig.savefig(out_path, dpi=120)
    plt.close(fig)


def plot_ablation(table_csv: str, out_path: str) -> None:
    """Grouped bars: RMSE per horizon second, one group color per variant."""
    table = load_ablation_csv(table_csv)
    seconds = [s for s, _ in table.rows[0].rmse_seconds]
    n_rows = len(table.rows)
    width = 0.8 / max(n_rows, 1)
    fig, ax = plt.subplots(figsize=(6, 4))
    for i, row in enumerate(table.rows):
        xs = [s + (i - (n_rows - 1) / 2) * width for s in seconds]
        ax.bar(xs, [r for _, r in row.rmse_seconds], width=width, label=row.label)
    ax.set_xticks(seconds)
    ax.set_xlabel("horizon (s)")
    ax.set_ylabel("RMSE (m)")
    ax.set_title(f"Ablation: {table.name}")
    ax.legend(title=table.name)
    fig.tight_layout()
    fig.savefig(out_path, dpi=120)
    plt.close(fig)


def plot_buckets(report_json: str, out_path: str) -> None:
    """ADE and FDE per longitudinal position bucket."""
    report = load_report_json(report_json)
    names = [b for b in BUCKETS if b in report.buckets]
    if not names:
        names = []
    xs = range(len(names))
    width = 0.35
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.bar(
        [x - width / 2 for x in xs],
        [report.buckets[n].ade for n in names],
        width=width,
        label="ADE",
    )
    ax.bar(
        [x + width / 2 for x in xs],
        [report.buckets[n].fde for n in names],
        width=width,
        label="FDE",
    )
    ax.set_xticks(list(xs))
    ax.set_xticklabels(
        [f"{n} (n={report.buckets[n].n_actors})" for n in names]
    )
    ax.set_ylabel("error (m)")
    ax.set_title("Error by actor position relative to ego")
    ax.legend()
    fig.tight_layout()
    fig.savefig(out_path, dpi=120)
    plt.close(fig)
