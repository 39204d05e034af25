"""Verification report files: a CSV table plus rendered figures."""

from __future__ import annotations

import csv
from pathlib import Path

FIELDS = ("file", "status", "g_type", "g_steps", "encoded_type_ok",
          "cdot_steps", "correspond", "note")


def write_report(rows: list[dict], report_dir: str) -> list[str]:
    """Write results.csv and summary figures; returns the paths written."""
    out = Path(report_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    csv_path = out / "results.csv"
    with csv_path.open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=FIELDS)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: row.get(k, "") for k in FIELDS})
    written.append(str(csv_path))

    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    finished = [r for r in rows
                if isinstance(r.get("g_steps"), int)
                and isinstance(r.get("cdot_steps"), int)]
    fig, ax = plt.subplots(figsize=(6.4, 4.8))
    if finished:
        xs = [max(r["g_steps"], 1) for r in finished]
        ys = [max(r["cdot_steps"], 1) for r in finished]
        ax.scatter(xs, ys, alpha=0.7)
        lim = max(max(xs), max(ys)) * 1.5
        ax.plot([1, lim], [1, lim], linestyle=":", linewidth=1)
        ax.set_xscale("log")
        ax.set_yscale("log")
    ax.set_xlabel("source-language steps")
    ax.set_ylabel("object-calculus steps")
    ax.set_title("Evaluation cost before and after translation")
    fig.tight_layout()
    scatter_path = out / "steps_scatter.png"
    fig.savefig(scatter_path, dpi=120)
    plt.close(fig)
    written.append(str(scatter_path))

    fig, ax = plt.subplots(figsize=(6.4, 4.8))
    counts: dict[str, int] = {}
    for r in rows:
        counts[r["status"]] = counts.get(r["status"], 0) + 1
    labels = sorted(counts)
    ax.bar(labels, [counts[k] for k in labels])
    ax.set_ylabel("files")
    ax.set_title("Verification outcomes")
    fig.tight_layout()
    status_path = out / "outcomes.png"
    fig.savefig(status_path, dpi=120)
    plt.close(fig)
    written.append(str(status_path))
    return written
