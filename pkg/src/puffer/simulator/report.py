"""Aggregate run metrics into a per-access-path table (CSV + text).

Statistics are order-free (means and normal-approximation 95% intervals), so
permuting the run list never changes the output.
"""

from __future__ import annotations

import csv
import io
import math
from statistics import mean, stdev

from .runner import RunMetrics

CSV_COLUMNS = [
    "access_path",
    "runs",
    "mean_time_to_activation_s",
    "ci95_time_to_activation_s",
    "activation_rate",
    "tagged_before_activation_rate",
    "mean_alerts_raised",
    "mean_suggestions_sent",
    "mean_suggestions_delivered",
    "mean_suggestions_accepted",
    "mean_suggestions_blocked",
    "mean_cooldowns",
    "mean_violations",
]


def _ci95(values: list[float]) -> float:
    if len(values) < 2:
        return 0.0
    return 1.96 * stdev(values) / math.sqrt(len(values))


def aggregate(runs: list[RunMetrics]) -> list[dict]:
    """One row per access path, sorted by path name."""
    if not runs:
        raise ValueError("need at least one run")
    by_path: dict[str, list[RunMetrics]] = {}
    for run in runs:
        by_path.setdefault(run.access_path, []).append(run)
    rows = []
    for path in sorted(by_path):
        group = by_path[path]
        activations = [m.time_to_activation_s for m in group
                       if m.time_to_activation_s is not None]
        rows.append({
            "access_path": path,
            "runs": len(group),
            "mean_time_to_activation_s": mean(activations) if activations else None,
            "ci95_time_to_activation_s": _ci95(activations),
            "activation_rate": sum(1 for m in group
                                   if m.time_to_activation_s is not None) / len(group),
            "tagged_before_activation_rate": sum(
                1 for m in group if m.tagged_before_activation) / len(group),
            "mean_alerts_raised": mean(m.alerts_raised for m in group),
            "mean_suggestions_sent": mean(m.suggestions_sent for m in group),
            "mean_suggestions_delivered": mean(m.suggestions_delivered for m in group),
            "mean_suggestions_accepted": mean(m.suggestions_accepted for m in group),
            "mean_suggestions_blocked": mean(m.suggestions_blocked for m in group),
            "mean_cooldowns": mean(m.cooldowns for m in group),
            "mean_violations": mean(m.violations for m in group),
        })
    return rows


def write_csv(rows: list[dict], path: str | None = None) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row)
    text = buf.getvalue()
    if path is not None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text


def summarize(rows: list[dict]) -> str:
    lines = []
    for row in rows:
        t = row["mean_time_to_activation_s"]
        t_txt = f"{t:.2f}s +/- {row['ci95_time_to_activation_s']:.2f}" if t is not None else "never"
        lines.append(
            f"{row['access_path']:>12}: {row['runs']} runs, "
            f"activation {t_txt}, "
            f"tagged-first rate {row['tagged_before_activation_rate']:.2f}, "
            f"alerts {row['mean_alerts_raised']:.1f}, "
            f"suggestions sent {row['mean_suggestions_sent']:.1f} "
            f"(delivered {row['mean_suggestions_delivered']:.1f}, "
            f"cooldowns {row['mean_cooldowns']:.1f}), "
            f"violations {row['mean_violations']:.1f}"
        )
    return "\n".join(lines)
