"""Learning-curve figures from metrics CSVs.

Reads one or more metrics.csv files (one per run), groups them by
(task, method), draws each seed as a faint trace plus a bold per-group mean,
and writes SVG. The SVG writer is pinned (fixed hash salt, no Date metadata)
so the same inputs produce byte-identical files, which makes plots diffable
in review and testable by hash.
"""
from __future__ import annotations

import csv

import matplotlib

matplotlib.use("Agg")

from matplotlib import pyplot as plt  # noqa: E402

from .errors import DataFormatError, UsageError  # noqa: E402

SVG_HASH_SALT = "imitation-lab"

_NUMERIC = ("step", "wall_clock_s", "eval_return_mean", "disc_train_mean",
            "disc_holdout_mean", "constraint_accuracy", "stop_step_mean")


def read_metrics(path):
    """Rows of a metrics CSV with numeric fields parsed (blank -> None).

    Malformed files fail with the offending line number in the message.
    """
    rows = []
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames is None or "step" not in reader.fieldnames:
            raise DataFormatError(f"{path}: not a metrics CSV (no step column)")
        for lineno, raw in enumerate(reader, start=2):
            row = dict(raw)
            for key in _NUMERIC:
                val = raw.get(key, "")
                if val is None or val == "":
                    row[key] = None
                    continue
                try:
                    row[key] = float(val)
                except ValueError:
                    raise DataFormatError(
                        f"{path}:{lineno}: bad value {val!r} for {key}") from None
            if row["step"] is None:
                raise DataFormatError(f"{path}:{lineno}: missing step")
            row["step"] = int(row["step"])
            rows.append(row)
    if not rows:
        raise DataFormatError(f"{path}: metrics CSV has no data rows")
    return rows


def _series(rows, column):
    return [(r["step"], r[column]) for r in rows if r[column] is not None]


def learning_curves(csv_paths, column="eval_return_mean", title=None,
                    reference=None):
    """Figure with per-seed traces and per-(task, method) means.

    reference: optional horizontal line (e.g. the expert's mean return).
    """
    if not csv_paths:
        raise UsageError("no metrics files given")
    groups = {}  # (task, method) -> {seed_label: [(step, value)]}
    for path in csv_paths:
        rows = read_metrics(path)
        series = _series(rows, column)
        if not series:
            raise DataFormatError(f"{path}: column {column!r} has no values")
        key = (rows[0].get("task", "?"), rows[0].get("method", "?"))
        seed = rows[0].get("seed", str(len(groups.get(key, {}))))
        groups.setdefault(key, {})[f"{seed}:{path}"] = series

    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    colors = plt.rcParams["axes.prop_cycle"].by_key()["color"]
    for i, key in enumerate(sorted(groups)):
        color = colors[i % len(colors)]
        seeds = groups[key]
        for series in seeds.values():
            xs, ys = zip(*series)
            ax.plot(xs, ys, color=color, alpha=0.3, linewidth=1.0)
        # bold mean over seeds, at steps present in every seed
        common = sorted(set.intersection(*(set(x for x, _ in s)
                                           for s in seeds.values())))
        if common:
            by_step = []
            for step in common:
                vals = [dict(s)[step] for s in seeds.values()]
                by_step.append(sum(vals) / len(vals))
            ax.plot(common, by_step, color=color, linewidth=2.2,
                    label=f"{key[0]} / {key[1]}")
    if reference is not None:
        ax.axhline(reference, color="0.4", linestyle="--", linewidth=1.0,
                   label="expert")
    ax.set_xlabel("learner steps")
    ax.set_ylabel(column)
    if title:
        ax.set_title(title)
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    return fig


def save_figure(fig, out_path):
    """Write SVG with pinned ids and no timestamp, so bytes are reproducible."""
    if not str(out_path).endswith(".svg"):
        raise UsageError(f"plots are written as SVG, got {out_path!r}")
    with plt.rc_context({"svg.hashsalt": SVG_HASH_SALT}):
        fig.savefig(out_path, format="svg", metadata={"Date": None})


def plot_runs(csv_paths, out_path, column="eval_return_mean", title=None,
              reference=None):
    fig = learning_curves(csv_paths, column=column, title=title,
                          reference=reference)
    try:
        save_figure(fig, out_path)
    finally:
        plt.close(fig)
    return out_path
