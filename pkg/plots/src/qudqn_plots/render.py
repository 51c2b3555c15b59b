"""Render benchmark figures from metric CSVs, with machine-checkable sidecars.

Every image gets a `<image>.json` sidecar embedding the exact aggregates
that were plotted, so correctness is testable without diffing pixels. The
renderer never modifies its inputs and produces byte-identical images for
identical inputs (fixed style, no timestamps).
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

KINDS = ("resolved_bar", "qubit_bar", "channel_bar", "throughput_line", "training_curve")

# value column per figure kind; axis labels derive from the column names
_BAR_VALUE = {
    "resolved_bar": "resolved",
    "qubit_bar": "qubits_used",
    "channel_bar": "channels_used",
}


class SchemaError(ValueError):
    """Input CSV does not satisfy the expected header contract."""


class EmptyInputError(ValueError):
    """Input CSV carries a header but no data rows."""


@dataclass(frozen=True)
class FigureSpec:
    csv_paths: tuple[str, ...]
    kind: str
    out_path: str
    group_column: str = "policy"
    x_column: str = "scenario"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SchemaError(f"unknown figure kind {self.kind!r}; expected one of {KINDS}")
        if not self.csv_paths:
            raise SchemaError("at least one input CSV is required")


def read_rows(paths, required: tuple[str, ...]) -> list[dict]:
    rows: list[dict] = []
    for path in paths:
        with open(path, newline="") as handle:
            reader = csv.DictReader(handle)
            header = reader.fieldnames or []
            for column in required:
                if column not in header:
                    raise SchemaError(f"{path} is missing required column {column!r}")
            rows.extend(reader)
    if not rows:
        raise EmptyInputError(f"no data rows in {', '.join(paths)}")
    return rows


def _mean(values: list[float]) -> float:
    return math.fsum(values) / len(values)


def _grouped_means(rows, x_col, group_col, value) -> tuple[list[str], list[str], dict]:
    """Means per (group, x category); category order follows first appearance."""
    xs: list[str] = []
    groups: list[str] = []
    buckets: dict[tuple[str, str], list[float]] = {}
    for row in rows:
        x, g = row[x_col], row[group_col]
        if x not in xs:
            xs.append(x)
        if g not in groups:
            groups.append(g)
        buckets.setdefault((g, x), []).append(float(row[value]))
    means = {g: {x: _mean(buckets[(g, x)]) for x in xs if (g, x) in buckets}
             for g in groups}
    return xs, groups, means


def _new_figure():
    return plt.subplots(figsize=(8.0, 4.5), dpi=120)


def _save(fig, out_path: str | Path) -> None:
    fig.savefig(out_path, format="png", metadata={"Software": None})
    plt.close(fig)


def _render_grouped_bars(rows, spec: FigureSpec, value: str) -> dict:
    xs, groups, means = _grouped_means(rows, spec.x_column, spec.group_column, value)
    fig, ax = _new_figure()
    width = 0.8 / len(groups)
    for gi, group in enumerate(groups):
        offsets = [i + gi * width for i in range(len(xs))]
        heights = [means[group].get(x, 0.0) for x in xs]
        ax.bar(offsets, heights, width=width, label=group)
    ax.set_xticks([i + 0.4 - width / 2 for i in range(len(xs))])
    ax.set_xticklabels(xs, rotation=20, ha="right")
    ax.set_xlabel(spec.x_column)
    ax.set_ylabel(f"mean {value}")
    ax.legend(title=spec.group_column)
    fig.tight_layout()
    _save(fig, spec.out_path)
    return {"value_column": value, "aggregates": means}


def _render_throughput_line(rows, spec: FigureSpec) -> dict:
    for row in rows:
        row["_ratio"] = float(row["resolved"]) / float(row["total_requests"])
    xs, groups, means = _grouped_means(rows, spec.x_column, spec.group_column, "_ratio")
    fig, ax = _new_figure()
    for group in groups:
        ax.plot(range(len(xs)), [means[group].get(x, 0.0) for x in xs],
                marker="o", label=group)
    ax.set_xticks(range(len(xs)))
    ax.set_xticklabels(xs, rotation=20, ha="right")
    ax.set_xlabel(spec.x_column)
    ax.set_ylabel("resolved / total requests")
    ax.set_ylim(0.0, 1.05)
    ax.legend(title=spec.group_column)
    fig.tight_layout()
    _save(fig, spec.out_path)
    return {"value_column": "resolved/total_requests", "aggregates": means}


def _render_training_curve(rows, spec: FigureSpec) -> dict:
    episodes = [int(row["episode"]) for row in rows]
    returns = [float(row["return"]) for row in rows]
    fig, ax = _new_figure()
    ax.plot(episodes, returns, linewidth=0.8, label="return")
    window = max(1, len(returns) // 50)
    if window > 1:
        smoothed = [_mean(returns[max(0, i - window + 1): i + 1]) for i in range(len(returns))]
        ax.plot(episodes, smoothed, linewidth=1.6, label=f"mean over {window}")
    ax.set_xlabel("episode")
    ax.set_ylabel("return")
    ax.legend()
    fig.tight_layout()
    _save(fig, spec.out_path)
    return {"value_column": "return",
            "series": {"episode": episodes, "return": returns}}


def render(spec: FigureSpec) -> Path:
    """Render one figure plus its sidecar JSON; returns the image path."""
    if spec.kind in _BAR_VALUE:
        value = _BAR_VALUE[spec.kind]
        rows = read_rows(spec.csv_paths, (spec.x_column, spec.group_column, value))
        payload = _render_grouped_bars(rows, spec, value)
    elif spec.kind == "throughput_line":
        rows = read_rows(spec.csv_paths,
                         (spec.x_column, spec.group_column, "resolved", "total_requests"))
        payload = _render_throughput_line(rows, spec)
    else:
        rows = read_rows(spec.csv_paths, ("episode", "return"))
        payload = _render_training_curve(rows, spec)
    sidecar = {
        "kind": spec.kind,
        "inputs": list(spec.csv_paths),
        "x_column": spec.x_column,
        "group_column": spec.group_column,
        **payload,
    }
    out = Path(spec.out_path)
    out.with_suffix(out.suffix + ".json").write_text(
        json.dumps(sidecar, indent=2, sort_keys=True) + "\n")
    return out
