"""Render result CSVs into figures.

Consumes only the public result-CSV schema:
experiment,scheme,constraint,N,N_F,topology,gamma0_db,metric,value,stderr,trials,seed
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

REQUIRED_COLUMNS = ("experiment", "scheme", "constraint", "N", "N_F",
                    "topology", "gamma0_db", "metric", "value", "stderr",
                    "trials", "seed")
KINDS = ("rate_sweep", "outage", "convergence")


class ValidationError(ValueError):
    """Input CSV cannot be rendered as requested."""


class SchemaError(ValidationError):
    """Input CSV is missing required columns."""


@dataclass
class FigureSpec:
    inputs: tuple[str, ...]
    kind: str
    out_path: str
    xlabel: str = ""
    ylabel: str = ""
    log_y: bool | None = None  # default: log for outage, linear otherwise
    title: str = ""
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if isinstance(self.inputs, str):
            self.inputs = (self.inputs,)
        if self.kind not in KINDS:
            raise ValidationError(
                f"unknown figure kind {self.kind!r}; expected one of {KINDS}")
        if not self.inputs:
            raise ValidationError("at least one input CSV is required")


def load_rows(path: str) -> list[dict]:
    """Read one result CSV, enforcing the schema."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in REQUIRED_COLUMNS if c not in header]
        if missing:
            raise SchemaError(
                f"{path}: missing required columns: {', '.join(missing)}")
        rows = list(reader)
    if not rows:
        raise ValidationError(f"{path}: CSV contains no data rows")
    for row in rows:
        row["gamma0_db"] = float(row["gamma0_db"])
        row["value"] = float(row["value"])
        row["stderr"] = float(row["stderr"])
    return rows


def _series_by_scheme(rows, x_key):
    series: dict[str, list] = {}
    for row in rows:
        series.setdefault(row["scheme"], []).append(
            (row[x_key], row["value"], row["stderr"]))
    for points in series.values():
        points.sort(key=lambda p: p[0])
    return series


def _iteration_index(metric: str) -> int:
    prefix = "rate_iter_"
    if not metric.startswith(prefix):
        raise ValidationError(
            f"convergence figures need rate_iter_NN metrics, got {metric!r}")
    return int(metric[len(prefix):])


def _check_convergence_monotone(series) -> None:
    # re-assert the primary suite's property: per scheme the trace is
    # non-decreasing within 2 std.err of the neighbouring estimates
    for scheme, points in series.items():
        for (_, v0, s0), (_, v1, s1) in zip(points, points[1:]):
            if v1 < v0 - 2.0 * (s0 + s1):
                raise ValidationError(
                    f"convergence trace for {scheme} decreases beyond "
                    f"2 std.err ({v0:.6g} -> {v1:.6g})")


def render(spec: FigureSpec) -> str:
    """Render one figure; returns the output path."""
    rows = [row for path in spec.inputs for row in load_rows(path)]

    if spec.kind == "convergence":
        for row in rows:
            row["iteration"] = _iteration_index(row["metric"])
        series = _series_by_scheme(rows, "iteration")
        _check_convergence_monotone(series)
        default_x, default_y = "iteration", "mean rate (bit/s/Hz)"
    elif spec.kind == "outage":
        series = _series_by_scheme(rows, "gamma0_db")
        default_x, default_y = "reference SNR (dB)", "outage probability"
    else:
        series = _series_by_scheme(rows, "gamma0_db")
        default_x, default_y = "reference SNR (dB)", "mean rate (bit/s/Hz)"

    log_y = spec.log_y if spec.log_y is not None else spec.kind == "outage"
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for scheme in sorted(series):
        xs, ys, es = zip(*series[scheme])
        ax.errorbar(xs, ys, yerr=es, marker="o", capsize=3, label=scheme)
    if log_y:
        ax.set_yscale("log")
    ax.set_xlabel(spec.xlabel or default_x)
    ax.set_ylabel(spec.ylabel or default_y)
    if spec.title:
        ax.set_title(spec.title)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(spec.out_path, dpi=150)
    plt.close(fig)
    return spec.out_path
