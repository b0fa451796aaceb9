"""Calibrated Lagrange multipliers and their CSV round trip."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import ShapeError, UsageError

KIND_PER_NODE_PER_SUBCARRIER = "per_node_per_subcarrier"
KIND_PER_SUBCARRIER = "per_subcarrier"
KIND_GLOBAL = "global"

_KINDS = (KIND_PER_NODE_PER_SUBCARRIER, KIND_PER_SUBCARRIER, KIND_GLOBAL)

CSV_HEADER = ["role", "kind", "node", "subcarrier", "iteration", "value",
              "constraint", "training_seed", "samples"]


@dataclass
class CalibratedMultipliers:
    """Fitted multipliers, reusable across evaluation realizations.

    ``values`` is (N, F) for per-node-per-subcarrier, (F,) for
    per-subcarrier, and a 0-d array for global multipliers.
    """

    kind: str
    values: np.ndarray
    constraint: str
    training_seed: int = 0
    samples: int = 0
    role: str = ""          # which solver produced it, e.g. "beta" / "mu"
    iteration: int = 0

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise UsageError(f"unknown multiplier kind {self.kind!r}")
        self.values = np.asarray(self.values, dtype=float)
        expected_ndim = {KIND_PER_NODE_PER_SUBCARRIER: 2,
                         KIND_PER_SUBCARRIER: 1, KIND_GLOBAL: 0}[self.kind]
        if self.values.ndim != expected_ndim:
            raise ShapeError(
                f"{self.kind} multipliers must be {expected_ndim}-D, "
                f"got shape {self.values.shape}")
        if np.any(self.values <= 0) or not np.all(np.isfinite(self.values)):
            raise UsageError("multiplier values must be finite and > 0")

    def require(self, kind: str, constraint: str) -> None:
        if self.kind != kind:
            raise UsageError(
                f"expected {kind} multipliers for {constraint}, got {self.kind}")
        if self.constraint != constraint:
            raise UsageError(
                f"multipliers were calibrated for {self.constraint}, "
                f"not {constraint}")


def write_multipliers_csv(path: str, mults: list[CalibratedMultipliers]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for m in mults:
            vals = np.atleast_2d(m.values) if m.kind != KIND_GLOBAL else None
            if m.kind == KIND_GLOBAL:
                writer.writerow([m.role, m.kind, "", "", m.iteration,
                                 f"{float(m.values):.17g}", m.constraint,
                                 m.training_seed, m.samples])
            elif m.kind == KIND_PER_SUBCARRIER:
                for i, v in enumerate(m.values):
                    writer.writerow([m.role, m.kind, "", i, m.iteration,
                                     f"{v:.17g}", m.constraint,
                                     m.training_seed, m.samples])
            else:
                for k in range(vals.shape[0]):
                    for i in range(vals.shape[1]):
                        writer.writerow([m.role, m.kind, k, i, m.iteration,
                                         f"{vals[k, i]:.17g}", m.constraint,
                                         m.training_seed, m.samples])


def read_multipliers_csv(path: str) -> list[CalibratedMultipliers]:
    groups: dict[tuple, list] = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(CSV_HEADER) - set(reader.fieldnames or ())
        if missing:
            raise ShapeError(f"multiplier CSV missing columns: {sorted(missing)}")
        for row in reader:
            key = (row["role"], row["kind"], int(row["iteration"]),
                   row["constraint"], int(row["training_seed"]),
                   int(row["samples"]))
            node = int(row["node"]) if row["node"] != "" else -1
            sub = int(row["subcarrier"]) if row["subcarrier"] != "" else -1
            groups.setdefault(key, []).append((node, sub, float(row["value"])))
    out = []
    for (role, kind, iteration, constraint, seed, samples), entries in groups.items():
        if kind == KIND_GLOBAL:
            values = np.asarray(entries[0][2])
        elif kind == KIND_PER_SUBCARRIER:
            f = max(e[1] for e in entries) + 1
            values = np.empty(f)
            for _, i, v in entries:
                values[i] = v
        else:
            n = max(e[0] for e in entries) + 1
            f = max(e[1] for e in entries) + 1
            values = np.empty((n, f))
            for k, i, v in entries:
                values[k, i] = v
        out.append(CalibratedMultipliers(kind=kind, values=values,
                                         constraint=constraint,
                                         training_seed=seed, samples=samples,
                                         role=role, iteration=iteration))
    return out
