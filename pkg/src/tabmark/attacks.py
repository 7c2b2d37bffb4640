"""Adversary simulation: insertion, deletion, alteration and combined attacks.

Every attack is reproducible from its seed. Fractions are relative to the
input row count; insertion fractions may exceed 1. Alterations target the
given feature list (the sweep defaults this to the key's candidate features,
the attacker's best guess at the watermark carriers).
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .decoder import DecoderParams, decode
from .errors import ConfigError, DecodeError
from .keyfile import WatermarkKey
from .metrics import bit_correlation
from .store import Dataset, fresh_ids

ATTACK_KINDS = ("duplicate_insert", "synthetic_insert", "delete",
                "alter_random", "alter_fixed", "combined")


@dataclass(frozen=True)
class AttackSpec:
    """One adversary configuration.

    ``alpha`` is the fraction of rows affected; ``rho`` the magnitude
    parameter (stddev units for synthetic inserts, absolute half-range for
    alterations) and may be a per-feature mapping. ``features`` limits
    alterations to the named columns (None alters every feature). Combined
    attacks use the three *_frac fields, all relative to the input row count.
    """

    kind: str
    alpha: float = 0.0
    rho: float | Mapping[str, float] = 0.0
    seed: int = 0
    features: tuple[str, ...] | None = None
    delete_frac: float = 0.0
    insert_frac: float = 0.0
    alter_frac: float = 0.0

    def __post_init__(self):
        if self.kind not in ATTACK_KINDS:
            raise ConfigError(f"unknown attack kind: {self.kind!r}")
        for name in ("alpha", "delete_frac", "insert_frac", "alter_frac"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be >= 0")
        if self.features is not None:
            object.__setattr__(self, "features", tuple(self.features))

    def rho_for(self, feature: str) -> float:
        if isinstance(self.rho, Mapping):
            if feature not in self.rho:
                raise ConfigError(f"no rho given for feature {feature!r}")
            return float(self.rho[feature])
        return float(self.rho)

    def to_dict(self) -> dict:
        rho = dict(self.rho) if isinstance(self.rho, Mapping) else self.rho
        out = {"kind": self.kind, "alpha": self.alpha, "rho": rho,
               "seed": self.seed}
        if self.features is not None:
            out["features"] = list(self.features)
        if self.kind == "combined":
            out.update(delete_frac=self.delete_frac,
                       insert_frac=self.insert_frac,
                       alter_frac=self.alter_frac)
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "AttackSpec":
        features = data.get("features")
        return cls(
            kind=data["kind"],
            alpha=float(data.get("alpha", 0.0)),
            rho=data.get("rho", 0.0),
            seed=int(data.get("seed", 0)),
            features=tuple(features) if features is not None else None,
            delete_frac=float(data.get("delete_frac", 0.0)),
            insert_frac=float(data.get("insert_frac", 0.0)),
            alter_frac=float(data.get("alter_frac", 0.0)),
        )


def _count(fraction: float, rows: int) -> int:
    return math.ceil(fraction * rows)


def _duplicate_insert(dataset: Dataset, count: int,
                      rng: np.random.Generator) -> Dataset:
    if count == 0:
        return dataset
    picks = rng.integers(0, dataset.row_count, size=count)
    ids = fresh_ids(dataset.ids, count)
    labels = [dataset.labels[i] for i in picks]
    return dataset.append_rows(ids, labels, dataset.matrix[picks])


def _synthetic_insert(dataset: Dataset, count: int, spec: AttackSpec,
                      rng: np.random.Generator) -> Dataset:
    if count == 0:
        return dataset
    matrix = np.empty((count, dataset.feature_count))
    for c, name in enumerate(dataset.features):
        column = dataset.column(name)
        mu = float(column.mean())
        sigma = float(column.std())
        half = spec.rho_for(name) * sigma
        matrix[:, c] = rng.uniform(mu - half, mu + half, size=count)
    label_pool = sorted(set(dataset.labels))
    labels = [label_pool[i] for i in rng.integers(0, len(label_pool), size=count)]
    return dataset.append_rows(fresh_ids(dataset.ids, count), labels, matrix)


def _delete(dataset: Dataset, count: int, rng: np.random.Generator) -> Dataset:
    if count >= dataset.row_count:
        raise ConfigError("deletion would remove every row")
    if count == 0:
        return dataset
    doomed = set(rng.choice(dataset.row_count, size=count, replace=False).tolist())
    survivors = [i for i in range(dataset.row_count) if i not in doomed]
    return dataset.take_rows(survivors)


def _alter(dataset: Dataset, count: int, spec: AttackSpec, fixed: bool,
           rng: np.random.Generator) -> Dataset:
    if count == 0:
        return dataset
    count = min(count, dataset.row_count)
    rows = rng.choice(dataset.row_count, size=count, replace=False)
    targets = spec.features if spec.features is not None else dataset.features
    new_columns = {}
    for name in targets:
        column = dataset.column(name).copy()
        half = spec.rho_for(name)
        if fixed:
            signs = rng.integers(0, 2, size=count) * 2 - 1
            column[rows] += half * signs
        else:
            column[rows] += rng.uniform(-half, half, size=count)
        new_columns[name] = column
    return dataset.replace_columns(new_columns)


def apply_attack(dataset: Dataset, spec: AttackSpec) -> Dataset:
    """Produce the attacked dataset for one spec (pure: input untouched)."""
    rng = np.random.default_rng(spec.seed)
    rows = dataset.row_count
    if spec.kind == "duplicate_insert":
        return _duplicate_insert(dataset, _count(spec.alpha, rows), rng)
    if spec.kind == "synthetic_insert":
        return _synthetic_insert(dataset, _count(spec.alpha, rows), spec, rng)
    if spec.kind == "delete":
        return _delete(dataset, _count(spec.alpha, rows), rng)
    if spec.kind == "alter_random":
        return _alter(dataset, _count(spec.alpha, rows), spec, False, rng)
    if spec.kind == "alter_fixed":
        return _alter(dataset, _count(spec.alpha, rows), spec, True, rng)
    # combined: delete, then insert, then alter; all counts from the input size
    streams = np.random.SeedSequence(spec.seed).spawn(3)
    out = _delete(dataset, _count(spec.delete_frac, rows),
                  np.random.default_rng(streams[0]))
    out = _duplicate_insert(out, _count(spec.insert_frac, rows),
                            np.random.default_rng(streams[1]))
    return _alter(out, _count(spec.alter_frac, rows), spec, False,
                  np.random.default_rng(streams[2]))


@dataclass(frozen=True)
class SweepPoint:
    spec: AttackSpec
    bit_accuracy: float | None
    correlation: float | None
    cross_rate: float | None
    verdict: str | None
    error: str | None = None

    def to_dict(self) -> dict:
        return {
            "attack": self.spec.to_dict(),
            "bit_accuracy": self.bit_accuracy,
            "correlation": self.correlation,
            "cross_rate": self.cross_rate,
            "verdict": self.verdict,
            "error": self.error,
        }


# Analytic adversary model, reported for documentation and never asserted:
# a blind attacker flips one vote with probability 0.5, votes are per row and
# independent, and a bit falls only when half the rows fall with it.
ADVERSARY_MODEL = {
    "single_bit_corruption_probability": "0.5 ** (rows / 2)",
    "combined_attack_success_probability":
        "0.5 ** ((altered_rows + selected_unaltered_rows) / 2)",
}


@dataclass(frozen=True)
class ResilienceReport:
    points: tuple[SweepPoint, ...]

    def to_dict(self) -> dict:
        return {"points": [p.to_dict() for p in self.points],
                "adversary_model": dict(ADVERSARY_MODEL)}

    def to_json(self, indent: int | None = None) -> str:
        return json.dumps(self.to_dict(), indent=indent)

    def write_curves(self, path) -> None:
        """Curve points as CSV: one row per sweep point."""
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["kind", "alpha", "delete_frac", "insert_frac",
                             "alter_frac", "seed", "bit_accuracy",
                             "correlation", "cross_rate", "verdict"])
            for p in self.points:
                writer.writerow([
                    p.spec.kind, p.spec.alpha, p.spec.delete_frac,
                    p.spec.insert_frac, p.spec.alter_frac, p.spec.seed,
                    p.bit_accuracy, p.correlation, p.cross_rate, p.verdict,
                ])


def resilience_sweep(marked: Dataset, key: WatermarkKey,
                     grid: Sequence[AttackSpec],
                     target_candidates: bool = True) -> ResilienceReport:
    """Attack, decode and score every point of the grid.

    With ``target_candidates`` (default) alteration specs without an explicit
    feature list are pointed at the key's candidate features. Decode failures
    are recorded on the point and the sweep continues.
    """
    params = DecoderParams.from_key(key)
    points = []
    for spec in grid:
        if target_candidates and spec.features is None and spec.kind in (
                "alter_random", "alter_fixed", "combined"):
            spec = AttackSpec(**{**spec.to_dict(), "features": key.features})
        try:
            attacked = apply_attack(marked, spec)
            result = decode(attacked, key, params)
        except (DecodeError, ConfigError) as exc:
            points.append(SweepPoint(spec, None, None, None, None, str(exc)))
            continue
        accuracy = sum(1 for a, b in zip(result.bits, key.bits) if a == b) / key.length
        points.append(SweepPoint(
            spec,
            accuracy,
            bit_correlation(key.bits, result.bits),
            result.cross_rate,
            result.verdict,
        ))
    return ResilienceReport(tuple(points))
