"""Secret key material: per-feature rates, watermark bits, and the change log.

The key file is a single JSON document holding everything decoding needs:
{version, features, betas, bounds, bits, l, gamma, bins, delta}. ``delta`` is
a flat array of {feature, bit, row_id, eta|skip} entries; ``bit`` is 1-based
with bit 1 the first-embedded (most significant) position. Keys can be large
(one entry per feature, bit and row) -- that is the price of exact per-row
change records, which the decoder needs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterator, Mapping

import numpy as np

from .errors import ConfigError, DataError
from .ranking import BinningSpec

KEY_FORMAT_VERSION = 1


@dataclass(frozen=True)
class ChangeMatrix:
    """Exact per-(feature, bit, row) changes applied at embedding time.

    ``changes[f]`` has shape (bits, rows) aligned with ``row_ids``;
    ``applied[f]`` marks which cells were actually changed (skipped cells
    keep a zero change and applied == 0).
    """

    row_ids: tuple[str, ...]
    changes: dict[str, np.ndarray]
    applied: dict[str, np.ndarray]
    rates: dict[str, float]

    def __post_init__(self):
        n = len(self.row_ids)
        for name, arr in self.changes.items():
            if arr.shape != self.applied[name].shape or arr.shape[1] != n:
                raise DataError(f"change log for {name!r} is inconsistent")
            arr.setflags(write=False)
            self.applied[name].setflags(write=False)

    @property
    def features(self) -> tuple[str, ...]:
        return tuple(self.changes.keys())

    @property
    def bit_count(self) -> int:
        first = next(iter(self.changes.values()))
        return int(first.shape[0])

    def summary(self) -> dict[str, dict]:
        out = {}
        for name, arr in self.changes.items():
            applied = self.applied[name]
            out[name] = {
                "beta": self.rates[name],
                "total_abs_change": float(np.abs(arr).sum()),
                "applied_cells": int(applied.sum()),
                "skipped_cells": int(applied.size - applied.sum()),
            }
        return out

    def entries(self) -> Iterator[dict]:
        """Flat wire-format entries, ordered by feature, bit, then row."""
        for name, arr in self.changes.items():
            applied = self.applied[name]
            for k in range(arr.shape[0]):
                for r, rid in enumerate(self.row_ids):
                    if applied[k, r]:
                        yield {"feature": name, "bit": k + 1, "row_id": rid,
                               "eta": float(arr[k, r])}
                    else:
                        yield {"feature": name, "bit": k + 1, "row_id": rid,
                               "skip": True}

    @classmethod
    def from_entries(cls, entries, rates: Mapping[str, float]) -> "ChangeMatrix":
        per_feature: dict[str, dict[tuple[int, str], float | None]] = {}
        row_ids: list[str] = []
        seen_rows: set[str] = set()
        max_bit = 0
        for entry in entries:
            name = entry["feature"]
            bit = int(entry["bit"])
            rid = str(entry["row_id"])
            max_bit = max(max_bit, bit)
            if rid not in seen_rows:
                seen_rows.add(rid)
                row_ids.append(rid)
            per_feature.setdefault(name, {})[(bit, rid)] = (
                None if entry.get("skip") else float(entry["eta"]))
        row_index = {rid: i for i, rid in enumerate(row_ids)}
        changes: dict[str, np.ndarray] = {}
        applied: dict[str, np.ndarray] = {}
        for name, cells in per_feature.items():
            ch = np.zeros((max_bit, len(row_ids)), dtype=np.float64)
            ap = np.zeros((max_bit, len(row_ids)), dtype=np.uint8)
            for (bit, rid), eta in cells.items():
                if eta is not None:
                    ch[bit - 1, row_index[rid]] = eta
                    ap[bit - 1, row_index[rid]] = 1
            changes[name] = ch
            applied[name] = ap
        return cls(tuple(row_ids), changes, applied, dict(rates))


@dataclass(frozen=True)
class WatermarkKey:
    """Everything needed to decode: the non-blind scheme's secret material."""

    features: tuple[str, ...]
    rates: dict[str, float]                    # serialized as "betas"
    bounds: dict[str, tuple[float, float]]
    bits: tuple[int, ...]
    correction: dict[str, float]               # serialized as "gamma"
    bins: BinningSpec
    delta: ChangeMatrix
    id_column: str = "id"
    class_column: str = "class"
    version: int = KEY_FORMAT_VERSION

    def __post_init__(self):
        for name in self.features:
            for table, label in ((self.rates, "betas"),
                                 (self.correction, "gamma"),
                                 (self.bounds, "bounds")):
                if name not in table:
                    raise ConfigError(f"key is missing {label} for feature {name!r}")
            if name not in self.delta.changes:
                raise ConfigError(f"key is missing delta entries for {name!r}")
        if any(b not in (0, 1) for b in self.bits):
            raise ConfigError("watermark bits must be 0/1")
        if self.delta.bit_count != len(self.bits):
            raise ConfigError("delta bit count does not match watermark length")

    @property
    def length(self) -> int:
        return len(self.bits)

    def to_dict(self) -> dict:
        return {
            "version": self.version,
            "features": list(self.features),
            "betas": {k: float(v) for k, v in self.rates.items()},
            "bounds": {k: [float(lo), float(hi)]
                       for k, (lo, hi) in self.bounds.items()},
            "bits": "".join(str(b) for b in self.bits),
            "l": self.length,
            "gamma": {k: float(v) for k, v in self.correction.items()},
            "bins": self.bins.to_dict(),
            "delta": list(self.delta.entries()),
            "columns": {"id": self.id_column, "class": self.class_column},
        }

    @classmethod
    def from_dict(cls, data: dict) -> "WatermarkKey":
        bits = tuple(int(b) for b in str(data["bits"]))
        if len(bits) != int(data["l"]):
            raise ConfigError("key field 'l' disagrees with the bit string")
        rates = {k: float(v) for k, v in data["betas"].items()}
        columns = data.get("columns", {})
        return cls(
            features=tuple(data["features"]),
            rates=rates,
            bounds={k: (float(v[0]), float(v[1]))
                    for k, v in data["bounds"].items()},
            bits=bits,
            correction={k: float(v) for k, v in data["gamma"].items()},
            bins=BinningSpec.from_dict(data["bins"]),
            delta=ChangeMatrix.from_entries(data["delta"], rates),
            id_column=columns.get("id", "id"),
            class_column=columns.get("class", "class"),
            version=int(data.get("version", KEY_FORMAT_VERSION)),
        )


def save_key(key: WatermarkKey, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(key.to_dict(), fh, separators=(",", ":"))


def load_key(path) -> WatermarkKey:
    with open(path, "r", encoding="utf-8") as fh:
        return WatermarkKey.from_dict(json.load(fh))
