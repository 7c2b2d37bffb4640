"""In-memory numeric table: CSV ingestion, column statistics, constraint checks.

A dataset is an immutable numeric matrix plus a class-label column and a
row-identifier column. The id column is never watermarked; it is what keeps
recorded per-row changes aligned with rows after an adversary inserts or
deletes records.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import ConfigError, DataError

SYNTHESIZE = "synthesize"
_SYNTH_ID_NAME = "id"


@dataclass(frozen=True)
class Dataset:
    """Immutable numeric table with one class column and one id column.

    ``matrix`` is a row-major float64 array of shape (rows, features), with
    columns ordered like ``features``. ``header`` preserves the original file
    column order (including id and class) so round-tripped CSV output keeps
    an identical schema.
    """

    header: tuple[str, ...]
    id_column: str
    class_column: str
    features: tuple[str, ...]
    ids: tuple[str, ...]
    labels: tuple[str, ...]
    matrix: np.ndarray

    def __post_init__(self):
        self.matrix.setflags(write=False)
        if self.row_count < 1:
            raise DataError("dataset must contain at least one row")
        if self.feature_count < 1:
            raise DataError("dataset must contain at least one feature column")
        if len(set(self.ids)) != len(self.ids):
            raise DataError("duplicate row id")
        if self.matrix.shape != (self.row_count, self.feature_count):
            raise DataError("matrix shape does not match schema")
        if not np.all(np.isfinite(self.matrix)):
            raise DataError("feature values must be finite")

    @property
    def row_count(self) -> int:
        return len(self.ids)

    @property
    def feature_count(self) -> int:
        return len(self.features)

    def feature_index(self, name: str) -> int:
        try:
            return self.features.index(name)
        except ValueError:
            raise DataError(f"unknown feature: {name!r}") from None

    def column(self, name: str) -> np.ndarray:
        """Read-only view of one feature column."""
        return self.matrix[:, self.feature_index(name)]

    def replace_columns(self, new_columns: Mapping[str, np.ndarray]) -> "Dataset":
        """New dataset with the given feature columns swapped out."""
        matrix = self.matrix.copy()
        for name, values in new_columns.items():
            values = np.asarray(values, dtype=np.float64)
            if values.shape != (self.row_count,):
                raise DataError(f"replacement column {name!r} has wrong length")
            matrix[:, self.feature_index(name)] = values
        return Dataset(self.header, self.id_column, self.class_column,
                       self.features, self.ids, self.labels, matrix)

    def take_rows(self, indices: Sequence[int]) -> "Dataset":
        idx = np.asarray(indices, dtype=np.intp)
        return Dataset(
            self.header, self.id_column, self.class_column, self.features,
            tuple(self.ids[i] for i in idx),
            tuple(self.labels[i] for i in idx),
            self.matrix[idx].copy(),
        )

    def append_rows(self, ids: Sequence[str], labels: Sequence[str],
                    matrix: np.ndarray) -> "Dataset":
        if len(ids) != len(labels) or len(ids) != matrix.shape[0]:
            raise DataError("appended rows are inconsistent")
        return Dataset(
            self.header, self.id_column, self.class_column, self.features,
            self.ids + tuple(ids), self.labels + tuple(labels),
            np.vstack([self.matrix, np.asarray(matrix, dtype=np.float64)]),
        )

    def id_to_row(self) -> dict[str, int]:
        return {rid: i for i, rid in enumerate(self.ids)}


@dataclass(frozen=True)
class ColumnStats:
    """Per-column statistics used by bound derivation and constraint checks.

    ``v_min``/``v_max`` are the column min/max mapped through a shared
    reference range into [0, 1]; the reference range is supplied by the
    caller (by default the min/max across all candidate features) because a
    per-column mapping would degenerate to exactly 0 and 1.
    """

    mean: float
    std: float
    minimum: float
    maximum: float
    v_min: float
    v_max: float

    def __post_init__(self):
        if not (self.minimum <= self.mean <= self.maximum):
            raise DataError("column stats violate min <= mean <= max")
        if self.v_min > self.v_max:
            raise DataError("column stats violate v_min <= v_max")


@dataclass(frozen=True)
class UsabilityConstraints:
    """Tolerances the watermarked table must satisfy (the constraint set).

    cp_tolerance      max allowed absolute change in a feature's
                      classification potential (percentage points)
    mean_tol/std_tol  max relative drift of a column's mean / stddev
    enforce_min_max   require exact preservation of each column's min and max
    beta_cap          global upper cap on any per-feature perturbation rate
    integer_columns   features whose integer type must survive watermarking
    """

    cp_tolerance: float = 1e-6
    mean_tol: float = 1e-3
    std_tol: float = 1e-3
    enforce_min_max: bool = True
    beta_cap: float = 0.02
    integer_columns: frozenset[str] = field(default_factory=frozenset)

    def __post_init__(self):
        for name in ("cp_tolerance", "mean_tol", "std_tol"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be >= 0")
        if not (0.0 < self.beta_cap < 1.0):
            raise ConfigError("beta_cap must be in (0, 1)")
        object.__setattr__(self, "integer_columns", frozenset(self.integer_columns))


@dataclass(frozen=True)
class FeatureCheck:
    feature: str
    cp_delta: float
    mean_rel: float
    std_rel: float
    min_ok: bool
    max_ok: bool
    integer_ok: bool
    passed: bool


@dataclass(frozen=True)
class ConstraintReport:
    checks: tuple[FeatureCheck, ...]
    passed: bool

    def failing_features(self) -> tuple[str, ...]:
        return tuple(c.feature for c in self.checks if not c.passed)

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "features": [
                {
                    "feature": c.feature,
                    "cp_delta": c.cp_delta,
                    "mean_rel": c.mean_rel,
                    "std_rel": c.std_rel,
                    "min_ok": c.min_ok,
                    "max_ok": c.max_ok,
                    "integer_ok": c.integer_ok,
                    "passed": c.passed,
                }
                for c in self.checks
            ],
        }

    def to_json(self, indent: int | None = None) -> str:
        return json.dumps(self.to_dict(), indent=indent)


def _parse_cell(text: str, row_number: int, column: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise DataError(
            f"non-numeric value {text!r} at row {row_number}, column {column}"
        ) from None
    if not math.isfinite(value):
        raise DataError(f"non-finite value at row {row_number}, column {column}")
    return value


def load_dataset(source, class_column: str, id_column: str = SYNTHESIZE) -> Dataset:
    """Load a CSV file (header row, comma separator, '.' decimal point).

    ``id_column`` may name an existing column or be ``"synthesize"`` to assign
    sequential ids 0..R-1 (exposed as a new ``id`` column in the schema).
    """
    with open(source, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"empty file: {source}") from None
        header = [h.strip() for h in header]
        rows = [row for row in reader if row]

    if not rows:
        raise DataError(f"no data rows in {source}")
    if len(set(header)) != len(header):
        dupes = sorted({h for h in header if header.count(h) > 1})
        raise DataError(f"duplicate column names: {', '.join(dupes)}")
    if class_column not in header:
        raise DataError(f"missing class column: {class_column!r}")

    synthesize = id_column == SYNTHESIZE
    if synthesize:
        if _SYNTH_ID_NAME in header:
            raise DataError(
                f"cannot synthesize ids: column {_SYNTH_ID_NAME!r} already exists "
                f"(pass id_column={_SYNTH_ID_NAME!r} to use it)"
            )
        id_column = _SYNTH_ID_NAME
    elif id_column not in header:
        raise DataError(f"missing id column: {id_column!r}")
    if id_column == class_column:
        raise DataError("id column and class column must differ")

    features = tuple(h for h in header if h not in (id_column, class_column))
    if not features:
        raise DataError("no feature columns found")
    col_of = {name: i for i, name in enumerate(header)}

    ids: list[str] = []
    labels: list[str] = []
    matrix = np.empty((len(rows), len(features)), dtype=np.float64)
    for r, row in enumerate(rows):
        file_row = r + 2  # header is file row 1
        if len(row) != len(header):
            raise DataError(f"row {file_row} has {len(row)} cells, expected {len(header)}")
        ids.append(str(r) if synthesize else row[col_of[id_column]].strip())
        labels.append(row[col_of[class_column]].strip())
        for c, name in enumerate(features):
            matrix[r, c] = _parse_cell(row[col_of[name]].strip(), file_row, name)

    if len(set(ids)) != len(ids):
        raise DataError("duplicate row id")

    out_header = ((_SYNTH_ID_NAME,) + tuple(header)) if synthesize else tuple(header)
    return Dataset(out_header, id_column, class_column, features,
                   tuple(ids), tuple(labels), matrix)


def save_dataset(dataset: Dataset, target) -> None:
    """Write the dataset back to CSV with its original column order."""
    col_writers = {}
    for name in dataset.features:
        column = dataset.column(name)
        col_writers[name] = [repr(v) for v in column.tolist()]
    with open(target, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(dataset.header)
        for r in range(dataset.row_count):
            row = []
            for name in dataset.header:
                if name == dataset.id_column:
                    row.append(dataset.ids[r])
                elif name == dataset.class_column:
                    row.append(dataset.labels[r])
                else:
                    row.append(col_writers[name][r])
            writer.writerow(row)


def column_stats(dataset: Dataset, feature: str,
                 norm_lo: float, norm_hi: float) -> ColumnStats:
    """Exact two-pass statistics for one column.

    Population (not sample) standard deviation, deterministically computed,
    so constraint checks are reproducible. ``norm_lo``/``norm_hi`` define the
    reference range used to map the column min/max into [0, 1].
    """
    if norm_hi <= norm_lo:
        raise ConfigError("norm_hi must be greater than norm_lo")
    values = dataset.column(feature)
    mean = float(values.mean())
    std = float(np.sqrt(np.mean((values - mean) ** 2)))
    lo = float(values.min())
    hi = float(values.max())
    span = norm_hi - norm_lo
    v_min = min(max((lo - norm_lo) / span, 0.0), 1.0)
    v_max = min(max((hi - norm_lo) / span, 0.0), 1.0)
    return ColumnStats(mean, std, lo, hi, v_min, v_max)


def _integer_preserved(values: np.ndarray) -> bool:
    return bool(np.all(values == np.floor(values)))


def validate_constraints(original: Dataset, marked: Dataset,
                         constraints: UsabilityConstraints,
                         cp_original, cp_marked) -> ConstraintReport:
    """Check a marked dataset against the constraint set, feature by feature.

    ``cp_original``/``cp_marked`` are classification-potential vectors
    computed with the same frozen binning (see ranking.classification_potential).
    """
    if original.header != marked.header or original.features != marked.features:
        raise DataError("schema mismatch between original and marked datasets")
    if set(original.ids) != set(marked.ids):
        raise DataError("row-id set mismatch between original and marked datasets")

    checks = []
    for name in original.features:
        before = original.column(name)
        after = marked.column(name)
        cp_delta = abs(cp_marked.cp_of(name) - cp_original.cp_of(name))
        mu = float(before.mean())
        sigma = float(np.sqrt(np.mean((before - mu) ** 2)))
        mean_rel = abs(float(after.mean()) - mu) / (abs(mu) if mu != 0.0 else 1.0)
        sigma_w = float(np.sqrt(np.mean((after - float(after.mean())) ** 2)))
        std_rel = abs(sigma_w - sigma) / (sigma if sigma > 0.0 else 1.0)
        min_ok = float(after.min()) == float(before.min())
        max_ok = float(after.max()) == float(before.max())
        integer_ok = (name not in constraints.integer_columns
                      or _integer_preserved(after))
        passed = (
            cp_delta <= constraints.cp_tolerance
            and mean_rel <= constraints.mean_tol
            and std_rel <= constraints.std_tol
            and (not constraints.enforce_min_max or (min_ok and max_ok))
            and integer_ok
        )
        checks.append(FeatureCheck(name, cp_delta, mean_rel, std_rel,
                                   min_ok, max_ok, integer_ok, passed))
    return ConstraintReport(tuple(checks), all(c.passed for c in checks))


def fresh_ids(existing: Iterable[str], count: int, prefix: str = "ins") -> list[str]:
    """Generate ``count`` ids guaranteed not to collide with ``existing``."""
    taken = set(existing)
    out = []
    n = 0
    while len(out) < count:
        candidate = f"{prefix}{n}"
        if candidate not in taken:
            taken.add(candidate)
            out.append(candidate)
        n += 1
    return out
