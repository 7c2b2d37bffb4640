"""Feature ranking by information gain and classification potential.

Classification potential is a feature's share of the total information gain,
expressed as a percentage; it proxies how much a feature matters to the class
decision, and drives both candidate selection (low-potential features carry
the watermark) and the per-feature perturbation-rate bounds.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DataError
from .store import ColumnStats, Dataset

DEFAULT_BIN_COUNT = 10


@dataclass(frozen=True)
class BinningSpec:
    """Frozen per-feature bin edges used to discretize continuous columns.

    Edges are frozen from the original dataset and reused for every later
    evaluation, otherwise potential comparisons would be confounded by
    shifting edges.
    """

    edges: dict[str, np.ndarray]

    def __post_init__(self):
        for name, e in self.edges.items():
            e = np.asarray(e, dtype=np.float64)
            if e.ndim != 1 or e.size < 2:
                raise ConfigError(f"bins for {name!r} need at least two edges")
            if not np.all(np.diff(e) > 0):
                raise ConfigError(f"bin edges for {name!r} must be strictly increasing")
            e.setflags(write=False)
            self.edges[name] = e

    @classmethod
    def equal_width(cls, dataset: Dataset, bin_count: int = DEFAULT_BIN_COUNT,
                    features=None) -> "BinningSpec":
        """Equal-width edges over each column's [min, max].

        A constant column gets a single padded bin so every value still maps
        somewhere.
        """
        if bin_count < 1:
            raise ConfigError("bin_count must be >= 1")
        edges = {}
        for name in (features if features is not None else dataset.features):
            column = dataset.column(name)
            lo, hi = float(column.min()), float(column.max())
            if lo == hi:
                edges[name] = np.array([lo - 0.5, hi + 0.5])
            else:
                edges[name] = np.linspace(lo, hi, bin_count + 1)
        return cls(edges)

    def bin_count(self, feature: str) -> int:
        return self.edges[feature].size - 1

    def assign(self, feature: str, values: np.ndarray,
               clip: bool = False) -> np.ndarray:
        """Map values to bin indices; left-closed bins, last bin closed.

        Out-of-range values are an error unless ``clip`` is set, in which
        case they land in the end bins (useful when evaluating tampered
        data against frozen edges).
        """
        if feature not in self.edges:
            raise DataError(f"no bins defined for feature {feature!r}")
        e = self.edges[feature]
        values = np.asarray(values, dtype=np.float64)
        if not clip and values.size and (values.min() < e[0]
                                         or values.max() > e[-1]):
            raise DataError(f"value outside bin range for feature {feature!r}")
        idx = np.searchsorted(e, values, side="right") - 1
        return np.clip(idx, 0, e.size - 2)

    def to_dict(self) -> dict[str, list[float]]:
        return {name: [float(x) for x in e] for name, e in self.edges.items()}

    @classmethod
    def from_dict(cls, data: dict) -> "BinningSpec":
        return cls({name: np.asarray(e, dtype=np.float64) for name, e in data.items()})


@dataclass(frozen=True)
class CpVector:
    """Per-feature information gain, classification potential and rank.

    Ranks are 1-based, 1 = highest potential, ties broken by schema order.
    ``degenerate`` flags the all-zero-gain case where potentials cannot be
    normalized.
    """

    features: tuple[str, ...]
    gain: np.ndarray
    cp: np.ndarray
    rank: np.ndarray
    degenerate: bool = False

    def cp_of(self, feature: str) -> float:
        return float(self.cp[self.features.index(feature)])

    def gain_of(self, feature: str) -> float:
        return float(self.gain[self.features.index(feature)])

    def rank_of(self, feature: str) -> int:
        return int(self.rank[self.features.index(feature)])

    def as_rows(self) -> list[dict]:
        return [
            {"feature": f, "gain": float(g), "cp": float(c), "rank": int(r)}
            for f, g, c, r in zip(self.features, self.gain, self.cp, self.rank)
        ]


@dataclass(frozen=True)
class CandidateSet:
    """Features selected to carry the watermark, in ascending-potential order."""

    features: tuple[str, ...]
    excluded_top: int

    def __post_init__(self):
        if not self.features:
            raise ConfigError("candidate set must not be empty")


def entropy(labels) -> float:
    """Shannon entropy of a label sequence, in bits (0*log0 taken as 0)."""
    labels = list(labels)
    if not labels:
        raise DataError("entropy of an empty label list is undefined")
    _, counts = np.unique(np.asarray(labels, dtype=object), return_counts=True)
    p = counts / counts.sum()
    return float(-(p * np.log2(p)).sum())


def _entropy_from_counts(counts: np.ndarray) -> float:
    total = counts.sum()
    if total == 0:
        return 0.0
    p = counts[counts > 0] / total
    return float(-(p * np.log2(p)).sum())


def _encode_labels(dataset: Dataset) -> tuple[np.ndarray, int]:
    _, encoded = np.unique(np.asarray(dataset.labels, dtype=object),
                           return_inverse=True)
    return encoded.astype(np.intp), int(encoded.max()) + 1


def information_gain(dataset: Dataset, feature: str, bins: BinningSpec) -> float:
    """Reduction of class entropy from knowing the feature's bin."""
    y, n_classes = _encode_labels(dataset)
    return _gain_from_bins(bins.assign(feature, dataset.column(feature)),
                           bins.bin_count(feature), y, n_classes)


def _gain_from_bins(bin_idx: np.ndarray, n_bins: int,
                    y: np.ndarray, n_classes: int) -> float:
    rows = y.size
    joint = np.bincount(bin_idx * n_classes + y,
                        minlength=n_bins * n_classes).reshape(n_bins, n_classes)
    h_total = _entropy_from_counts(joint.sum(axis=0))
    h_cond = 0.0
    bin_totals = joint.sum(axis=1)
    for b in range(n_bins):
        if bin_totals[b]:
            h_cond += (bin_totals[b] / rows) * _entropy_from_counts(joint[b])
    return h_total - h_cond


def cp_from_gains(gains) -> tuple[np.ndarray, bool]:
    """Normalize information gains to percentages summing to 100.

    Returns (cp, degenerate); degenerate means total gain was zero and all
    potentials are reported as 0.
    """
    gains = np.asarray(gains, dtype=np.float64)
    total = gains.sum()
    if total <= 0.0:
        return np.zeros_like(gains), True
    return gains / total * 100.0, False


def _ranks(features, cp: np.ndarray) -> np.ndarray:
    order = sorted(range(len(features)), key=lambda i: (-cp[i], i))
    rank = np.empty(len(features), dtype=np.intp)
    for position, i in enumerate(order):
        rank[i] = position + 1
    return rank


def classification_potential(dataset: Dataset, bins: BinningSpec,
                             clip: bool = False) -> CpVector:
    """Information gain, potential percentage and rank for every feature.

    Pass ``clip`` to tolerate values outside the frozen bin ranges (attacked
    or otherwise modified data).
    """
    y, n_classes = _encode_labels(dataset)
    gains = np.array([
        _gain_from_bins(bins.assign(name, dataset.column(name), clip=clip),
                        bins.bin_count(name), y, n_classes)
        for name in dataset.features
    ])
    cp, degenerate = cp_from_gains(gains)
    return CpVector(dataset.features, gains, cp,
                    _ranks(dataset.features, cp), degenerate)


def rate_bounds(stats: ColumnStats, cp: float) -> tuple[float, float]:
    """Lower/upper bound on a feature's perturbation rate.

    Both bounds shrink as the feature's classification potential grows
    (high-potential features tolerate less change); ``cp`` is on the 0-100
    percentage scale. The +1 terms keep the denominators positive.
    """
    if cp < 0:
        raise ConfigError("classification potential must be >= 0")
    scale = 1.0 / (1.0 + cp)
    lower = scale * (stats.v_min / (stats.v_max + 1.0))
    upper = scale * (stats.v_max / (stats.v_min + 1.0))
    return lower, upper


def select_candidates(cp_vector: CpVector, top_exclude: int,
                      cp_threshold: float) -> CandidateSet:
    """Pick watermark carriers: everything below the top-ranked features.

    Keeps features with rank > ``top_exclude`` and potential <=
    ``cp_threshold``, in ascending-potential order (weakest carriers first).
    """
    n = len(cp_vector.features)
    if top_exclude < 0:
        raise ConfigError("top_exclude must be >= 0")
    if top_exclude >= n:
        raise ConfigError("top_exclude must be smaller than the feature count")
    chosen = [
        (cp_vector.cp[i], i, name)
        for i, name in enumerate(cp_vector.features)
        if cp_vector.rank[i] > top_exclude and cp_vector.cp[i] <= cp_threshold
    ]
    if not chosen:
        raise ConfigError("candidate selection produced an empty set")
    chosen.sort(key=lambda item: (item[0], item[1]))
    return CandidateSet(tuple(name for _, _, name in chosen), top_exclude)


def median_cp(cp_vector: CpVector) -> float:
    """Default candidate threshold: the median potential."""
    return float(np.median(cp_vector.cp))
