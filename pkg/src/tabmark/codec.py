"""Watermark creation and embedding.

The perturbation rate for each candidate feature is chosen by the swarm
optimizer: maximize the summed rates subject to the usability constraints
(classification-potential equality under frozen bins, mean/stddev
preservation, exact min/max preservation, type preservation). Constraint
handling is by penalty: each violated constraint subtracts
10 * (violation magnitude) from the summed rates, with magnitudes measured
as overshoot relative to the constraint's tolerance so that any feasible
point dominates any infeasible one.

Embedding applies the bit string most-significant-bit first, every row per
bit, change = rate * current value (added for 0, subtracted for 1), and
records every applied change (or skip) in the change matrix the decoder
later replays.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from . import _kernels
from .errors import ConfigError, DataError
from .keyfile import ChangeMatrix
from .pso import SwarmConfig, SwarmResult, optimize
from .ranking import (BinningSpec, CandidateSet, classification_potential,
                      rate_bounds)
from .store import Dataset, UsabilityConstraints, column_stats

SUPPORTED_LENGTHS = (8, 16, 32, 64)
PENALTY_WEIGHT = 10.0
RATE_FLOOR_FRACTION = 1e-4


@dataclass(frozen=True)
class Watermark:
    """The bit string to embed, most significant bit first."""

    bits: tuple[int, ...]

    def __post_init__(self):
        if not self.bits:
            raise ConfigError("watermark must contain at least one bit")
        if any(b not in (0, 1) for b in self.bits):
            raise ConfigError("watermark bits must be 0 or 1")

    @property
    def length(self) -> int:
        return len(self.bits)

    def as_string(self) -> str:
        return "".join(str(b) for b in self.bits)

    @classmethod
    def from_string(cls, text: str) -> "Watermark":
        if not text or any(c not in "01" for c in text):
            raise ConfigError(f"invalid watermark string: {text!r}")
        return cls(tuple(int(c) for c in text))


def generate_bits(length: int, seed: int, allow_any_length: bool = False) -> Watermark:
    """Deterministic watermark bits from a seed; uniform over positions."""
    if length < 1:
        raise ConfigError("watermark length must be >= 1")
    if length not in SUPPORTED_LENGTHS and not allow_any_length:
        raise ConfigError(
            f"unsupported watermark length {length} "
            f"(supported: {SUPPORTED_LENGTHS}; pass allow_any_length to override)")
    rng = np.random.default_rng(seed)
    return Watermark(tuple(int(b) for b in rng.integers(0, 2, size=length)))


def _feature_box(dataset: Dataset, feature: str,
                 constraints: UsabilityConstraints) -> tuple[float, float]:
    # min/max pinning only applies when exact preservation is demanded
    if constraints.enforce_min_max:
        column = dataset.column(feature)
        return float(column.min()), float(column.max())
    return -np.inf, np.inf


def embed(dataset: Dataset, watermark: Watermark,
          rates: Mapping[str, float], candidates: CandidateSet,
          constraints: UsabilityConstraints) -> tuple[Dataset, ChangeMatrix]:
    """Embed the watermark into every candidate feature of every row.

    Only candidate-feature cells change; ids, labels, non-candidate columns
    and the schema are untouched. Candidate columns must be strictly
    positive: the decoder's sign conventions assume change = rate * value
    has the sign of the bit operation.
    """
    bit_array = np.asarray(watermark.bits, dtype=np.uint8)
    new_columns: dict[str, np.ndarray] = {}
    changes: dict[str, np.ndarray] = {}
    applied: dict[str, np.ndarray] = {}
    used_rates: dict[str, float] = {}
    for feature in candidates.features:
        if feature not in rates:
            raise ConfigError(f"no perturbation rate supplied for {feature!r}")
        column = dataset.column(feature)
        if float(column.min()) <= 0.0:
            raise DataError(
                f"candidate feature {feature!r} must be strictly positive")
        lo, hi = _feature_box(dataset, feature, constraints)
        marked, ch, ap = _kernels.embed_feature(
            column, bit_array, float(rates[feature]), lo, hi,
            integer_only=feature in constraints.integer_columns,
            record=True)
        new_columns[feature] = marked
        changes[feature] = ch
        applied[feature] = ap
        used_rates[feature] = float(rates[feature])
    marked_dataset = dataset.replace_columns(new_columns)
    matrix = ChangeMatrix(dataset.ids, changes, applied, used_rates)
    return marked_dataset, matrix


class _FitnessContext:
    """Precomputed state shared by every fitness evaluation of one run."""

    def __init__(self, dataset: Dataset, candidates: CandidateSet,
                 constraints: UsabilityConstraints, bins: BinningSpec,
                 watermark: Watermark):
        self.constraints = constraints
        self.bins = bins
        self.candidates = candidates.features
        self.bit_array = np.asarray(watermark.bits, dtype=np.uint8)

        _, encoded = np.unique(np.asarray(dataset.labels, dtype=object),
                               return_inverse=True)
        self.labels = encoded.astype(np.intp)
        self.n_classes = int(encoded.max()) + 1

        base_cp = classification_potential(dataset, bins)
        self.all_features = dataset.features
        self.base_gain = {f: base_cp.gain_of(f) for f in dataset.features}
        self.base_cp = {f: base_cp.cp_of(f) for f in dataset.features}

        self.columns = {f: dataset.column(f) for f in self.candidates}
        self.boxes = {f: _feature_box(dataset, f, constraints)
                      for f in self.candidates}
        self.exact_range = {f: (float(self.columns[f].min()),
                                float(self.columns[f].max()))
                            for f in self.candidates}
        self.means = {f: float(self.columns[f].mean()) for f in self.candidates}
        self.stds = {
            f: float(np.sqrt(np.mean((self.columns[f] - self.means[f]) ** 2)))
            for f in self.candidates}

    def _gain_of_marked(self, feature: str, marked: np.ndarray) -> float:
        # clip: with min/max enforcement off, trial values may leave the
        # frozen bin range; end bins absorb them (and the count change is
        # exactly what the potential-equality constraint should see)
        idx = self.bins.assign(feature, marked, clip=True)
        n_bins = self.bins.bin_count(feature)
        joint = np.bincount(idx * self.n_classes + self.labels,
                            minlength=n_bins * self.n_classes
                            ).reshape(n_bins, self.n_classes)
        rows = self.labels.size
        totals = joint.sum(axis=1)
        h_total = _counts_entropy(joint.sum(axis=0))
        h_cond = 0.0
        for b in range(n_bins):
            if totals[b]:
                h_cond += (totals[b] / rows) * _counts_entropy(joint[b])
        return h_total - h_cond

    def violations(self, rates: Sequence[float]) -> dict[str, float]:
        """Per-constraint overshoot magnitudes for a rate vector.

        Magnitudes are relative overshoots (how many tolerances past the
        limit); zero everywhere means the point is feasible.
        """
        h = self.constraints
        out: dict[str, float] = {}
        marked_gain = dict(self.base_gain)
        for feature, rate in zip(self.candidates, rates):
            lo, hi = self.boxes[feature]
            marked, _, _ = _kernels.embed_feature(
                self.columns[feature], self.bit_array, float(rate), lo, hi,
                integer_only=feature in h.integer_columns, record=False)
            marked_gain[feature] = self._gain_of_marked(feature, marked)

            mu = self.means[feature]
            sigma = self.stds[feature]
            marked_mu = float(marked.mean())
            mean_rel = abs(marked_mu - mu) / (abs(mu) or 1.0)
            sigma_w = float(np.sqrt(np.mean((marked - marked_mu) ** 2)))
            std_rel = abs(sigma_w - sigma) / (sigma or 1.0)
            out[f"mean:{feature}"] = _overshoot(mean_rel, h.mean_tol)
            out[f"std:{feature}"] = _overshoot(std_rel, h.std_tol)

            if h.enforce_min_max:
                exact_lo, exact_hi = self.exact_range[feature]
                width = (exact_hi - exact_lo) or 1.0
                min_err = abs(float(marked.min()) - exact_lo)
                max_err = abs(float(marked.max()) - exact_hi)
                out[f"min:{feature}"] = (1.0 + min_err / width) if min_err else 0.0
                out[f"max:{feature}"] = (1.0 + max_err / width) if max_err else 0.0
            if feature in h.integer_columns:
                frac = float(np.mean(marked != np.floor(marked)))
                out[f"integer:{feature}"] = (1.0 + frac) if frac else 0.0

        total = sum(marked_gain.values())
        for feature in self.all_features:
            cp_w = (marked_gain[feature] / total * 100.0) if total > 0 else 0.0
            out[f"cp:{feature}"] = _overshoot(abs(cp_w - self.base_cp[feature]),
                                              h.cp_tolerance)
        return out

    def fitness(self, rates: Sequence[float]) -> float:
        penalty = sum(self.violations(rates).values())
        return float(np.sum(rates)) - PENALTY_WEIGHT * penalty


def _counts_entropy(counts: np.ndarray) -> float:
    total = counts.sum()
    if total == 0:
        return 0.0
    p = counts[counts > 0] / total
    return float(-(p * np.log2(p)).sum())


def _overshoot(value: float, tolerance: float) -> float:
    # subtract before dividing so feasibility agrees exactly with value <= tol
    if tolerance > 0.0:
        excess = value - tolerance
        return excess / tolerance if excess > 0.0 else 0.0
    return (1.0 + value) if value > 0.0 else 0.0


def fitness(dataset: Dataset, rates: Sequence[float], candidates: CandidateSet,
            constraints: UsabilityConstraints, bins: BinningSpec,
            watermark: Watermark) -> float:
    """Summed rates minus constraint penalties (see module docstring).

    ``rates`` aligns positionally with ``candidates.features``.
    """
    context = _FitnessContext(dataset, candidates, constraints, bins, watermark)
    return context.fitness(np.asarray(rates, dtype=np.float64))


@dataclass(frozen=True)
class CreationResult:
    """Outcome of watermark-parameter optimization.

    ``feasible`` is False when no zero-penalty point was found; ``rates``
    then still carries the best attempt together with its violations.
    """

    rates: dict[str, float]
    bounds: dict[str, tuple[float, float]]
    feasible: bool
    fitness: float
    violations: dict[str, float]
    trace: tuple[float, ...]
    iterations: int
    repaired: bool

    def rate_vector(self, features: Sequence[str]) -> np.ndarray:
        return np.array([self.rates[f] for f in features])


def candidate_rate_bounds(dataset: Dataset, candidates: CandidateSet,
                          constraints: UsabilityConstraints,
                          bins: BinningSpec) -> dict[str, tuple[float, float]]:
    """Optimizer box per candidate feature.

    The normalized min/max entering the bound formulas use a shared
    reference range spanning all candidate columns (a per-column range would
    make the bounds degenerate). The upper bound is capped globally; if the
    formula's lower bound exceeds the cap the box collapses to the cap.
    """
    cp_vector = classification_potential(dataset, bins)
    norm_lo = min(float(dataset.column(f).min()) for f in candidates.features)
    norm_hi = max(float(dataset.column(f).max()) for f in candidates.features)
    if norm_hi == norm_lo:
        norm_hi = norm_lo + 1.0
    boxes = {}
    for feature in candidates.features:
        stats = column_stats(dataset, feature, norm_lo, norm_hi)
        lower, upper = rate_bounds(stats, cp_vector.cp_of(feature))
        upper = min(upper, constraints.beta_cap)
        if upper <= 0.0:
            raise ConfigError(
                f"candidate {feature!r} has no usable rate range (upper bound 0)")
        # rates must stay strictly positive: a zero rate embeds nothing and
        # cannot be decoded, so the box never touches zero
        lower = max(min(lower, upper), RATE_FLOOR_FRACTION * upper)
        boxes[feature] = (lower, upper)
    return boxes


def _is_feasible(context: _FitnessContext, rates: np.ndarray) -> bool:
    return all(v == 0.0 for v in context.violations(rates).values())


def _repair_toward_lower(context: _FitnessContext, best: np.ndarray,
                         lower: np.ndarray) -> np.ndarray | None:
    """Shrink an infeasible point toward the box floor until feasible."""
    scale = 1.0
    for _ in range(60):
        scale *= 0.5
        trial = lower + scale * (best - lower)
        if _is_feasible(context, trial):
            return trial
    return lower if _is_feasible(context, lower) else None


def _maximize_rates(context: _FitnessContext, point: np.ndarray,
                    upper: np.ndarray, passes: int = 2,
                    steps: int = 30) -> np.ndarray:
    """Coordinate-wise bisection pushing each rate to its feasibility ceiling.

    The objective maximizes every rate individually, and the usability
    constraints are (nearly) separable per feature, so raising one rate at a
    time toward the largest jointly-feasible value converges to the ceiling
    regardless of where the swarm left off. Every accepted move is verified
    against the full constraint set.
    """
    point = point.copy()
    for _ in range(passes):
        for j in range(point.size):
            lo_b = point[j]
            hi_b = upper[j]
            if hi_b <= lo_b:
                continue
            trial = point.copy()
            trial[j] = hi_b
            if _is_feasible(context, trial):
                point[j] = hi_b
                continue
            for _ in range(steps):
                mid = 0.5 * (lo_b + hi_b)
                trial[j] = mid
                if _is_feasible(context, trial):
                    lo_b = mid
                else:
                    hi_b = mid
            point[j] = lo_b
    return point


def create_watermark_params(dataset: Dataset, candidates: CandidateSet,
                            constraints: UsabilityConstraints,
                            swarm: SwarmConfig, bins: BinningSpec,
                            watermark: Watermark) -> CreationResult:
    """Choose per-feature perturbation rates by constrained swarm search.

    The swarm's best point is repaired if infeasible (shrunk toward the box
    floor, where a vanishing perturbation satisfies everything) and then
    refined by per-feature bisection up to each rate's feasibility ceiling,
    since the objective asks to maximize every rate. The result is
    deterministic under a fixed seed. If even the box floor violates a
    constraint the best attempt is returned with ``feasible=False``.
    """
    if not candidates.features:
        raise ConfigError("candidate set must not be empty")
    context = _FitnessContext(dataset, candidates, constraints, bins, watermark)
    boxes = candidate_rate_bounds(dataset, candidates, constraints, bins)
    bounds = [boxes[f] for f in candidates.features]
    result: SwarmResult = optimize(context.fitness, bounds, swarm)

    best = np.asarray(result.best_position, dtype=np.float64)
    lower = np.array([b[0] for b in bounds])
    upper = np.array([b[1] for b in bounds])
    repaired = False
    if not _is_feasible(context, best):
        fixed = _repair_toward_lower(context, best, lower)
        if fixed is not None:
            best, repaired = fixed, True
    if _is_feasible(context, best):
        best = _maximize_rates(context, best, upper)

    violations = context.violations(best)
    feasible = all(v == 0.0 for v in violations.values())
    rates = {f: float(r) for f, r in zip(candidates.features, best)}
    return CreationResult(
        rates=rates,
        bounds=boxes,
        feasible=feasible,
        fitness=context.fitness(best),
        violations={k: v for k, v in violations.items() if v > 0.0},
        trace=result.trace,
        iterations=result.iterations_run,
        repaired=repaired,
    )
