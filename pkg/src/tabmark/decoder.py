"""Threshold decoding with per-bit majority voting and reverse peeling.

Bits are detected last-embedded-first. For each surviving row the detected
change (rate * suspect value) is compared with the recorded change from the
key: a non-positive residual votes 1, a residual within the decoder
threshold votes 0, anything larger is a cross (the row must have violated
usability, so it is excluded from the majority). After each bit's vote the
recorded changes are replayed in reverse, restoring near-original values for
the remaining bits; rows the attacker inserted carry unknown ids and are
ignored, deleted rows simply cast no votes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import ConfigError, DecodeError, UndecodableBitError
from .keyfile import WatermarkKey
from .metrics import bit_correlation
from .store import Dataset

CROSS = -1

CORRECTION_MIN = 0.05
CORRECTION_MAX = 0.95


def decoder_threshold(rate: float, correction: float) -> float:
    """Decoder threshold separating 0-votes from cross votes: rate/correction."""
    if not (0.0 < correction < 1.0):
        raise ConfigError("correction factor must lie in (0, 1)")
    if rate <= 0.0:
        raise ConfigError("rate must be > 0")
    return rate / correction


def default_correction(rate: float, column_max: float) -> float:
    """Correction factor giving the threshold a 2x margin over clean residuals.

    A clean 0-bit leaves a residual of rate^2 * value, so the threshold must
    exceed rate^2 * max(column); clamped into [0.05, 0.95].
    """
    if rate <= 0.0:
        raise ConfigError("rate must be > 0")
    raw = 1.0 / (2.0 * rate * max(abs(column_max), np.finfo(float).tiny))
    return float(min(max(raw, CORRECTION_MIN), CORRECTION_MAX))


def detect_bit(suspect_value: float, recorded_change: float,
               rate: float, threshold: float) -> int:
    """Classify one cell: 1, 0, or CROSS (usability violated)."""
    residual = rate * suspect_value - recorded_change
    if residual <= 0.0:
        return 1
    if residual <= threshold:
        return 0
    return CROSS


@dataclass(frozen=True)
class VoteTally:
    """Vote counts for one bit position (crosses never count)."""

    ones: int
    zeros: int
    crosses: int
    decoded: int | None = None
    tie: bool = False

    @property
    def votes(self) -> int:
        return self.ones + self.zeros + self.crosses


def majority_vote(tally: VoteTally) -> int:
    """Majority over countable votes; ties decode 0 (callers flag them)."""
    if tally.ones + tally.zeros == 0:
        raise UndecodableBitError("all votes are crosses: bit undecodable")
    return 1 if tally.ones > tally.zeros else 0


@dataclass(frozen=True)
class DecoderParams:
    """Per-feature thresholds; threshold = rate / correction, exactly."""

    rates: dict[str, float]
    correction: dict[str, float]
    thresholds: dict[str, float]

    def __post_init__(self):
        for name, threshold in self.thresholds.items():
            expected = decoder_threshold(self.rates[name], self.correction[name])
            if threshold != expected:
                raise ConfigError(f"threshold for {name!r} is not rate/correction")

    @classmethod
    def from_key(cls, key: WatermarkKey) -> "DecoderParams":
        thresholds = {
            name: decoder_threshold(key.rates[name], key.correction[name])
            for name in key.features
        }
        return cls(dict(key.rates), dict(key.correction), thresholds)


@dataclass(frozen=True)
class DecodedWatermark:
    """Decoder output plus the match report against the key's bits."""

    bits: tuple[int, ...]
    tallies: tuple[VoteTally, ...]
    feature_bits: dict[str, tuple[int, ...]]
    undecodable: tuple[int, ...]   # 1-based bit positions with no votes at all
    ties: tuple[int, ...]          # 1-based bit positions decided by the tie rule
    survivor_ids: tuple[str, ...]
    restored_columns: dict[str, np.ndarray]
    accuracy: float
    correlation: float
    verdict: str                   # match | partial | corrupted

    @property
    def cross_rate(self) -> float:
        votes = sum(t.votes for t in self.tallies)
        return (sum(t.crosses for t in self.tallies) / votes) if votes else 1.0

    def as_string(self) -> str:
        return "".join(str(b) for b in self.bits)

    def to_dict(self) -> dict:
        return {
            "bits": self.as_string(),
            "accuracy": self.accuracy,
            "correlation": self.correlation,
            "verdict": self.verdict,
            "cross_rate": self.cross_rate,
            "undecodable_bits": list(self.undecodable),
            "tie_bits": list(self.ties),
            "tallies": [
                {"bit": i + 1, "ones": t.ones, "zeros": t.zeros,
                 "crosses": t.crosses, "decoded": t.decoded, "tie": t.tie}
                for i, t in enumerate(self.tallies)
            ],
            "feature_bits": {
                f: "".join("x" if b < 0 else str(b) for b in bits)
                for f, bits in self.feature_bits.items()
            },
        }


def decode(attacked: Dataset, key: WatermarkKey,
           params: DecoderParams | None = None) -> DecodedWatermark:
    """Decode the watermark from a (possibly attacked) dataset.

    Never reads the original data: rows are aligned to the key's change
    matrix by id, each candidate feature votes independently, and the
    per-feature bit strings are combined by per-bit majority (feature-level
    first, pooled cell votes as the tie breaker). Bits that receive no votes
    anywhere are reported as undecodable and force a "corrupted" verdict.
    """
    params = params or DecoderParams.from_key(key)
    id_map = attacked.id_to_row()
    survivor_positions = [i for i, rid in enumerate(key.delta.row_ids)
                          if rid in id_map]
    if not survivor_positions:
        raise DecodeError("no surviving rows: cannot align any recorded change")
    survivor_idx = np.asarray(survivor_positions, dtype=np.intp)
    survivor_ids = tuple(key.delta.row_ids[i] for i in survivor_positions)
    attacked_rows = np.asarray([id_map[rid] for rid in survivor_ids],
                               dtype=np.intp)

    length = key.length
    ones = np.zeros(length, dtype=np.int64)
    zeros = np.zeros(length, dtype=np.int64)
    crosses = np.zeros(length, dtype=np.int64)
    feature_bits: dict[str, tuple[int, ...]] = {}
    restored: dict[str, np.ndarray] = {}
    for feature in key.features:
        values = attacked.column(feature)[attacked_rows]
        changes = key.delta.changes[feature][:, survivor_idx]
        applied = key.delta.applied[feature][:, survivor_idx]
        f_ones, f_zeros, f_crosses, f_bits, f_restored = _kernels.decode_feature(
            values, changes, applied,
            params.rates[feature], params.thresholds[feature])
        ones += f_ones
        zeros += f_zeros
        crosses += f_crosses
        feature_bits[feature] = tuple(int(b) for b in f_bits)
        restored[feature] = f_restored

    decoded: list[int] = []
    undecodable: list[int] = []
    ties: list[int] = []
    tallies: list[VoteTally] = []
    for k in range(length):
        votes_one = sum(1 for f in key.features if feature_bits[f][k] == 1)
        votes_zero = sum(1 for f in key.features if feature_bits[f][k] == 0)
        if votes_one + votes_zero == 0:
            bit, tie = 0, False
            undecodable.append(k + 1)
        elif votes_one != votes_zero:
            bit, tie = (1 if votes_one > votes_zero else 0), False
        elif ones[k] != zeros[k]:
            # feature-level tie: fall back to the pooled cell votes
            bit, tie = (1 if ones[k] > zeros[k] else 0), False
        else:
            bit, tie = 0, True
            ties.append(k + 1)
        decoded.append(bit)
        tallies.append(VoteTally(int(ones[k]), int(zeros[k]), int(crosses[k]),
                                 bit, tie))

    matches = sum(1 for a, b in zip(decoded, key.bits) if a == b)
    accuracy = matches / length
    correlation = bit_correlation(key.bits, decoded)
    total_votes = int(ones.sum() + zeros.sum() + crosses.sum())
    cross_heavy = total_votes > 0 and int(crosses.sum()) * 2 > total_votes
    if undecodable or cross_heavy:
        verdict = "corrupted"
    elif accuracy == 1.0:
        verdict = "match"
    else:
        verdict = "partial"

    return DecodedWatermark(
        bits=tuple(decoded),
        tallies=tuple(tallies),
        feature_bits=feature_bits,
        undecodable=tuple(undecodable),
        ties=tuple(ties),
        survivor_ids=survivor_ids,
        restored_columns=restored,
        accuracy=accuracy,
        correlation=correlation,
        verdict=verdict,
    )
