"""Wall-time scaling of embed/decode against the row count.

Embedding and decoding sweep every row once per bit and feature, so wall
time should grow linearly in the row count at fixed watermark length and
candidate count; the report fits a line and its R^2 so the trend is checkable
without asserting environment-bound absolute numbers.
"""

from __future__ import annotations

import ctypes
import gc
import json
import time
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _kernels
from .codec import Watermark, embed
from .decoder import decode, default_correction
from .keyfile import WatermarkKey
from .ranking import BinningSpec, CandidateSet
from .store import UsabilityConstraints
from .synth import make_table

DEFAULT_ROW_COUNTS = (10_000, 20_000, 40_000)
DEFAULT_RATE = 5e-4


@dataclass(frozen=True)
class LinearFit:
    slope: float
    intercept: float
    r_squared: float


def fit_line(x: Sequence[float], y: Sequence[float]) -> LinearFit:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    slope, intercept = np.polyfit(x, y, 1)
    predicted = slope * x + intercept
    ss_res = float(np.sum((y - predicted) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r_squared = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return LinearFit(float(slope), float(intercept), r_squared)


@dataclass(frozen=True)
class ScalingReport:
    rows: tuple[int, ...]
    embed_seconds: tuple[float, ...]
    decode_seconds: tuple[float, ...]
    embed_fit: LinearFit
    decode_fit: LinearFit
    length: int
    candidate_count: int
    backend: str

    def to_dict(self) -> dict:
        return {
            "backend": self.backend,
            "length": self.length,
            "candidates": self.candidate_count,
            "rows": list(self.rows),
            "embed_seconds": list(self.embed_seconds),
            "decode_seconds": list(self.decode_seconds),
            "embed_fit": vars(self.embed_fit),
            "decode_fit": vars(self.decode_fit),
        }

    def to_json(self, indent: int | None = None) -> str:
        return json.dumps(self.to_dict(), indent=indent)


def _tune_allocator() -> None:
    # Best effort, glibc only: serve large blocks from the reusable heap
    # (M_MMAP_THRESHOLD = -3). Without this, every embed call re-faults its
    # change-log pages and the measurement tracks page-fault policy (which
    # changes regime around the 2 MB huge-page size) instead of row sweeps.
    try:
        ctypes.CDLL("libc.so.6").mallopt(-3, 1 << 30)
    except (OSError, AttributeError):
        pass


def _timed(callable_) -> float:
    start = time.perf_counter()
    callable_()
    return time.perf_counter() - start


def measure_scaling(row_counts: Sequence[int] = DEFAULT_ROW_COUNTS,
                    seed: int = 0, repeats: int = 15, length: int = 16,
                    candidate_count: int = 4) -> ScalingReport:
    """Time embed and decode on synthetic tables of increasing size.

    Uses fixed perturbation rates (optimization time is not part of the
    embed/decode cost being measured). Takes best-of-``repeats`` timings with
    the repeat rounds interleaved across sizes, so a busy period on the host
    degrades every size equally instead of biasing one point; garbage
    collection and allocator policy are pinned down for the duration.
    """
    _tune_allocator()
    constraints = UsabilityConstraints()
    bits = Watermark(tuple(int(b) for b in
                           np.random.default_rng(seed).integers(0, 2, length)))

    embed_jobs = []
    decode_jobs = []
    for rows in row_counts:
        table = make_table(rows=rows, seed=seed)
        names = table.features[-candidate_count:]
        candidates = CandidateSet(tuple(names), excluded_top=0)
        rates = {name: DEFAULT_RATE for name in names}
        marked, delta = embed(table, bits, rates, candidates, constraints)
        correction = {name: default_correction(rates[name],
                                               float(table.column(name).max()))
                      for name in names}
        key = WatermarkKey(
            features=candidates.features, rates=rates,
            bounds={name: (0.0, constraints.beta_cap) for name in names},
            bits=bits.bits, correction=correction,
            bins=BinningSpec.equal_width(table), delta=delta,
            id_column=table.id_column, class_column=table.class_column)
        embed_jobs.append(
            lambda t=table, c=candidates, r=rates:
                embed(t, bits, r, c, constraints))
        decode_jobs.append(lambda m=marked, k=key: decode(m, k))

    n = len(row_counts)
    embed_best = [float("inf")] * n
    decode_best = [float("inf")] * n
    enabled = gc.isenabled()
    gc.disable()  # collection pauses inside a timed run would only add noise
    try:
        for job in embed_jobs + decode_jobs:
            job()   # warmup
        for _ in range(repeats):
            for i in range(n):
                embed_best[i] = min(embed_best[i], _timed(embed_jobs[i]))
                decode_best[i] = min(decode_best[i], _timed(decode_jobs[i]))
            gc.collect()
    finally:
        if enabled:
            gc.enable()
    embed_times = list(embed_best)
    decode_times = list(decode_best)

    return ScalingReport(
        rows=tuple(int(r) for r in row_counts),
        embed_seconds=tuple(embed_times),
        decode_seconds=tuple(decode_times),
        embed_fit=fit_line(row_counts, embed_times),
        decode_fit=fit_line(row_counts, decode_times),
        length=length,
        candidate_count=candidate_count,
        backend=_kernels.BACKEND,
    )
