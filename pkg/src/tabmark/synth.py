"""Seeded synthetic tables with a planted class dependency.

Feature values are drawn on a coarse lattice: each column gets ten levels
(the centers of its eventual equal-width bins) plus jitter of at most a
quarter bin width, and two anchor rows pin the exact column minimum and
maximum. The margin between any value and the nearest bin edge is what lets
a small multiplicative watermark leave every histogram count unchanged;
quantized columns like this are also what real vitals data looks like.
Class dependency strength decays across features so the ranking spreads out.
"""

from __future__ import annotations

import numpy as np

from .store import Dataset

DEFAULT_STRENGTHS = (3.0, 2.2, 1.6, 1.1, 0.7, 0.45, 0.25, 0.12)
JITTER_FRACTION = 0.25
LEVELS = 10


def make_table(rows: int = 5000, features: int = 8, seed: int = 0,
               positive_fraction: float = 0.45) -> Dataset:
    """Build a synthetic dataset with binary labels and planted dependency."""
    if rows < 4:
        raise ValueError("need at least 4 rows (2 anchors + data)")
    rng = np.random.default_rng(seed)
    positive = rng.random(rows) < positive_fraction
    labels = tuple("1" if flag else "0" for flag in positive)

    strengths = [DEFAULT_STRENGTHS[i % len(DEFAULT_STRENGTHS)]
                 * (0.9 ** (i // len(DEFAULT_STRENGTHS)))
                 for i in range(features)]
    names = tuple(f"f{i + 1}" for i in range(features))
    matrix = np.empty((rows, features))
    level_idx = np.arange(LEVELS)
    for c in range(features):
        # a shared column minimum keeps the normalized minima (and with them
        # the perturbation-rate lower bounds) at zero for every candidate
        lo = 0.5
        hi = rng.uniform(80.0, 400.0)
        edges = np.linspace(lo, hi, LEVELS + 1)
        centers = (edges[:-1] + edges[1:]) / 2.0
        width = edges[1] - edges[0]

        ramp = strengths[c] * level_idx / (LEVELS - 1)
        p_pos = np.exp(ramp) / np.exp(ramp).sum()
        p_neg = np.exp(-ramp) / np.exp(-ramp).sum()
        bins = np.where(
            positive,
            rng.choice(LEVELS, size=rows, p=p_pos),
            rng.choice(LEVELS, size=rows, p=p_neg),
        )
        jitter = rng.uniform(-JITTER_FRACTION, JITTER_FRACTION, size=rows) * width
        matrix[:, c] = centers[bins] + jitter
        # anchor rows carry the exact extremes so min/max are deterministic
        matrix[0, c] = lo
        matrix[1, c] = hi

    ids = tuple(str(i) for i in range(rows))
    header = ("id",) + names + ("class",)
    return Dataset(header, "id", "class", names, ids, labels, matrix)
