"""Shared fixtures: a worked-example toy table and the standard synthetic table.

The standard pipeline run (5000 rows, default optimizer settings) is built
once per session; most acceptance criteria measure it.
"""

from __future__ import annotations

import numpy as np
import pytest

import tabmark as tm

TOY_BITS = "11001"
STD_SEED = 1        # watermark / optimizer seed for the standard run
STD_TABLE_SEED = 42


def build_toy_table() -> tm.Dataset:
    """Two numeric vitals and a yes/no label, six patients.

    a2 separates the classes perfectly (highest potential, never
    watermarked); a1 mixes classes within a shared bin so it ranks lower and
    becomes the candidate carrier.
    """
    a1 = np.array([90.0, 100.0, 110.0, 100.0, 100.0, 120.0])
    a2 = np.array([5.0, 6.0, 7.0, 20.0, 21.0, 22.0])
    labels = ("yes", "yes", "yes", "no", "no", "no")
    ids = tuple(str(i) for i in range(6))
    return tm.Dataset(("id", "a1", "a2", "d1"), "id", "d1", ("a1", "a2"),
                      ids, labels, np.column_stack([a1, a2]))


@pytest.fixture
def toy_table() -> tm.Dataset:
    return build_toy_table()


@pytest.fixture
def small_table() -> tm.Dataset:
    return tm.make_table(rows=400, seed=7)


@pytest.fixture(scope="session")
def std_table() -> tm.Dataset:
    return tm.make_table(rows=5000, seed=STD_TABLE_SEED)


@pytest.fixture(scope="session")
def std_run(std_table) -> tm.EncodeResult:
    """Full pipeline on the standard table with default settings."""
    result = tm.encode(std_table, tm.EncodeOptions(seed=STD_SEED))
    assert result.feasible, "standard fixture must optimize to a feasible point"
    return result


def embed_toy(table: tm.Dataset, bits: str = TOY_BITS, rate: float = 0.01):
    """Embed the worked-example watermark at the given rate into a1."""
    watermark = tm.Watermark.from_string(bits)
    candidates = tm.CandidateSet(("a1",), excluded_top=1)
    constraints = tm.UsabilityConstraints()
    marked, delta = tm.embed(table, watermark, {"a1": rate}, candidates,
                             constraints)
    correction = {"a1": tm.default_correction(rate, float(table.column("a1").max()))}
    key = tm.WatermarkKey(
        features=("a1",), rates={"a1": rate},
        bounds={"a1": (0.0001, 0.02)}, bits=watermark.bits,
        correction=correction, bins=tm.BinningSpec.equal_width(table),
        delta=delta, id_column="id", class_column="d1")
    return marked, key, watermark
