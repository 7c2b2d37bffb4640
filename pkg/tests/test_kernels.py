"""Backend parity: the compiled fast path must match the numpy fallback bit-for-bit."""

import importlib

import numpy as np
import pytest

from tabmark._kernels import BACKEND, numpy_backend

try:
    compiled = importlib.import_module("tabmark._kernels._fastpath")
except ImportError:
    compiled = None

needs_compiled = pytest.mark.skipif(compiled is None,
                                    reason="compiled extension not built")


def random_case(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(20, 300))
    values = rng.uniform(0.5, 350.0, size=n)
    values[0] = values.min() - 1.0
    values[1] = values.max() + 1.0
    bits = rng.integers(0, 2, size=16).astype(np.uint8)
    rate = float(rng.uniform(1e-4, 0.02))
    return values, bits, rate, float(values.min()), float(values.max())


def test_backend_identifier_is_known():
    assert BACKEND in ("cython", "numpy")


@needs_compiled
@pytest.mark.parametrize("seed", range(8))
def test_embed_parity(seed):
    values, bits, rate, lo, hi = random_case(seed)
    marked_py, ch_py, ap_py = numpy_backend.embed_feature(values, bits, rate,
                                                          lo, hi)
    marked_cy, ch_cy, ap_cy = compiled.embed_feature(values, bits, rate, lo, hi)
    assert np.array_equal(marked_py, marked_cy)
    assert np.array_equal(ch_py, ch_cy)
    assert np.array_equal(ap_py, ap_cy)


@needs_compiled
@pytest.mark.parametrize("seed", range(8))
def test_decode_parity(seed):
    values, bits, rate, lo, hi = random_case(seed)
    marked, changes, applied = numpy_backend.embed_feature(values, bits, rate,
                                                           lo, hi)
    rng = np.random.default_rng(1000 + seed)
    survivors = rng.random(values.size) < 0.7
    suspect = marked[survivors] + rng.normal(0.0, 1e-6, survivors.sum())
    ch = changes[:, survivors]
    ap = applied[:, survivors]
    threshold = rate / 0.5
    out_py = numpy_backend.decode_feature(suspect, ch, ap, rate, threshold)
    out_cy = compiled.decode_feature(suspect, ch, ap, rate, threshold)
    for a, b in zip(out_py, out_cy):
        assert np.array_equal(a, b)


@needs_compiled
def test_integer_only_and_record_flags_match():
    values, bits, rate, lo, hi = random_case(99)
    py = numpy_backend.embed_feature(values, bits, rate, lo, hi,
                                     integer_only=True)
    cy = compiled.embed_feature(values, bits, rate, lo, hi, integer_only=True)
    assert np.array_equal(py[0], cy[0])
    assert not py[1].any() and not cy[1].any()

    py_fast = numpy_backend.embed_feature(values, bits, rate, lo, hi,
                                          record=False)
    cy_fast = compiled.embed_feature(values, bits, rate, lo, hi, record=False)
    assert py_fast[1] is None and cy_fast[1] is None
    assert np.array_equal(py_fast[0], cy_fast[0])


def test_embed_pins_extremes_and_respects_range():
    values = np.array([1.0, 10.0, 5.0, 9.99, 1.001])
    bits = np.array([0, 0, 0, 0], dtype=np.uint8)  # all additions
    marked, changes, applied = numpy_backend.embed_feature(
        values, bits, 0.01, 1.0, 10.0)
    assert marked[0] == 1.0 and marked[1] == 10.0          # pinned extremes
    assert not applied[:, 0].any() and not applied[:, 1].any()
    assert marked.max() <= 10.0
    # 9.99 * 1.01 would exceed the maximum: every bit must be skipped
    assert not applied[:, 3].any()
    assert marked[3] == 9.99


def test_decode_votes_follow_threshold_rules():
    values = np.array([100.0, 200.0, 50.0])
    bits = np.array([1, 0], dtype=np.uint8)
    marked, changes, applied = numpy_backend.embed_feature(
        values, bits, 0.01, 0.0, 1e9)
    # threshold = 2 * rate^2 * max(column), the default policy's value
    ones, zeros, crosses, decoded, restored = numpy_backend.decode_feature(
        marked, changes, applied, 0.01, 2 * 0.01 ** 2 * 200.0)
    assert decoded.tolist() == [1, 0]
    assert ones[0] == 3 and zeros[1] == 3
    assert crosses.sum() == 0
    assert np.allclose(restored, values, rtol=1e-12)
