"""Pure-numpy kernels: the fallback when the compiled extension is absent.

Semantics here are the reference; the compiled path in ``_fastpath.pyx`` must
produce bit-identical float64 results (same operations in the same order, no
FMA contraction), which the parity tests enforce.
"""

from __future__ import annotations

import numpy as np

BACKEND = "numpy"


def embed_feature(values, bits, rate, lo, hi, integer_only=False, record=True):
    """Apply watermark bits to one feature column, most significant bit first.

    Each bit sweeps all rows before the next bit is applied: per row the
    change is rate * current value, added for a 0 bit and subtracted for a
    1 bit. A cell is skipped for a bit when the change would move it outside
    [lo, hi]; cells sitting exactly on lo or hi are skipped for every bit so
    the column minimum and maximum are preserved exactly. Integer-typed
    columns are skipped wholesale (a fractional change would break the type).

    Returns (marked, changes, applied): changes[k, r] is the exact change
    recorded for bit k at row r (0 when skipped), applied[k, r] is 1 when the
    change was applied. With record=False both logs are None (fitness path).
    """
    v = np.array(values, dtype=np.float64)
    bits = np.asarray(bits, dtype=np.uint8)
    n = v.shape[0]
    n_bits = bits.shape[0]
    changes = np.zeros((n_bits, n), dtype=np.float64) if record else None
    applied = np.zeros((n_bits, n), dtype=np.uint8) if record else None
    if integer_only:
        return v, changes, applied

    movable = (v != lo) & (v != hi)
    for k in range(n_bits):
        step = rate * v
        candidate = v - step if bits[k] else v + step
        ok = movable & (candidate >= lo) & (candidate <= hi)
        v = np.where(ok, candidate, v)
        if record:
            changes[k] = np.where(ok, step, 0.0)
            applied[k] = ok
    return v, changes, applied


def decode_feature(values, changes, applied, rate, threshold):
    """Detect one feature's bits from suspect values and peel them off.

    Bits are processed in reverse embedding order (last embedded first). Per
    surviving cell with a recorded change, the detected change is
    rate * suspect value and its residual against the recorded change casts a
    vote: residual <= 0 votes 1, residual in (0, threshold] votes 0, larger
    residuals vote cross (usability violated, excluded from the majority).
    After each bit's majority vote the recorded change is added back (bit 1)
    or removed (bit 0) so earlier bits are detected from near-original values.

    Returns (ones, zeros, crosses, bits, restored); bits[k] is -1 when the
    bit received no countable votes from this feature.
    """
    v = np.array(values, dtype=np.float64)
    changes = np.asarray(changes, dtype=np.float64)
    applied_mask = np.asarray(applied, dtype=np.uint8).astype(bool)
    n_bits = changes.shape[0]
    ones = np.zeros(n_bits, dtype=np.int64)
    zeros = np.zeros(n_bits, dtype=np.int64)
    crosses = np.zeros(n_bits, dtype=np.int64)
    bits = np.full(n_bits, -1, dtype=np.int8)

    for k in range(n_bits - 1, -1, -1):
        act = applied_mask[k]
        detected = rate * v
        residual = detected - changes[k]
        vote_one = act & (residual <= 0.0)
        vote_zero = act & (residual > 0.0) & (residual <= threshold)
        o = int(vote_one.sum())
        z = int(vote_zero.sum())
        ones[k] = o
        zeros[k] = z
        crosses[k] = int(act.sum()) - o - z
        decoded = 1 if o > z else 0
        if o + z > 0:
            bits[k] = decoded
        peeled = v + changes[k] if decoded == 1 else v - changes[k]
        v = np.where(act, peeled, v)
    return ones, zeros, crosses, bits, v
