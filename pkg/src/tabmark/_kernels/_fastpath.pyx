# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels; must stay bit-identical to numpy_backend.

Every float64 operation mirrors the fallback exactly (same expression shape,
same order, no fused multiply-add -- the extension is built with
-ffp-contract=off).
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

BACKEND = "cython"


def embed_feature(values, bits, double rate, double lo, double hi,
                  bint integer_only=False, bint record=True):
    """See numpy_backend.embed_feature; identical contract and results."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] v = np.array(values, dtype=np.float64)
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] b = np.asarray(bits, dtype=np.uint8)
    cdef Py_ssize_t n = v.shape[0]
    cdef Py_ssize_t n_bits = b.shape[0]

    changes_arr = np.zeros((n_bits, n), dtype=np.float64) if record else None
    applied_arr = np.zeros((n_bits, n), dtype=np.uint8) if record else None
    if integer_only:
        return v, changes_arr, applied_arr

    cdef cnp.ndarray[cnp.uint8_t, ndim=1] movable = np.empty(n, dtype=np.uint8)
    cdef double[:, ::1] changes = changes_arr if record else np.empty((0, 0))
    cdef cnp.uint8_t[:, ::1] applied = applied_arr if record else np.empty((0, 0), dtype=np.uint8)
    cdef Py_ssize_t k, r
    cdef double step, candidate
    cdef bint subtract

    for r in range(n):
        movable[r] = v[r] != lo and v[r] != hi
    for k in range(n_bits):
        subtract = b[k] != 0
        for r in range(n):
            step = rate * v[r]
            candidate = v[r] - step if subtract else v[r] + step
            if movable[r] and lo <= candidate <= hi:
                v[r] = candidate
                if record:
                    changes[k, r] = step
                    applied[k, r] = 1
    return v, changes_arr, applied_arr


def decode_feature(values, changes, applied, double rate, double threshold):
    """See numpy_backend.decode_feature; identical contract and results."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] v = np.array(values, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] ch = np.ascontiguousarray(changes, dtype=np.float64)
    cdef cnp.ndarray[cnp.uint8_t, ndim=2] act = np.ascontiguousarray(applied, dtype=np.uint8)
    cdef Py_ssize_t n_bits = ch.shape[0]
    cdef Py_ssize_t n = v.shape[0]

    cdef cnp.ndarray[cnp.int64_t, ndim=1] ones = np.zeros(n_bits, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] zeros = np.zeros(n_bits, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] crosses = np.zeros(n_bits, dtype=np.int64)
    cdef cnp.ndarray[cnp.int8_t, ndim=1] bits = np.full(n_bits, -1, dtype=np.int8)

    cdef Py_ssize_t k, r
    cdef long o, z, votes
    cdef double residual
    cdef int decoded

    for k in range(n_bits - 1, -1, -1):
        o = 0
        z = 0
        votes = 0
        for r in range(n):
            if act[k, r]:
                votes += 1
                residual = rate * v[r] - ch[k, r]
                if residual <= 0.0:
                    o += 1
                elif residual <= threshold:
                    z += 1
        ones[k] = o
        zeros[k] = z
        crosses[k] = votes - o - z
        decoded = 1 if o > z else 0
        if o + z > 0:
            bits[k] = decoded
        if decoded == 1:
            for r in range(n):
                if act[k, r]:
                    v[r] = v[r] + ch[k, r]
        else:
            for r in range(n):
                if act[k, r]:
                    v[r] = v[r] - ch[k, r]
    return ones, zeros, crosses, bits, v
