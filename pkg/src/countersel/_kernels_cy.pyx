# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled n-gram counting kernels.

Behavioral mirror of ``_kernels_py``; see that module for the packing
scheme. Integer-only arithmetic, so both backends return identical
dicts. Callers guarantee ``base ** n`` fits in a signed 64-bit integer
(the metrics layer falls back to tuple keys otherwise).
"""

from libc.stdint cimport int64_t


def count_ngrams_packed(list ids, int n, int64_t base):
    """Count the sliding-window n-grams of an id sequence."""
    cdef dict counts = {}
    cdef Py_ssize_t m = len(ids)
    cdef Py_ssize_t i
    cdef int64_t key = 0
    cdef int64_t mod = 1
    cdef object prev
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if m - n + 1 <= 0:
        return counts
    for i in range(n - 1):
        mod *= base
    for i in range(n):
        key = key * base + <int64_t> ids[i]
    counts[key] = 1
    for i in range(n, m):
        key = (key % mod) * base + <int64_t> ids[i]
        prev = counts.get(key)
        if prev is None:
            counts[key] = 1
        else:
            counts[key] = <int64_t> prev + 1
    return counts


def max_merge(dict dst, dict src):
    """Per-key maximum merge of ``src`` into ``dst`` (in place)."""
    cdef object key, value, cur
    for key, value in src.items():
        cur = dst.get(key)
        if cur is None or value > cur:
            dst[key] = value


def clipped_total(dict hyp, dict ref):
    """Sum over hypothesis n-grams of min(count, reference count)."""
    cdef int64_t total = 0
    cdef int64_t v, cap
    cdef object key, value, r
    for key, value in hyp.items():
        r = ref.get(key)
        if r is None:
            continue
        v = <int64_t> value
        cap = <int64_t> r
        total += v if v < cap else cap
    return total
