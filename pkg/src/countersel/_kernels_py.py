"""Pure-Python n-gram counting kernels.

Mirror of the compiled extension ``_kernels_cy``; the two backends must
return identical objects for identical inputs (integer arithmetic only,
so there is no tolerance involved). Keys are n-grams packed into one
integer: ``id0*base**(n-1) + id1*base**(n-2) + ... + id_{n-1}`` with
every id in ``[0, base)``.
"""


def count_ngrams_packed(ids, n, base):
    """Count the sliding-window n-grams of an id sequence.

    Returns a dict mapping packed n-gram keys to occurrence counts.
    """
    counts = {}
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if len(ids) - n + 1 <= 0:
        return counts
    mod = base ** (n - 1)
    key = 0
    for i in range(n):
        key = key * base + ids[i]
    counts[key] = 1
    for i in range(n, len(ids)):
        key = (key % mod) * base + ids[i]
        counts[key] = counts.get(key, 0) + 1
    return counts


def max_merge(dst, src):
    """Per-key maximum merge of ``src`` into ``dst`` (in place)."""
    for key, value in src.items():
        if value > dst.get(key, 0):
            dst[key] = value


def clipped_total(hyp, ref):
    """Sum over hypothesis n-grams of min(count, reference count)."""
    total = 0
    for key, value in hyp.items():
        cap = ref.get(key, 0)
        total += value if value < cap else cap
    return total
