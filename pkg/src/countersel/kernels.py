"""Backend selection for the n-gram counting kernels.

The compiled extension is preferred when it was built; the pure-Python
mirror is the fallback. Both produce identical results (integer
arithmetic only), so the choice never affects pipeline outputs, only
speed. ``COUNTERSEL_KERNELS=py|cy`` forces a backend, which the tests
and the benchmark use to compare the two.
"""

import os

_forced = os.environ.get("COUNTERSEL_KERNELS", "").strip().lower()

if _forced == "py":
    from countersel import _kernels_py as _impl

    BACKEND = "python"
elif _forced == "cy":
    from countersel import _kernels_cy as _impl  # type: ignore[no-redef]

    BACKEND = "cython"
else:
    try:
        from countersel import _kernels_cy as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        from countersel import _kernels_py as _impl

        BACKEND = "python"

count_ngrams_packed = _impl.count_ngrams_packed
max_merge = _impl.max_merge
clipped_total = _impl.clipped_total

# int64 headroom for packed keys; beyond this the caller must use tuples
_PACK_LIMIT = 2**62


def pack_fits(vocab_size: int, n: int) -> bool:
    """True when n-grams over this vocabulary pack into signed 64 bits."""
    return vocab_size > 0 and vocab_size**n < _PACK_LIMIT
