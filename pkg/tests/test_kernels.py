"""Packed n-gram kernels: backend parity and packing correctness.

Both backends must return *identical* dicts (integer arithmetic only),
so the Cython build can never change pipeline results, only speed.
"""

import pytest
from hypothesis import given, strategies as st

from countersel import kernels
from countersel import _kernels_py as py_impl

try:
    from countersel import _kernels_cy as cy_impl
except ImportError:
    cy_impl = None

BACKENDS = [pytest.param(py_impl, id="python")] + (
    [pytest.param(cy_impl, id="cython")]
    if cy_impl is not None
    else [pytest.param(None, id="cython", marks=pytest.mark.skip(reason="extension not built"))]
)


def naive_packed_counts(ids, n, base):
    counts = {}
    for i in range(len(ids) - n + 1):
        key = 0
        for j in range(n):
            key = key * base + ids[i + j]
        counts[key] = counts.get(key, 0) + 1
    return counts


@pytest.mark.parametrize("impl", BACKENDS)
class TestCountNgramsPacked:
    def test_hand_case(self, impl):
        # "a b a b" with a=0, b=1, base 2: ab=1 twice, ba=2 once
        assert impl.count_ngrams_packed([0, 1, 0, 1], 2, 2) == {1: 2, 2: 1}

    def test_too_short_returns_empty(self, impl):
        assert impl.count_ngrams_packed([0, 1], 3, 2) == {}
        assert impl.count_ngrams_packed([], 1, 2) == {}

    def test_rejects_zero_order(self, impl):
        with pytest.raises(ValueError):
            impl.count_ngrams_packed([0], 0, 2)

    @given(
        ids=st.lists(st.integers(0, 6), max_size=50),
        n=st.integers(1, 4),
    )
    def test_matches_naive_packing(self, impl, ids, n):
        assert impl.count_ngrams_packed(ids, n, 7) == naive_packed_counts(ids, n, 7)


@pytest.mark.parametrize("impl", BACKENDS)
class TestMergeAndClip:
    def test_max_merge(self, impl):
        dst = {1: 2, 2: 1}
        impl.max_merge(dst, {1: 1, 2: 5, 3: 4})
        assert dst == {1: 2, 2: 5, 3: 4}

    def test_clipped_total(self, impl):
        assert impl.clipped_total({1: 3, 2: 1, 9: 4}, {1: 2, 2: 5}) == 3

    def test_tuple_keys_supported(self, impl):
        # metrics falls back to tuple keys when packing would overflow
        dst = {("a", "b"): 1}
        impl.max_merge(dst, {("a", "b"): 3, ("b",): 2})
        assert dst == {("a", "b"): 3, ("b",): 2}
        assert impl.clipped_total({("a", "b"): 2}, dst) == 2

    @given(
        hyp=st.dictionaries(st.integers(0, 20), st.integers(1, 9), max_size=12),
        ref=st.dictionaries(st.integers(0, 20), st.integers(1, 9), max_size=12),
    )
    def test_clipped_total_formula(self, impl, hyp, ref):
        expected = sum(min(v, ref.get(k, 0)) for k, v in hyp.items())
        assert impl.clipped_total(hyp, ref) == expected


@pytest.mark.skipif(cy_impl is None, reason="extension not built")
class TestBackendParity:
    @given(
        ids=st.lists(st.integers(0, 99), max_size=80),
        n=st.integers(1, 5),
    )
    def test_identical_counts(self, ids, n):
        assert py_impl.count_ngrams_packed(ids, n, 100) == cy_impl.count_ngrams_packed(
            ids, n, 100
        )

    def test_selected_backend_exports_kernel_functions(self):
        assert kernels.BACKEND in ("python", "cython")
        assert kernels.count_ngrams_packed([1, 2], 1, 3) == {1: 1, 2: 1}


class TestPackFits:
    def test_boundaries(self):
        assert kernels.pack_fits(10, 4)
        assert not kernels.pack_fits(0, 1)
        # 2^31 squared is exactly the 2^62 limit; one less fits
        assert not kernels.pack_fits(2**31, 2)
        assert kernels.pack_fits(2**31 - 1, 2)

    def test_large_vocab_small_order(self):
        assert kernels.pack_fits(10**6, 3)
        assert not kernels.pack_fits(10**6, 11)
