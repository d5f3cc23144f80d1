"""Tokenizer and n-gram counting behavior."""

import pytest
from hypothesis import given, strategies as st

from countersel.text import NGramCounts, ngrams, tokenize


class TestTokenize:
    def test_lowercases_and_splits_punctuation(self):
        assert tokenize("Hello, world!") == ["hello", ",", "world", "!"]

    def test_whitespace_runs_collapse(self):
        assert tokenize("a \t b\n\nc") == ["a", "b", "c"]

    def test_punctuation_inside_word_splits(self):
        assert tokenize("don't stop") == ["don", "'", "t", "stop"]

    def test_empty_and_blank(self):
        assert tokenize("") == []
        assert tokenize("   \n\t ") == []

    def test_unicode_punctuation_is_standalone(self):
        # em-dash and curly quote are category P*
        assert tokenize("yes—no “maybe”") == ["yes", "—", "no", "“", "maybe", "”"]

    @given(st.text())
    def test_tokens_never_contain_whitespace(self, text):
        for token in tokenize(text):
            assert token == token.lower()
            assert not any(ch.isspace() for ch in token)
            assert token != ""


class TestNgrams:
    def test_bigram_counts(self):
        counts = ngrams(["a", "b", "a", "b"], 2)
        assert counts.counts == {("a", "b"): 2, ("b", "a"): 1}
        assert counts.total == 3

    def test_short_sequence_has_no_ngrams(self):
        counts = ngrams(["a"], 2)
        assert counts.counts == {}
        assert counts.total == 0

    def test_order_must_be_positive(self):
        with pytest.raises(ValueError):
            ngrams(["a"], 0)

    @given(st.lists(st.sampled_from("abcd"), max_size=30), st.integers(1, 4))
    def test_total_matches_window_count(self, tokens, n):
        counts = ngrams(tokens, n)
        assert counts.total == max(0, len(tokens) - n + 1)
        assert sum(counts.counts.values()) == counts.total

    def test_counts_are_frozen(self):
        counts = ngrams(["a", "b"], 1)
        assert isinstance(counts, NGramCounts)
        with pytest.raises(AttributeError):
            counts.total = 5
