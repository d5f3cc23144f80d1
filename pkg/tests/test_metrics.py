"""Diversity, overlap, and relevance metrics plus run-level evaluation."""

import math

import pytest
from hypothesis import given, settings, strategies as st

from countersel.corpus import ConversationPair, CounterspeechInstance, HateSpeechInstance
from countersel.metrics import (
    BLEU_EPSILON,
    bleu_n,
    bm25,
    build_bm25_stats,
    dist_n,
    ent_n,
    evaluate_run,
    rouge_2,
    self_bleu_n,
)

words = st.sampled_from(["a", "b", "c", "d", "ee", "ff"])
sentences = st.lists(words, min_size=0, max_size=8).map(" ".join)


def naive_self_bleu(outputs, n, indices=None):
    """Direct composition: each output scored against all the others."""
    chosen = range(len(outputs)) if indices is None else indices
    total = 0.0
    for i in chosen:
        rest = outputs[:i] + outputs[i + 1 :]
        total += bleu_n(outputs[i], rest, n)
    return total / len(list(chosen))


class TestDistinct:
    def test_hand_case_unigrams(self):
        # tokens: a b a c -> 3 unique of 4
        assert dist_n(["a b", "a c"], 1) == pytest.approx(0.75, abs=1e-12)

    def test_hand_case_repeated(self):
        assert dist_n(["a a"], 1) == pytest.approx(0.5, abs=1e-12)

    def test_hand_case_bigrams(self):
        # bigrams: (a,b) (b,a) (a,b) -> 2 unique of 3
        assert dist_n(["a b a b"], 2) == pytest.approx(2 / 3, abs=1e-12)

    def test_all_distinct_is_one(self):
        assert dist_n(["a b", "c d"], 1) == 1.0

    def test_no_ngrams_is_zero(self):
        assert dist_n(["a", "b"], 2) == 0.0
        assert dist_n([""], 1) == 0.0

    def test_input_validation(self):
        with pytest.raises(ValueError):
            dist_n([], 1)
        with pytest.raises(ValueError):
            dist_n(["a"], 0)

    @given(st.lists(sentences, min_size=1, max_size=6), st.integers(1, 3))
    @settings(max_examples=60, deadline=None)
    def test_bounded_by_one(self, outputs, n):
        value = dist_n(outputs, n)
        assert 0.0 <= value <= 1.0

    @given(st.lists(sentences, min_size=2, max_size=6), st.integers(1, 2))
    @settings(max_examples=40, deadline=None)
    def test_order_invariant(self, outputs, n):
        assert dist_n(outputs, n) == dist_n(list(reversed(outputs)), n)


class TestEntropy:
    def test_uniform_distribution_is_log_k(self):
        """K equally frequent n-grams carry ln(K) nats."""
        assert ent_n(["a b c d"], 1) == pytest.approx(math.log(4), abs=1e-12)

    def test_single_repeated_ngram_is_zero(self):
        assert ent_n(["a a a a"], 1) == pytest.approx(0.0, abs=1e-12)

    def test_hand_case_skewed(self):
        # counts {a: 2, b: 1, c: 1}, F = 4:
        # -(1/4) * (2 ln(1/2) + ln(1/4) + ln(1/4)) = 1.5 ln 2
        assert ent_n(["a a b c"], 1) == pytest.approx(1.5 * math.log(2), abs=1e-12)

    def test_no_ngrams_is_zero(self):
        assert ent_n(["a"], 3) == 0.0

    def test_input_validation(self):
        with pytest.raises(ValueError):
            ent_n([], 1)
        with pytest.raises(ValueError):
            ent_n(["a"], 0)

    @given(st.lists(sentences, min_size=1, max_size=6), st.integers(1, 2))
    @settings(max_examples=60, deadline=None)
    def test_bounded_by_log_distinct(self, outputs, n):
        """Entropy never exceeds ln(#distinct n-grams)."""
        value = ent_n(outputs, n)
        assert value >= 0.0
        distinct = dist_n(outputs, n) * sum(
            max(0, len(out.split()) - n + 1) for out in outputs
        )
        if distinct >= 1:
            assert value <= math.log(distinct) + 1e-9

    @given(st.lists(sentences, min_size=2, max_size=6), st.integers(1, 2))
    @settings(max_examples=40, deadline=None)
    def test_order_invariant(self, outputs, n):
        assert ent_n(outputs, n) == pytest.approx(
            ent_n(list(reversed(outputs)), n), abs=1e-12
        )


class TestBleu:
    def test_hand_case_two_thirds_overlap(self):
        # p1 = 2/3, p2 = 1/2, lengths equal -> sqrt(1/3)
        assert bleu_n("a b c", ["a b d"], 2) == pytest.approx(
            math.sqrt(1 / 3), abs=1e-12
        )

    def test_identical_is_one(self):
        assert bleu_n("a b c", ["a b c"], 2) == 1.0

    def test_empty_hypothesis_is_zero(self):
        assert bleu_n("", ["a b"], 2) == 0.0

    def test_zero_overlap_hits_epsilon_floor(self):
        # both precisions floor at epsilon, lengths equal
        assert bleu_n("x y", ["a b"], 2) == pytest.approx(BLEU_EPSILON, rel=1e-9)

    def test_brevity_penalty_short_hypothesis(self):
        # p1 = 1, hyp len 1 vs ref len 3 -> exp(1 - 3)
        assert bleu_n("a", ["a b c"], 1) == pytest.approx(math.exp(-2.0), abs=1e-12)

    def test_closest_reference_length_tie_prefers_smaller(self):
        """Hyp len 2, refs of len 1 and 3: the tie resolves to 1, so no penalty."""
        score = bleu_n("a b", ["a", "a b c"], 2)
        assert score == pytest.approx(1.0, abs=1e-12)

    def test_clipping_uses_max_reference_count(self):
        # "a a a" vs refs with at most two a's: p1 = 2/3
        assert bleu_n("a a a", ["a a", "a"], 1) == pytest.approx(2 / 3, abs=1e-12)

    def test_input_validation(self):
        with pytest.raises(ValueError):
            bleu_n("a", [], 1)
        with pytest.raises(ValueError):
            bleu_n("a", ["a"], 0)

    @given(sentences, st.lists(sentences, min_size=1, max_size=4), st.integers(1, 3))
    @settings(max_examples=80, deadline=None)
    def test_bounded(self, hyp, refs, n):
        assert 0.0 <= bleu_n(hyp, refs, n) <= 1.0

    @given(sentences.filter(lambda s: s.strip()))
    @settings(max_examples=40, deadline=None)
    def test_self_reference_is_one(self, text):
        assert bleu_n(text, [text], 1) == 1.0


class TestSelfBleu:
    def test_matches_naive_composition_hand_case(self):
        outputs = ["a b c", "a b d", "c d"]
        for n in (1, 2):
            assert self_bleu_n(outputs, n) == naive_self_bleu(outputs, n)

    def test_identical_outputs_score_one(self):
        assert self_bleu_n(["a b", "a b", "a b"], 2) == pytest.approx(1.0, abs=1e-12)

    def test_duplicates_and_empties(self):
        outputs = ["a b", "a b", "", "c", "a b c d"]
        for n in (1, 2):
            assert self_bleu_n(outputs, n) == naive_self_bleu(outputs, n)

    def test_sample_covers_chosen_indices_only(self):
        outputs = ["a b c", "b c d", "c d e", "d e f", "e f a"]
        import random

        chosen = sorted(random.Random(11).sample(range(5), 3))
        assert self_bleu_n(outputs, 2, sample=3, seed=11) == pytest.approx(
            naive_self_bleu(outputs, 2, indices=chosen), abs=1e-15
        )

    def test_sample_at_least_population_is_full(self):
        outputs = ["a b", "b c", "c d"]
        assert self_bleu_n(outputs, 2, sample=3) == self_bleu_n(outputs, 2)
        assert self_bleu_n(outputs, 2, sample=99) == self_bleu_n(outputs, 2)

    def test_input_validation(self):
        with pytest.raises(ValueError):
            self_bleu_n(["only one"], 1)
        with pytest.raises(ValueError):
            self_bleu_n(["a", "b"], 0)
        with pytest.raises(ValueError):
            self_bleu_n(["a", "b"], 1, sample=0)

    @given(st.lists(sentences, min_size=2, max_size=6), st.integers(1, 2))
    @settings(max_examples=60, deadline=None)
    def test_fast_path_equals_naive(self, outputs, n):
        """The one-pass implementation is bit-identical to recomputing
        BLEU against the leave-one-out reference set."""
        assert self_bleu_n(outputs, n) == naive_self_bleu(outputs, n)


class TestRouge2:
    def test_hand_case_half(self):
        # one shared bigram of two on each side -> P = R = F1 = 0.5
        assert rouge_2("a b c", ["a b d"]) == pytest.approx(0.5, abs=1e-12)

    def test_identical_is_one(self):
        assert rouge_2("a b c", ["a b c"]) == 1.0

    def test_max_over_references(self):
        assert rouge_2("a b c", ["x y", "a b c"]) == 1.0

    def test_no_bigrams_is_zero(self):
        assert rouge_2("a", ["a b"]) == 0.0
        assert rouge_2("a b", ["a"]) == 0.0

    def test_input_validation(self):
        with pytest.raises(ValueError):
            rouge_2("a b", [])

    @given(sentences, st.lists(sentences, min_size=1, max_size=3))
    @settings(max_examples=60, deadline=None)
    def test_bounded(self, hyp, refs):
        assert 0.0 <= rouge_2(hyp, refs) <= 1.0


class TestBm25:
    DOCS = ["a b", "b c", "c d"]

    def test_hand_case_average_length_document(self):
        """At |doc| = avg length the tf normalizer reduces to f + k1,
        so a single-occurrence term scores exactly its idf."""
        stats = build_bm25_stats(self.DOCS)
        idf_a = math.log((3 - 1 + 0.5) / (1 + 0.5) + 1.0)
        assert bm25("a", "a b", stats) == pytest.approx(idf_a, abs=1e-12)

    def test_additive_over_query_terms(self):
        stats = build_bm25_stats(self.DOCS)
        combined = bm25("a b", "a b", stats)
        assert combined == pytest.approx(
            bm25("a", "a b", stats) + bm25("b", "a b", stats), abs=1e-12
        )

    def test_repeated_query_token_counts_twice(self):
        stats = build_bm25_stats(self.DOCS)
        assert bm25("a a", "a b", stats) == pytest.approx(
            2 * bm25("a", "a b", stats), abs=1e-12
        )

    def test_no_shared_terms_is_zero(self):
        stats = build_bm25_stats(self.DOCS)
        assert bm25("z", "a b", stats) == 0.0

    def test_common_term_scores_below_rare_term(self):
        stats = build_bm25_stats(self.DOCS)  # df(b) = 2 > df(a) = 1
        assert bm25("b", "a b", stats) < bm25("a", "a b", stats)

    def test_empty_corpus_rejected(self):
        stats = build_bm25_stats([])
        with pytest.raises(ValueError):
            bm25("a", "a", stats)

    def test_all_empty_documents_score_zero(self):
        stats = build_bm25_stats(["", ""])
        assert bm25("a", "a", stats) == 0.0

    def test_parameter_validation(self):
        stats = build_bm25_stats(self.DOCS)
        with pytest.raises(ValueError):
            bm25("a", "a", stats, k1=0.0)
        with pytest.raises(ValueError):
            bm25("a", "a", stats, b=1.5)

    @given(sentences, sentences)
    @settings(max_examples=60, deadline=None)
    def test_non_negative(self, query, doc):
        stats = build_bm25_stats(self.DOCS)
        assert bm25(query, doc, stats) >= 0.0


def make_pairs(spec):
    """Build conversation pairs from {hate_id: (hate_text, [counters])}."""
    pairs = []
    for hid, (hate_text, counters) in spec.items():
        hate = HateSpeechInstance(id=hid, text=hate_text)
        for j, text in enumerate(counters):
            pairs.append(
                ConversationPair(
                    hate=hate,
                    counter=CounterspeechInstance(id=f"{hid}-c{j}", text=text),
                )
            )
    return pairs


class TestEvaluateRun:
    SPEC = {
        "h000000": ("why do they exist", ["everyone belongs here", "be kind instead"]),
        "h000001": ("they ruin everything", ["facts say otherwise today"]),
        "h000002": ("send them away", ["we grow stronger together"]),
    }

    def test_gold_outputs_score_perfect_overlap(self):
        pairs = make_pairs(self.SPEC)
        outputs = {
            "h000000": "everyone belongs here",
            "h000001": "facts say otherwise today",
            "h000002": "we grow stronger together",
        }
        report = evaluate_run(pairs, outputs, strategy="gps")
        assert report.strategy == "gps"
        assert report.count == 3
        assert report.bleu2 == pytest.approx(1.0, abs=1e-12)
        assert report.rouge2 == pytest.approx(1.0, abs=1e-12)

    def test_identical_outputs_maximize_self_bleu(self):
        pairs = make_pairs(self.SPEC)
        outputs = {hid: "same words every time" for hid in self.SPEC}
        report = evaluate_run(pairs, outputs)
        assert report.selfbleu1 == pytest.approx(1.0, abs=1e-12)
        assert report.selfbleu2 == pytest.approx(1.0, abs=1e-12)
        assert report.dist1 == pytest.approx(4 / 12, abs=1e-12)

    def test_single_instance_reports_zero_self_bleu(self):
        pairs = make_pairs({"h000000": ("first", ["a b"])})
        report = evaluate_run(pairs, {"h000000": "a b"})
        assert report.selfbleu1 == 0.0
        assert report.selfbleu2 == 0.0

    def test_metric_means_are_instance_averages(self):
        pairs = make_pairs(
            {
                "h000000": ("x", ["a b c"]),
                "h000001": ("y", ["d e f"]),
            }
        )
        outputs = {"h000000": "a b c", "h000001": "q r s"}
        report = evaluate_run(pairs, outputs)
        expected = (rouge_2("a b c", ["a b c"]) + rouge_2("q r s", ["d e f"])) / 2
        assert report.rouge2 == pytest.approx(expected, abs=1e-12)

    def test_output_set_mismatch_rejected(self):
        pairs = make_pairs(self.SPEC)
        outputs = {"h000000": "a", "h000001": "b", "h000009": "c"}
        with pytest.raises(ValueError, match="h000002"):
            evaluate_run(pairs, outputs)

    def test_external_scores_are_averaged(self):
        pairs = make_pairs(self.SPEC)
        outputs = {hid: "reply" for hid in self.SPEC}
        external = {"ms": {"h000000": 0.2, "h000001": 0.4, "h000002": 0.9}}
        report = evaluate_run(pairs, outputs, external_scores=external)
        assert report.external["ms"] == pytest.approx(0.5, abs=1e-12)

    def test_external_scores_must_cover_every_instance(self):
        pairs = make_pairs(self.SPEC)
        outputs = {hid: "reply" for hid in self.SPEC}
        external = {"ms": {"h000000": 0.2, "h000001": 0.4}}
        with pytest.raises(ValueError, match="ms"):
            evaluate_run(pairs, outputs, external_scores=external)

    def test_report_serializes_to_flat_dict(self):
        pairs = make_pairs(self.SPEC)
        outputs = {hid: "calm words win" for hid in self.SPEC}
        report = evaluate_run(
            pairs, outputs, strategy="s-cos", config_hash="abc123"
        )
        payload = report.as_dict()
        assert payload["strategy"] == "s-cos"
        assert payload["config_hash"] == "abc123"
        assert payload["count"] == 3
        assert set(payload) >= {"dist1", "dist2", "ent1", "ent2", "bleu2", "rouge2"}
