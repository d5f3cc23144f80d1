"""Candidate pool construction, Markov generation, and persistence."""

import hashlib

import pytest

from countersel.corpus import ConversationPair, CounterspeechInstance, HateSpeechInstance
from countersel.errors import ModelFitError
from countersel.pool import (
    Candidate,
    CandidatePool,
    build_base_pool,
    dedupe,
    extend_pool,
    generate_markov,
    ingest_candidates,
    load_pool,
    save_pool,
)


def pair(hid, cid, counter_text):
    return ConversationPair(
        hate=HateSpeechInstance(id=hid, text=f"hate {hid}"),
        counter=CounterspeechInstance(id=cid, text=counter_text),
    )


TRAIN = [
    pair("h1", "h1-c0", "respect everyone equally"),
    pair("h1", "h1-c1", "kindness costs nothing at all"),
    pair("h2", "h2-c0", "respect everyone equally"),  # duplicate text
    pair("h2", "h2-c1", "people deserve dignity and patience"),
]


class TestBasePool:
    def test_distinct_texts_first_occurrence(self):
        pool = build_base_pool(TRAIN)
        assert pool.texts() == [
            "respect everyone equally",
            "kindness costs nothing at all",
            "people deserve dignity and patience",
        ]
        assert pool.ids() == ["h1-c0", "h1-c1", "h2-c1"]
        assert all(c.source == "training" for c in pool)

    def test_empty_training_split_rejected(self):
        with pytest.raises(ValueError, match="empty training"):
            build_base_pool([])


class TestFingerprint:
    def test_matches_length_prefixed_sha256(self):
        pool = CandidatePool(
            candidates=[
                Candidate(id="a", text="xy", source="training"),
                Candidate(id="b", text="z", source="training"),
            ]
        )
        h = hashlib.sha256()
        h.update(b"2:xy")
        h.update(b"1:z")
        assert pool.fingerprint() == h.hexdigest()

    def test_framing_distinguishes_concatenations(self):
        # "ab"+"c" and "a"+"bc" concatenate identically; framing must not
        p1 = CandidatePool([Candidate("1", "ab", "training"), Candidate("2", "c", "training")])
        p2 = CandidatePool([Candidate("1", "a", "training"), Candidate("2", "bc", "training")])
        assert p1.fingerprint() != p2.fingerprint()

    def test_order_sensitive(self):
        a = Candidate("1", "x", "training")
        b = Candidate("2", "y", "training")
        assert CandidatePool([a, b]).fingerprint() != CandidatePool([b, a]).fingerprint()


class TestMarkovGeneration:
    def test_deterministic_given_seed(self):
        base = build_base_pool(TRAIN)
        first = generate_markov(base, count=10, order=2, seed=5)
        second = generate_markov(base, count=10, order=2, seed=5)
        assert [c.text for c in first] == [c.text for c in second]
        other = generate_markov(base, count=10, order=2, seed=6)
        assert [c.text for c in first] != [c.text for c in other]

    def test_ids_encode_seed_and_index(self):
        base = build_base_pool(TRAIN)
        out = generate_markov(base, count=3, order=1, seed=9)
        assert [c.id for c in out] == ["markov-9-00000", "markov-9-00001", "markov-9-00002"]
        assert all(c.source == "markov" for c in out)

    def test_prefix_stability(self):
        # walks are drawn sequentially, so a larger count extends a smaller one
        base = build_base_pool(TRAIN)
        small = generate_markov(base, count=5, order=2, seed=3)
        large = generate_markov(base, count=20, order=2, seed=3)
        assert [c.text for c in small] == [c.text for c in large[:5]]

    def test_respects_max_len(self):
        base = build_base_pool(TRAIN)
        for cand in generate_markov(base, count=30, order=1, max_len=4, seed=1):
            assert len(cand.text.split()) <= 4

    def test_order_larger_than_corpus_fails(self):
        base = build_base_pool(TRAIN)
        with pytest.raises(ModelFitError, match="order-50"):
            generate_markov(base, count=1, order=50)

    def test_nonempty_outputs(self):
        base = build_base_pool(TRAIN)
        for cand in generate_markov(base, count=50, order=2, seed=0):
            assert cand.text.strip()

    def test_vocabulary_closed_under_training_tokens(self):
        base = build_base_pool(TRAIN)
        allowed = set()
        for text in base.texts():
            allowed.update(text.split())
        for cand in generate_markov(base, count=40, order=1, seed=2):
            assert set(cand.text.split()) <= allowed


class TestIngestAndDedupe:
    def test_ingest_assigns_line_ids(self, tmp_path):
        path = tmp_path / "ext.txt"
        path.write_text("first response\n\nsecond response\n")
        out = ingest_candidates(path)
        assert [(c.id, c.text) for c in out] == [
            ("ext-000001", "first response"),
            ("ext-000003", "second response"),
        ]
        assert all(c.source == "external" for c in out)

    def test_dedupe_keeps_first(self):
        cands = [
            Candidate("a", "same", "training"),
            Candidate("b", "same", "markov"),
            Candidate("c", "other", "markov"),
        ]
        assert [c.id for c in dedupe(cands)] == ["a", "c"]

    def test_extend_pool_dedupes_against_base(self):
        base = build_base_pool(TRAIN)
        extra = [Candidate("m1", "respect everyone equally", "markov")]
        merged = extend_pool(base, extra)
        assert len(merged) == len(base)


class TestPersistence:
    def test_round_trip(self, tmp_path):
        pool = CandidatePool(
            candidates=[
                Candidate("a", "keep calm", "training"),
                Candidate("b", "be kind", "markov", grammaticality=-1.25),
            ]
        )
        path = tmp_path / "pool.jsonl"
        save_pool(pool, path)
        loaded = load_pool(path)
        assert loaded.candidates == pool.candidates
        assert loaded.fingerprint() == pool.fingerprint()
