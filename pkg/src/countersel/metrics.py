"""Automatic evaluation: Dist-n, Ent-n, BLEU, Self-BLEU, ROUGE-2, BM25.

Conventions, recorded here because the metrics exist in many variants:
natural log everywhere; BLEU uses clipped modified precisions with a
multiplicative brevity penalty against the closest reference length and
an epsilon floor (1e-9) on zero-count precisions; ROUGE-2 is bigram F1,
max over references; BM25 is the Okapi form with idf(t) =
ln((N - df + 0.5)/(df + 0.5) + 1), which is non-negative for every df.

Self-BLEU treats each output as a hypothesis against all other outputs
as references. The implementation avoids the quadratic reference merge:
per n-gram order it keeps the two largest per-document counts of every
gram (and how many documents attain the largest), which is enough to
recover each hypothesis's leave-one-out clipped counts exactly.
"""

from __future__ import annotations

import bisect
import math
import random
from collections import Counter
from dataclasses import dataclass, field

from countersel import kernels
from countersel.text import tokenize

BLEU_EPSILON = 1e-9
BM25_K1 = 1.5
BM25_B = 0.75


def _encode(texts: list[str]) -> tuple[list[list[int]], int]:
    """Map token strings to dense integer ids shared across the texts."""
    vocab: dict[str, int] = {}
    encoded: list[list[int]] = []
    for text in texts:
        row: list[int] = []
        for token in tokenize(text):
            if token not in vocab:
                vocab[token] = len(vocab)
            row.append(vocab[token])
        encoded.append(row)
    return encoded, len(vocab)


def _counts(ids: list[int], n: int, base: int | None) -> dict:
    """N-gram counts keyed by packed integer (fast path) or tuple."""
    if base is not None:
        return kernels.count_ngrams_packed(ids, n, base)
    out: dict = {}
    for i in range(len(ids) - n + 1):
        key = tuple(ids[i : i + n])
        out[key] = out.get(key, 0) + 1
    return out


def _pack_base(vocab_size: int, n: int) -> int | None:
    return vocab_size if kernels.pack_fits(vocab_size, n) else None


def dist_n(outputs: list[str], n: int) -> float:
    """Unique n-grams across all outputs divided by total n-grams."""
    if not outputs:
        raise ValueError("outputs must be non-empty")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    encoded, vocab_size = _encode(outputs)
    base = _pack_base(vocab_size, n)
    unique: set = set()
    total = 0
    for ids in encoded:
        total += max(0, len(ids) - n + 1)
        unique.update(_counts(ids, n, base).keys())
    if total == 0:
        return 0.0
    return len(unique) / total


def ent_n(outputs: list[str], n: int) -> float:
    """Entropy of the empirical n-gram distribution (natural log)."""
    if not outputs:
        raise ValueError("outputs must be non-empty")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    encoded, vocab_size = _encode(outputs)
    base = _pack_base(vocab_size, n)
    merged: dict = {}
    for ids in encoded:
        for key, count in _counts(ids, n, base).items():
            merged[key] = merged.get(key, 0) + count
    total = sum(merged.values())
    if total == 0:
        return 0.0
    return -sum(f * math.log(f / total) for f in merged.values()) / total


def _geometric_bleu(precisions: list[float], brevity: float) -> float:
    return brevity * math.exp(sum(math.log(p) for p in precisions) / len(precisions))


def _brevity_penalty(hyp_len: int, ref_lens: list[int]) -> float:
    closest = min(ref_lens, key=lambda r: (abs(r - hyp_len), r))
    if hyp_len >= closest:
        return 1.0
    return math.exp(1.0 - closest / hyp_len)


def bleu_n(hypothesis: str, references: list[str], n: int) -> float:
    """Multi-reference BLEU over orders 1..n with epsilon smoothing."""
    if not references:
        raise ValueError("references must be non-empty")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    encoded, vocab_size = _encode([hypothesis] + list(references))
    hyp = encoded[0]
    refs = encoded[1:]
    if not hyp:
        return 0.0
    precisions: list[float] = []
    for k in range(1, n + 1):
        base = _pack_base(vocab_size, k)
        total = max(0, len(hyp) - k + 1)
        if total == 0:
            precisions.append(BLEU_EPSILON)
            continue
        hyp_counts = _counts(hyp, k, base)
        ref_max: dict = {}
        for ref in refs:
            kernels.max_merge(ref_max, _counts(ref, k, base))
        clipped = kernels.clipped_total(hyp_counts, ref_max)
        precisions.append(clipped / total if clipped > 0 else BLEU_EPSILON)
    brevity = _brevity_penalty(len(hyp), [len(r) for r in refs])
    return _geometric_bleu(precisions, brevity)


class _LeaveOneOutMax:
    """Per-gram top-2 document counts; enough for exact leave-one-out max."""

    def __init__(self, per_doc_counts: list[dict]):
        self.max1: dict = {}
        self.max2: dict = {}
        self.attain: dict = {}
        for counts in per_doc_counts:
            for key, c in counts.items():
                m1 = self.max1.get(key, 0)
                if c > m1:
                    self.max2[key] = m1
                    self.max1[key] = c
                    self.attain[key] = 1
                elif c == m1:
                    self.attain[key] = self.attain.get(key, 0) + 1
                elif c > self.max2.get(key, 0):
                    self.max2[key] = c

    def clipped_without(self, counts: dict) -> int:
        """Σ min(count, max over all other documents) for this document."""
        total = 0
        for key, c in counts.items():
            m1 = self.max1[key]
            if c == m1 and self.attain[key] == 1:
                other = self.max2.get(key, 0)
            else:
                other = m1
            total += min(c, other)
        return total


def _closest_other_length(sorted_lens: list[int], len_counts: Counter, own: int) -> int:
    if len_counts[own] >= 2:
        return own
    i = bisect.bisect_left(sorted_lens, own)
    left = sorted_lens[i - 1] if i > 0 else None
    j = bisect.bisect_right(sorted_lens, own)
    right = sorted_lens[j] if j < len(sorted_lens) else None
    if left is None:
        return right  # m >= 2 guarantees at least one other document
    if right is None:
        return left
    return min((left, right), key=lambda r: (abs(r - own), r))


def self_bleu_n(
    outputs: list[str], n: int, sample: int | None = None, seed: int = 0
) -> float:
    """Mean BLEU of each output against all the others.

    Equals the direct composition mean(bleu_n(outputs[i], rest, n)) but
    runs in one pass per order instead of re-merging references per
    hypothesis. ``sample`` caps how many hypotheses are scored (chosen
    with the seeded RNG); references always remain the full set.
    """
    m = len(outputs)
    if m < 2:
        raise ValueError(f"self-BLEU needs at least 2 outputs, got {m}")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if sample is not None and sample < 1:
        raise ValueError(f"sample must be >= 1, got {sample}")
    encoded, vocab_size = _encode(outputs)
    lens = [len(ids) for ids in encoded]
    sorted_lens = sorted(lens)
    len_counts = Counter(lens)

    if sample is not None and sample < m:
        chosen = sorted(random.Random(seed).sample(range(m), sample))
    else:
        chosen = list(range(m))

    # precision components per order, for every document
    clipped: list[list[int]] = []
    for k in range(1, n + 1):
        base = _pack_base(vocab_size, k)
        per_doc = [_counts(ids, k, base) for ids in encoded]
        loo = _LeaveOneOutMax(per_doc)
        clipped.append([loo.clipped_without(counts) for counts in per_doc])

    total = 0.0
    for i in chosen:
        if lens[i] == 0:
            continue  # empty hypothesis scores 0
        precisions: list[float] = []
        for k in range(1, n + 1):
            denom = max(0, lens[i] - k + 1)
            if denom == 0:
                precisions.append(BLEU_EPSILON)
                continue
            c = clipped[k - 1][i]
            precisions.append(c / denom if c > 0 else BLEU_EPSILON)
        closest = _closest_other_length(sorted_lens, len_counts, lens[i])
        brevity = 1.0 if lens[i] >= closest else math.exp(1.0 - closest / lens[i])
        total += _geometric_bleu(precisions, brevity)
    return total / len(chosen)


def rouge_2(hypothesis: str, references: list[str]) -> float:
    """Bigram F1, maximized over the references."""
    if not references:
        raise ValueError("references must be non-empty")
    encoded, vocab_size = _encode([hypothesis] + list(references))
    base = _pack_base(vocab_size, 2)
    hyp_counts = _counts(encoded[0], 2, base)
    hyp_total = sum(hyp_counts.values())
    if hyp_total == 0:
        return 0.0
    best = 0.0
    for ref in encoded[1:]:
        ref_counts = _counts(ref, 2, base)
        ref_total = sum(ref_counts.values())
        if ref_total == 0:
            continue
        overlap = kernels.clipped_total(hyp_counts, ref_counts)
        if overlap == 0:
            continue
        precision = overlap / hyp_total
        recall = overlap / ref_total
        best = max(best, 2.0 * precision * recall / (precision + recall))
    return best


@dataclass
class Bm25Stats:
    """Corpus statistics BM25 scores against."""

    n_docs: int
    avg_len: float
    df: dict[str, int]


def build_bm25_stats(docs: list[str]) -> Bm25Stats:
    df: dict[str, int] = {}
    total_len = 0
    for doc in docs:
        tokens = tokenize(doc)
        total_len += len(tokens)
        for token in set(tokens):
            df[token] = df.get(token, 0) + 1
    n = len(docs)
    return Bm25Stats(n_docs=n, avg_len=total_len / n if n else 0.0, df=df)


def bm25(query: str, doc: str, stats: Bm25Stats, k1: float = BM25_K1, b: float = BM25_B) -> float:
    """Okapi BM25 of ``doc`` for ``query``, additive over query tokens."""
    if stats.n_docs == 0:
        raise ValueError("BM25 requires non-empty corpus statistics")
    if k1 <= 0:
        raise ValueError(f"k1 must be > 0, got {k1}")
    if not (0.0 <= b <= 1.0):
        raise ValueError(f"b must be in [0, 1], got {b}")
    doc_tokens = tokenize(doc)
    if not doc_tokens or stats.avg_len == 0.0:
        return 0.0
    tf = Counter(doc_tokens)
    norm = k1 * (1.0 - b + b * len(doc_tokens) / stats.avg_len)
    score = 0.0
    for term in tokenize(query):
        f = tf.get(term, 0)
        if f == 0:
            continue
        df = stats.df.get(term, 0)
        idf = math.log((stats.n_docs - df + 0.5) / (df + 0.5) + 1.0)
        score += idf * f * (k1 + 1.0) / (f + norm)
    return score


@dataclass
class MetricReport:
    """One evaluated strategy: the full metric row plus provenance."""

    strategy: str
    count: int
    dist1: float
    dist2: float
    ent1: float
    ent2: float
    selfbleu1: float
    selfbleu2: float
    bleu2: float
    rouge2: float
    bm25: float
    external: dict[str, float] = field(default_factory=dict)
    pool_fingerprint: str = ""
    config_hash: str = ""

    def as_dict(self) -> dict:
        return {
            "strategy": self.strategy,
            "count": self.count,
            "dist1": self.dist1,
            "dist2": self.dist2,
            "ent1": self.ent1,
            "ent2": self.ent2,
            "selfbleu1": self.selfbleu1,
            "selfbleu2": self.selfbleu2,
            "bleu2": self.bleu2,
            "rouge2": self.rouge2,
            "bm25": self.bm25,
            "external": dict(self.external),
            "pool_fingerprint": self.pool_fingerprint,
            "config_hash": self.config_hash,
        }


def evaluate_run(
    test_pairs,
    selected_outputs: dict[str, str],
    pool=None,
    external_scores: dict[str, dict[str, float]] | None = None,
    *,
    strategy: str = "",
    selfbleu_sample: int | None = None,
    selfbleu_seed: int = 0,
    config_hash: str = "",
) -> MetricReport:
    """Score one selected output per test hate speech.

    ``test_pairs`` is the dis-aggregated pair list; gold references are
    regrouped per hate speech so a response is compared against the full
    reference set. Diversity metrics and BM25 statistics are computed
    over the selected-output collection. ``external_scores`` maps a
    metric name to per-instance scores and must cover every instance.
    Self-BLEU of a single output is reported as 0.0 (no other outputs to
    overlap with).
    """
    order: list[str] = []
    refs: dict[str, list[str]] = {}
    queries: dict[str, str] = {}
    for pair in test_pairs:
        hid = pair.hate.id
        if hid not in refs:
            order.append(hid)
            refs[hid] = []
            queries[hid] = pair.hate.text
        refs[hid].append(pair.counter.text)
    expected = set(order)
    got = set(selected_outputs)
    if expected != got:
        missing = sorted(expected - got)
        extra = sorted(got - expected)
        raise ValueError(
            f"selected outputs do not match test instances "
            f"(missing {missing[:5]}, unexpected {extra[:5]})"
        )

    outputs = [selected_outputs[hid] for hid in order]
    if len(outputs) >= 2:
        sb1 = self_bleu_n(outputs, 1, sample=selfbleu_sample, seed=selfbleu_seed)
        sb2 = self_bleu_n(outputs, 2, sample=selfbleu_sample, seed=selfbleu_seed)
    else:
        sb1 = sb2 = 0.0

    stats = build_bm25_stats(outputs)
    n = len(order)
    bleu_total = rouge_total = bm25_total = 0.0
    for hid in order:
        out = selected_outputs[hid]
        bleu_total += bleu_n(out, refs[hid], 2)
        rouge_total += rouge_2(out, refs[hid])
        bm25_total += bm25(queries[hid], out, stats)

    external: dict[str, float] = {}
    if external_scores:
        for name in sorted(external_scores):
            per_instance = external_scores[name]
            uncovered = [hid for hid in order if hid not in per_instance]
            if uncovered:
                raise ValueError(
                    f"external metric {name!r} missing scores for {uncovered[:5]}"
                )
            external[name] = sum(per_instance[hid] for hid in order) / n

    return MetricReport(
        strategy=strategy,
        count=n,
        dist1=dist_n(outputs, 1),
        dist2=dist_n(outputs, 2),
        ent1=ent_n(outputs, 1),
        ent2=ent_n(outputs, 2),
        selfbleu1=sb1,
        selfbleu2=sb2,
        bleu2=bleu_total / n,
        rouge2=rouge_total / n,
        bm25=bm25_total / n,
        external=external,
        pool_fingerprint=pool.fingerprint() if pool is not None else "",
        config_hash=config_hash,
    )
