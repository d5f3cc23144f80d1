"""Grammaticality scoring and pool pruning.

Ill-formed synthetic candidates are filtered before selection ever sees
them. Scoring is pluggable: the built-in scorer is an add-k smoothed
n-gram language model (mean log-probability per event, higher is more
fluent), and ``ExternalScorer`` reads precomputed per-candidate scores
from a file so a stronger acceptability model can be dropped in without
touching the pipeline. Pruning keeps either everything above a score
threshold or the top fraction of the pool, preserving pool order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

from countersel.errors import FormatError
from countersel.pool import Candidate, CandidatePool
from countersel.text import tokenize

# Keep-fractions observed when thresholding a stronger acceptability
# model on large generated batches; exposed as simulation presets.
KEEP_FRACTION_PRESETS = {
    "conan": 0.513,
    "reddit": 0.597,
    "gab": 0.635,
}

_EOS = "</s>"


class NgramLmScorer:
    """Add-k smoothed n-gram LM; score(text) = mean log-prob per event.

    Events are the tokens of the text plus one end-of-text event, so a
    text with m tokens is scored over m+1 events. The event space for
    smoothing is the training vocabulary plus the end sentinel: with V
    such outcomes, an unseen context scores each event 1/V, which makes
    the scorer exact on degenerate corpora (a uniform model over V
    outcomes gives score -ln V).
    """

    def __init__(self, order: int, counts, context_totals, vocabulary, add_k: float):
        self.order = order
        self._counts = counts
        self._context_totals = context_totals
        self.vocabulary = vocabulary
        self.add_k = add_k
        self._n_outcomes = len(vocabulary)

    def score(self, text: str) -> float:
        tokens = tokenize(text)
        if not tokens:
            return float("-inf")
        padded = ["<s>"] * (self.order - 1) + tokens + [_EOS]
        total = 0.0
        events = 0
        k = self.add_k
        v = self._n_outcomes
        for i in range(self.order - 1, len(padded)):
            context = tuple(padded[i - self.order + 1 : i])
            c_event = self._counts.get((context, padded[i]), 0)
            c_context = self._context_totals.get(context, 0)
            total += math.log((c_event + k) / (c_context + k * v))
            events += 1
        return total / events


def train_lm_scorer(texts: list[str], order: int = 2, add_k: float = 1.0) -> NgramLmScorer:
    if order < 1:
        raise ValueError(f"order must be >= 1, got {order}")
    if add_k <= 0:
        raise ValueError(f"add_k must be > 0, got {add_k}")
    counts: dict[tuple[tuple[str, ...], str], int] = {}
    context_totals: dict[tuple[str, ...], int] = {}
    vocab: set[str] = {_EOS}
    fitted_any = False
    for text in texts:
        tokens = tokenize(text)
        if not tokens:
            continue
        fitted_any = True
        vocab.update(tokens)
        padded = ["<s>"] * (order - 1) + tokens + [_EOS]
        for i in range(order - 1, len(padded)):
            context = tuple(padded[i - order + 1 : i])
            key = (context, padded[i])
            counts[key] = counts.get(key, 0) + 1
            context_totals[context] = context_totals.get(context, 0) + 1
    if not fitted_any:
        raise ValueError("cannot fit a language model on a corpus with no tokens")
    return NgramLmScorer(
        order=order,
        counts=counts,
        context_totals=context_totals,
        vocabulary=sorted(vocab),
        add_k=add_k,
    )


class ExternalScorer:
    """Per-candidate scores read from an ``id<TAB>score`` file."""

    def __init__(self, scores: dict[str, float]):
        self.scores = scores

    def score_id(self, candidate_id: str) -> float:
        if candidate_id not in self.scores:
            raise KeyError(f"no external grammaticality score for candidate {candidate_id!r}")
        return self.scores[candidate_id]


def load_external_scores(path: str | Path) -> ExternalScorer:
    scores: dict[str, float] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            parts = line.rstrip("\n").split("\t")
            if len(parts) != 2:
                raise FormatError(f"{path}: line {lineno}: expected 'id<TAB>score'")
            cid, raw = parts
            if cid in scores:
                raise FormatError(f"{path}: line {lineno}: duplicate candidate id {cid!r}")
            try:
                value = float(raw)
            except ValueError as exc:
                raise FormatError(f"{path}: line {lineno}: non-numeric score {raw!r}") from exc
            if math.isnan(value) or math.isinf(value):
                raise FormatError(f"{path}: line {lineno}: non-finite score {raw!r}")
            scores[cid] = value
    return ExternalScorer(scores)


def grammaticality_score(scorer, candidate: Candidate) -> float:
    """Dispatch: external scorers look up by id, LM scorers score text."""
    if isinstance(scorer, ExternalScorer):
        return scorer.score_id(candidate.id)
    return scorer.score(candidate.text)


@dataclass(frozen=True)
class Threshold:
    """Keep candidates whose score is >= value."""

    value: float


@dataclass(frozen=True)
class KeepFraction:
    """Keep the top ceil(fraction * N) candidates by score."""

    fraction: float

    def __post_init__(self):
        if not (0.0 < self.fraction <= 1.0):
            raise ValueError(f"fraction must be in (0, 1], got {self.fraction}")


def prune(pool: CandidatePool, scorer, policy) -> CandidatePool:
    """Filter the pool by grammaticality, preserving input order.

    Every surviving candidate carries its score in ``grammaticality``.
    ``KeepFraction`` ties are broken toward lower candidate id so runs
    are deterministic regardless of dict iteration quirks.
    """
    if not isinstance(policy, (Threshold, KeepFraction)):
        raise TypeError(f"unknown prune policy {policy!r}")
    scored = [(c, grammaticality_score(scorer, c)) for c in pool.candidates]
    if isinstance(policy, Threshold):
        kept = [(c, s) for (c, s) in scored if s >= policy.value]
    else:
        n_keep = math.ceil(policy.fraction * len(scored))
        ranked = sorted(scored, key=lambda cs: (-cs[1], cs[0].id))
        chosen = {c.id for (c, _) in ranked[:n_keep]}
        kept = [(c, s) for (c, s) in scored if c.id in chosen]
    return CandidatePool(
        candidates=[
            Candidate(id=c.id, text=c.text, source=c.source, grammaticality=s)
            for (c, s) in kept
        ]
    )
