"""Candidate pool construction: training responses, Markov generation, imports.

The pool is the universe a selection strategy ranks over. It always
starts from the distinct counterspeech texts of the training split and
can be extended with synthetic candidates from an order-``k`` Markov
chain fitted on those same texts, or with externally generated texts
ingested from a file. Pools carry a fingerprint (hash of the ordered
candidate texts) so downstream artifacts can prove which pool they were
computed against.
"""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass, field, replace
from pathlib import Path

from countersel.corpus import ConversationPair
from countersel.errors import ModelFitError
from countersel.text import tokenize

SOURCES = ("training", "markov", "external")

BOS = "<s>"
EOS = "</s>"


@dataclass(frozen=True)
class Candidate:
    id: str
    text: str
    source: str
    grammaticality: float | None = None


@dataclass
class CandidatePool:
    candidates: list[Candidate] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.candidates)

    def __iter__(self):
        return iter(self.candidates)

    def ids(self) -> list[str]:
        return [c.id for c in self.candidates]

    def texts(self) -> list[str]:
        return [c.text for c in self.candidates]

    def fingerprint(self) -> str:
        """SHA-256 over the ordered candidate texts, length-prefix framed."""
        h = hashlib.sha256()
        for text in self.texts():
            raw = text.encode("utf-8")
            h.update(str(len(raw)).encode("ascii"))
            h.update(b":")
            h.update(raw)
        return h.hexdigest()


def build_base_pool(train_pairs: list[ConversationPair]) -> CandidatePool:
    """Distinct training counterspeech texts, first occurrence wins."""
    if not train_pairs:
        raise ValueError("cannot build a candidate pool from an empty training split")
    seen: set[str] = set()
    candidates: list[Candidate] = []
    for pair in train_pairs:
        text = pair.counter.text
        if text in seen:
            continue
        seen.add(text)
        candidates.append(Candidate(id=pair.counter.id, text=text, source="training"))
    return CandidatePool(candidates=candidates)


def _fit_markov(texts: list[str], order: int) -> dict[tuple[str, ...], list[str]]:
    if order < 1:
        raise ValueError(f"markov order must be >= 1, got {order}")
    transitions: dict[tuple[str, ...], list[str]] = {}
    fitted_any = False
    for text in texts:
        tokens = tokenize(text)
        if len(tokens) < order:
            continue
        fitted_any = True
        padded = [BOS] * order + tokens + [EOS]
        for i in range(order, len(padded)):
            context = tuple(padded[i - order : i])
            transitions.setdefault(context, []).append(padded[i])
    if not fitted_any:
        raise ModelFitError(
            f"no training sentence has >= {order} tokens; cannot fit order-{order} chain"
        )
    return transitions


def generate_markov(
    pool: CandidatePool,
    count: int,
    order: int = 2,
    max_len: int = 40,
    seed: int = 0,
) -> list[Candidate]:
    """Sample ``count`` synthetic candidates from an order-``order`` chain.

    The chain is fitted on the pool's texts. Walks start from the BOS
    context and stop at EOS or ``max_len`` tokens; a walk that produces
    no tokens is resampled. Ids encode the seed so two batches with
    different seeds never collide.
    """
    if count < 0:
        raise ValueError(f"count must be >= 0, got {count}")
    transitions = _fit_markov(pool.texts(), order)
    rng = random.Random(seed)
    out: list[Candidate] = []
    for i in range(count):
        tokens: list[str] = []
        while not tokens:
            context = tuple([BOS] * order)
            while len(tokens) < max_len:
                choices = transitions.get(context)
                if not choices:
                    break
                token = rng.choice(choices)
                if token == EOS:
                    break
                tokens.append(token)
                context = context[1:] + (token,)
        out.append(
            Candidate(id=f"markov-{seed}-{i:05d}", text=" ".join(tokens), source="markov")
        )
    return out


def ingest_candidates(path: str | Path) -> list[Candidate]:
    """Read externally generated candidates, one text per line.

    Blank lines are skipped; ids come from 1-based line numbers so the
    mapping back to the source file stays obvious.
    """
    out: list[Candidate] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text:
                continue
            out.append(Candidate(id=f"ext-{lineno:06d}", text=text, source="external"))
    return out


def dedupe(candidates: list[Candidate]) -> list[Candidate]:
    """Drop exact text duplicates, keeping the first occurrence."""
    seen: set[str] = set()
    out: list[Candidate] = []
    for c in candidates:
        if c.text in seen:
            continue
        seen.add(c.text)
        out.append(c)
    return out


def extend_pool(pool: CandidatePool, extra: list[Candidate]) -> CandidatePool:
    """New pool with ``extra`` appended and exact duplicates removed."""
    return CandidatePool(candidates=dedupe(list(pool.candidates) + list(extra)))


def save_pool(pool: CandidatePool, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for c in pool.candidates:
            record = {"id": c.id, "text": c.text, "source": c.source}
            if c.grammaticality is not None:
                record["grammaticality"] = c.grammaticality
            fh.write(json.dumps(record, sort_keys=True))
            fh.write("\n")


def load_pool(path: str | Path) -> CandidatePool:
    candidates: list[Candidate] = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            record = json.loads(line)
            candidates.append(
                Candidate(
                    id=record["id"],
                    text=record["text"],
                    source=record["source"],
                    grammaticality=record.get("grammaticality"),
                )
            )
    return CandidatePool(candidates=candidates)
