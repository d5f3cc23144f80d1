"""Sentence embeddings: precomputed tables and a hashed tf-idf fallback.

Selection operates on fixed-dimension sentence vectors. The primary
route is a precomputed embedding table (id -> vector, typically exported
from a stronger encoder); for self-contained runs there is a deterministic
fallback embedder that hashes tokens into a fixed number of signed
buckets weighted by tf-idf. Fallback vectors are L2-normalized; a text
whose tokens are all out-of-vocabulary embeds to the zero vector and is
flagged unrankable rather than silently ranked.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from countersel.errors import FormatError
from countersel.text import tokenize


@dataclass
class EmbeddingTable:
    """Mapping from instance id to a fixed-dimension float vector."""

    dim: int
    entries: dict[str, np.ndarray]

    def __contains__(self, key: str) -> bool:
        return key in self.entries

    def __getitem__(self, key: str) -> np.ndarray:
        return self.entries[key]

    def __len__(self) -> int:
        return len(self.entries)


class FallbackEmbedder:
    """Feature-hashed tf-idf sentence encoder.

    Each vocabulary token hashes (keyed blake2b, so the seed changes the
    projection) to one bucket index and a sign; a sentence embeds as the
    L2-normalized sum of tf * idf * sign contributions over its known
    tokens. Unknown tokens contribute nothing, which keeps embeddings
    stable under vocabulary growth elsewhere in the pipeline.
    """

    def __init__(self, dim: int, seed: int, idf: dict[str, float]):
        self.dim = dim
        self.seed = seed
        self.idf = idf
        self._slots: dict[str, tuple[int, float]] = {}
        key = seed.to_bytes(8, "little", signed=False)
        for token in idf:
            digest = hashlib.blake2b(token.encode("utf-8"), digest_size=16, key=key).digest()
            index = int.from_bytes(digest[:8], "little") % dim
            sign = 1.0 if digest[8] & 1 else -1.0
            self._slots[token] = (index, sign)

    def embed(self, text: str) -> np.ndarray:
        vec = np.zeros(self.dim, dtype=np.float64)
        tf: dict[str, int] = {}
        for token in tokenize(text):
            if token in self.idf:
                tf[token] = tf.get(token, 0) + 1
        for token, count in tf.items():
            index, sign = self._slots[token]
            vec[index] += count * self.idf[token] * sign
        norm = float(np.linalg.norm(vec))
        if norm > 0.0:
            vec /= norm
        return vec

    def embed_many(self, items: list[tuple[str, str]]) -> EmbeddingTable:
        return EmbeddingTable(
            dim=self.dim, entries={key: self.embed(text) for key, text in items}
        )


def is_rankable(vector: np.ndarray) -> bool:
    """Zero vectors carry no direction and cannot be ranked by cosine."""
    return bool(np.any(vector != 0.0))


def fit_fallback_embedder(corpus: list[str], dim: int = 256, seed: int = 0) -> FallbackEmbedder:
    """Fit idf weights on ``corpus`` and fix the hashed projection."""
    if dim < 8:
        raise ValueError(f"dim must be >= 8, got {dim}")
    if not corpus:
        raise ValueError("cannot fit an embedder on an empty corpus")
    df: dict[str, int] = {}
    for text in corpus:
        for token in set(tokenize(text)):
            df[token] = df.get(token, 0) + 1
    n = len(corpus)
    idf = {token: math.log((1 + n) / (1 + count)) + 1.0 for token, count in df.items()}
    return FallbackEmbedder(dim=dim, seed=seed, idf=idf)


def save_table(table: EmbeddingTable, path: str | Path) -> None:
    """Write ``#dim=<d>`` header then one ``id<TAB>v1 v2 ...`` row per entry."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"#dim={table.dim}\n")
        for key, vec in table.entries.items():
            values = " ".join(f"{v:.9g}" for v in vec)
            fh.write(f"{key}\t{values}\n")


def load_table(path: str | Path) -> EmbeddingTable:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline()
        if not header.startswith("#dim="):
            raise FormatError(f"{path}: line 1: expected '#dim=<d>' header")
        try:
            dim = int(header[len("#dim=") :].strip())
        except ValueError as exc:
            raise FormatError(f"{path}: line 1: malformed dimension {header.strip()!r}") from exc
        if dim < 1:
            raise FormatError(f"{path}: line 1: dimension must be >= 1, got {dim}")
        entries: dict[str, np.ndarray] = {}
        for lineno, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            parts = line.rstrip("\n").split("\t")
            if len(parts) != 2:
                raise FormatError(f"{path}: line {lineno}: expected 'id<TAB>values'")
            key, raw = parts
            if key in entries:
                raise FormatError(f"{path}: line {lineno}: duplicate id {key!r}")
            fields = raw.split()
            if len(fields) != dim:
                raise FormatError(
                    f"{path}: line {lineno}: expected {dim} values, got {len(fields)}"
                )
            try:
                vec = np.array([float(x) for x in fields], dtype=np.float64)
            except ValueError as exc:
                raise FormatError(f"{path}: line {lineno}: non-numeric value") from exc
            if not np.all(np.isfinite(vec)):
                raise FormatError(f"{path}: line {lineno}: non-finite value")
            entries[key] = vec
    return EmbeddingTable(dim=dim, entries=entries)
