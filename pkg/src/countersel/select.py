"""Response selection: learned linear map, cosine ranking, and ablations.

The trained strategy maps a candidate response embedding e_y through
``(W + b·I)`` and ranks candidates by cosine similarity against the
query embedding e_x; W and b are fitted by full-batch gradient ascent on
the summed training cosine. Initialization is W=0, b=1 — the identity
map — so an untrained selector is exactly the plain-cosine baseline and
training can only improve on it. Three ablation selectors live here
too: plain cosine (no map), tf-idf over raw texts, and a logistic
classifier trained with negative sampling on [e_x; e_y; e_x⊙e_y].

Ties anywhere are broken by candidate id ascending, so rankings never
depend on dict ordering or platform argsort behavior.
"""

from __future__ import annotations

import json
import logging
import math
import random
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from countersel.embed import EmbeddingTable, is_rankable
from countersel.errors import DivergenceError
from countersel.pool import Candidate, CandidatePool
from countersel.text import tokenize

logger = logging.getLogger(__name__)


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        raise ValueError("cosine is undefined for zero vectors")
    value = float(np.dot(a, b) / (na * nb))
    return max(-1.0, min(1.0, value))


@dataclass
class LinearMap:
    """Candidate-side map e_y -> W·e_y + b·e_y."""

    W: np.ndarray
    b: float
    dim: int

    def apply(self, e: np.ndarray) -> np.ndarray:
        e = np.asarray(e, dtype=np.float64)
        if e.shape != (self.dim,):
            raise ValueError(f"expected vector of dim {self.dim}, got shape {e.shape}")
        return self.W @ e + self.b * e

    def apply_many(self, Y: np.ndarray) -> np.ndarray:
        return Y @ self.W.T + self.b * Y


def identity_map(dim: int) -> LinearMap:
    return LinearMap(W=np.zeros((dim, dim), dtype=np.float64), b=1.0, dim=dim)


def save_map(linmap: LinearMap, path: str | Path) -> None:
    payload = {
        "dim": linmap.dim,
        "b": float(linmap.b),
        "W": [float(v) for v in linmap.W.ravel()],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True)
        fh.write("\n")


def load_map(path: str | Path) -> LinearMap:
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    dim = int(payload["dim"])
    W = np.array(payload["W"], dtype=np.float64).reshape(dim, dim)
    return LinearMap(W=W, b=float(payload["b"]), dim=dim)


def map_objective(W: np.ndarray, b: float, X: np.ndarray, Y: np.ndarray, l2_penalty: float) -> float:
    """J(W, b) = Σ_i cos(x_i, W·y_i + b·y_i) − l2_penalty·‖W‖²_F.

    Rows of X are assumed unit-norm. Pairs whose mapped vector is zero
    contribute nothing (no direction to compare).
    """
    with np.errstate(over="ignore", invalid="ignore"):
        U = Y @ W.T + b * Y
        norms = np.linalg.norm(U, axis=1)
        dots = np.einsum("ij,ij->i", X, U)
        ok = norms > 0.0
        total = float(np.sum(dots[ok] / norms[ok]))
        return total - l2_penalty * float(np.sum(W * W))


def map_objective_grad(
    W: np.ndarray, b: float, X: np.ndarray, Y: np.ndarray, l2_penalty: float
) -> tuple[np.ndarray, float]:
    """Analytic (∂J/∂W, ∂J/∂b) for ``map_objective``."""
    with np.errstate(over="ignore", invalid="ignore"):
        U = Y @ W.T + b * Y
        norms = np.linalg.norm(U, axis=1)
        dots = np.einsum("ij,ij->i", X, U)
        ok = norms > 0.0
        G = np.zeros_like(U)
        # d cos_i / d u_i = x_i/‖u_i‖ − (x_i·u_i)·u_i/‖u_i‖³  (x_i unit-norm)
        G[ok] = X[ok] / norms[ok, None] - (dots[ok] / norms[ok] ** 3)[:, None] * U[ok]
        dW = G.T @ Y - 2.0 * l2_penalty * W
        db = float(np.einsum("ij,ij->", G, Y))
        return dW, db


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.05
    max_epochs: int = 200
    patience: int = 10
    seed: int = 0
    l2_penalty: float = 1e-4

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError(f"learning_rate must be > 0, got {self.learning_rate}")
        if self.max_epochs < 0:
            raise ValueError(f"max_epochs must be >= 0, got {self.max_epochs}")
        if self.patience < 1:
            raise ValueError(f"patience must be >= 1, got {self.patience}")
        if self.l2_penalty < 0:
            raise ValueError(f"l2_penalty must be >= 0, got {self.l2_penalty}")


def _pairs_to_arrays(pairs) -> tuple[np.ndarray, np.ndarray]:
    X = np.array([np.asarray(x, dtype=np.float64) for x, _ in pairs])
    Y = np.array([np.asarray(y, dtype=np.float64) for _, y in pairs])
    if X.ndim != 2 or Y.ndim != 2 or X.shape != Y.shape:
        raise ValueError("pairs must hold equal-dimension vectors")
    xn = np.linalg.norm(X, axis=1)
    yn = np.linalg.norm(Y, axis=1)
    if np.any(yn == 0.0) or np.any(xn == 0.0):
        raise ValueError("training pairs must not contain zero vectors")
    return X / xn[:, None], Y / yn[:, None]


def train_map(pairs, cfg: TrainConfig, val_pairs=None, callback=None) -> LinearMap:
    """Fit (W, b) by full-batch gradient ascent with early stopping.

    Monitors validation Σcos (penalty-free) when ``val_pairs`` is given,
    otherwise the penalized training objective; returns the parameters
    achieving the best monitored value. Epoch 0 is the untouched
    identity init, so the result can never regress below the plain
    cosine baseline on the monitored set.
    """
    if not pairs:
        raise ValueError("need at least one training pair")
    X, Y = _pairs_to_arrays(pairs)
    dim = X.shape[1]
    if val_pairs:
        Xv, Yv = _pairs_to_arrays(val_pairs)
        if Xv.shape[1] != dim:
            raise ValueError(f"validation dim {Xv.shape[1]} != training dim {dim}")
    else:
        Xv = Yv = None

    W = np.zeros((dim, dim), dtype=np.float64)
    b = 1.0
    lam = cfg.l2_penalty

    def monitored(Wc, bc):
        if Xv is not None:
            return map_objective(Wc, bc, Xv, Yv, 0.0)
        return map_objective(Wc, bc, X, Y, lam)

    best_value = monitored(W, b)
    best_W, best_b = W.copy(), b
    if callback is not None:
        callback(0, map_objective(W, b, X, Y, lam), best_value)
    since_best = 0
    for epoch in range(1, cfg.max_epochs + 1):
        dW, db = map_objective_grad(W, b, X, Y, lam)
        W = W + cfg.learning_rate * dW
        b = b + cfg.learning_rate * db
        train_j = map_objective(W, b, X, Y, lam)
        if not math.isfinite(train_j):
            raise DivergenceError(f"objective became non-finite at epoch {epoch}")
        value = monitored(W, b)
        if not math.isfinite(value):
            raise DivergenceError(f"monitored objective became non-finite at epoch {epoch}")
        if callback is not None:
            callback(epoch, train_j, value)
        if value > best_value:
            best_value = value
            best_W, best_b = W.copy(), b
            since_best = 0
        else:
            since_best += 1
            if since_best >= cfg.patience:
                break
    return LinearMap(W=best_W, b=best_b, dim=dim)


def _ranked(
    pool: CandidatePool,
    scores: dict[str, float],
    k: int,
) -> list[tuple[Candidate, float]]:
    rankable = [c for c in pool.candidates if c.id in scores]
    rankable.sort(key=lambda c: (-scores[c.id], c.id))
    return [(c, scores[c.id]) for c in rankable[:k]]


def _pool_vectors(pool: CandidatePool, table: EmbeddingTable) -> tuple[list[Candidate], np.ndarray]:
    missing = sorted(c.id for c in pool.candidates if c.id not in table)
    if missing:
        raise LookupError(f"candidates missing from embedding table: {missing}")
    usable = [c for c in pool.candidates if is_rankable(table[c.id])]
    if not usable:
        return [], np.zeros((0, table.dim), dtype=np.float64)
    Y = np.stack([table[c.id] for c in usable])
    return usable, Y


def select_topk(
    e_x: np.ndarray,
    pool: CandidatePool,
    table: EmbeddingTable,
    linmap: LinearMap,
    k: int,
) -> list[tuple[Candidate, float]]:
    """Top-k candidates by cos(e_x, mapped(e_y)), ties by id ascending."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    e_x = np.asarray(e_x, dtype=np.float64)
    nx = float(np.linalg.norm(e_x))
    if nx == 0.0:
        raise ValueError("query embedding is the zero vector")
    usable, Y = _pool_vectors(pool, table)
    if not usable:
        return []
    U = linmap.apply_many(Y)
    norms = np.linalg.norm(U, axis=1)
    ok = norms > 0.0
    raw = U @ e_x
    scores: dict[str, float] = {}
    for i, cand in enumerate(usable):
        if not ok[i]:
            continue
        scores[cand.id] = max(-1.0, min(1.0, float(raw[i] / (norms[i] * nx))))
    return _ranked(pool, scores, k)


def select_cos(
    e_x: np.ndarray, pool: CandidatePool, table: EmbeddingTable, k: int
) -> list[tuple[Candidate, float]]:
    """Plain cosine ranking — the selector with the mapping step removed."""
    return select_topk(e_x, pool, table, identity_map(table.dim), k)


def _tf(text: str) -> dict[str, int]:
    counts: dict[str, int] = {}
    for token in tokenize(text):
        counts[token] = counts.get(token, 0) + 1
    return counts


def select_tfidf(hate_text: str, pool: CandidatePool, k: int) -> list[tuple[Candidate, float]]:
    """Rank by cosine over tf-idf vectors of the raw texts.

    tf is the raw in-document count; idf = ln((N+1)/(df+1)) + 1 over the
    pool's documents. Query terms outside the pool vocabulary are
    dropped; a query with no in-vocabulary token returns [] (logged).
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if not pool.candidates:
        raise ValueError("cannot rank against an empty pool")
    docs = [(c, _tf(c.text)) for c in pool.candidates]
    df: dict[str, int] = {}
    for _, tf in docs:
        for token in tf:
            df[token] = df.get(token, 0) + 1
    n = len(docs)
    idf = {token: math.log((n + 1) / (count + 1)) + 1.0 for token, count in df.items()}

    query_tf = {t: c for t, c in _tf(hate_text).items() if t in idf}
    if not query_tf:
        logger.warning("tf-idf query shares no token with the pool; returning no candidates")
        return []
    qvec = {t: c * idf[t] for t, c in query_tf.items()}
    qnorm = math.sqrt(sum(v * v for v in qvec.values()))

    scores: dict[str, float] = {}
    for cand, tf in docs:
        dvec = {t: c * idf[t] for t, c in tf.items()}
        dnorm = math.sqrt(sum(v * v for v in dvec.values()))
        if dnorm == 0.0:
            continue
        dot = sum(qvec[t] * dvec[t] for t in qvec.keys() & dvec.keys())
        scores[cand.id] = max(-1.0, min(1.0, dot / (qnorm * dnorm)))
    return _ranked(pool, scores, k)


@dataclass
class NegSamplingClassifier:
    """Logistic scorer over the pair features [e_x ; e_y ; e_x⊙e_y]."""

    w: np.ndarray
    bias: float
    dim: int
    seed: int
    neg_ratio: int

    def features(self, e_x: np.ndarray, e_y: np.ndarray) -> np.ndarray:
        return np.concatenate([e_x, e_y, e_x * e_y])

    def predict_proba(self, e_x: np.ndarray, e_y: np.ndarray) -> float:
        z = float(self.w @ self.features(e_x, e_y) + self.bias)
        p = 1.0 / (1.0 + math.exp(-z)) if z >= 0 else math.exp(z) / (1.0 + math.exp(z))
        return min(max(p, 1e-12), 1.0 - 1e-12)


def save_classifier(clf: NegSamplingClassifier, path: str | Path) -> None:
    payload = {
        "w": [float(v) for v in clf.w],
        "bias": float(clf.bias),
        "dim": clf.dim,
        "seed": clf.seed,
        "neg_ratio": clf.neg_ratio,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True)
        fh.write("\n")


def load_classifier(path: str | Path) -> NegSamplingClassifier:
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    return NegSamplingClassifier(
        w=np.array(payload["w"], dtype=np.float64),
        bias=float(payload["bias"]),
        dim=int(payload["dim"]),
        seed=int(payload["seed"]),
        neg_ratio=int(payload["neg_ratio"]),
    )


def train_neg_classifier(
    pairs,
    pool: CandidatePool,
    table: EmbeddingTable,
    neg_ratio: int,
    cfg: TrainConfig,
) -> NegSamplingClassifier:
    """Fit the logistic pair classifier with uniform negative sampling.

    Every positive (e_x, e_y) is paired with ``neg_ratio`` candidates
    sampled uniformly without replacement from the rankable pool; the
    weights are fitted by full-batch gradient descent on mean logistic
    loss plus an L2 penalty on w.
    """
    if neg_ratio < 1:
        raise ValueError(f"neg_ratio must be >= 1, got {neg_ratio}")
    if not pairs:
        raise ValueError("need at least one positive pair")
    usable, Y = _pool_vectors(pool, table)
    if len(usable) < neg_ratio + 1:
        raise ValueError(
            f"pool has {len(usable)} rankable candidates; need at least {neg_ratio + 1}"
        )
    X_pos, Y_pos = _pairs_to_arrays(pairs)
    dim = X_pos.shape[1]
    if Y.shape[1] != dim:
        raise ValueError(f"pool embedding dim {Y.shape[1]} != pair dim {dim}")

    rng = random.Random(cfg.seed)
    feats: list[np.ndarray] = []
    labels: list[float] = []
    for i in range(len(X_pos)):
        e_x = X_pos[i]
        feats.append(np.concatenate([e_x, Y_pos[i], e_x * Y_pos[i]]))
        labels.append(1.0)
        for j in rng.sample(range(len(usable)), neg_ratio):
            e_n = Y[j] / np.linalg.norm(Y[j])
            feats.append(np.concatenate([e_x, e_n, e_x * e_n]))
            labels.append(0.0)
    F = np.array(feats)
    t = np.array(labels)
    m = len(t)

    w = np.zeros(3 * dim, dtype=np.float64)
    bias = 0.0
    lam = cfg.l2_penalty
    for epoch in range(1, cfg.max_epochs + 1):
        z = F @ w + bias
        p = np.where(z >= 0, 1.0 / (1.0 + np.exp(-z)), np.exp(z) / (1.0 + np.exp(z)))
        residual = p - t
        w = w - cfg.learning_rate * (F.T @ residual / m + 2.0 * lam * w)
        bias = bias - cfg.learning_rate * float(np.mean(residual))
        if not (np.all(np.isfinite(w)) and math.isfinite(bias)):
            raise DivergenceError(f"classifier weights became non-finite at epoch {epoch}")
    return NegSamplingClassifier(w=w, bias=bias, dim=dim, seed=cfg.seed, neg_ratio=neg_ratio)


def select_by_classifier(
    e_x: np.ndarray,
    pool: CandidatePool,
    table: EmbeddingTable,
    clf: NegSamplingClassifier,
    k: int,
) -> list[tuple[Candidate, float]]:
    """Top-k candidates by classifier probability, ties by id ascending."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    e_x = np.asarray(e_x, dtype=np.float64)
    nx = float(np.linalg.norm(e_x))
    if nx == 0.0:
        raise ValueError("query embedding is the zero vector")
    usable, Y = _pool_vectors(pool, table)
    if not usable:
        return []
    e_x = e_x / nx
    scores: dict[str, float] = {}
    for i, cand in enumerate(usable):
        e_y = Y[i] / np.linalg.norm(Y[i])
        scores[cand.id] = clf.predict_proba(e_x, e_y)
    return _ranked(pool, scores, k)
