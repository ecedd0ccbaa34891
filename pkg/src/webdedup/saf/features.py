from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from ..dom import ALL_KINDS, DomTree, EmbeddingKind, extract_tokens, parse_html
from ..embedding import Doc2VecModel, Embedding, infer_vector
from ..errors import DimensionMismatch, KindMismatch

DEFAULT_INFER_EPOCHS = 50


def feature_set(kinds: "Iterable[EmbeddingKind | str] | str") -> tuple:
    """Canonical embedding-type set: non-empty, de-duplicated, in kind order.

    Accepts an iterable or a comma-separated string such as ``"content,tags"``.
    """
    if isinstance(kinds, str):
        kinds = [k for k in kinds.split(",") if k.strip()]
    parsed = [EmbeddingKind.parse(k) for k in kinds]
    if not parsed:
        raise ValueError("embedding type set must be non-empty")
    if len(set(parsed)) != len(parsed):
        raise ValueError("embedding type set contains duplicates")
    return tuple(sorted(parsed))


def format_feature_set(kinds) -> str:
    return ",".join(k.slug for k in kinds)


@dataclass(frozen=True)
class SimilarityFeatures:
    kinds: tuple
    scores: tuple

    def __post_init__(self):
        if len(self.kinds) != len(self.scores):
            raise ValueError("one score per embedding kind is required")

    def __len__(self):
        return len(self.scores)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.scores, dtype=dtype)


def cosine_similarity(a, b) -> float:
    """Cosine of two embeddings, clamped to [-1, 1]; 0 when either norm is 0."""
    if isinstance(a, Embedding) and isinstance(b, Embedding) and a.kind != b.kind:
        raise KindMismatch(f"cannot compare {a.kind.slug} with {b.kind.slug} embeddings")
    u = np.asarray(getattr(a, "values", a), dtype=np.float64)
    v = np.asarray(getattr(b, "values", b), dtype=np.float64)
    if u.shape != v.shape:
        raise DimensionMismatch(f"dimension mismatch: {u.shape} vs {v.shape}")
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return float(np.clip(np.dot(u, v) / (nu * nv), -1.0, 1.0))


def as_tree(page) -> DomTree:
    return page if isinstance(page, DomTree) else parse_html(page)


def embed_page(page, kinds, models: Mapping, infer_epochs=DEFAULT_INFER_EPOCHS, seed=0) -> dict:
    """Infer one embedding per kind for a page (HTML string or DomTree)."""
    tree = as_tree(page)
    out = {}
    for kind in kinds:
        model: Doc2VecModel = models[kind]
        out[kind] = infer_vector(model, extract_tokens(tree, kind), infer_epochs, seed)
    return out


def similarity_from_embeddings(e1: Mapping, e2: Mapping, kinds) -> SimilarityFeatures:
    scores = []
    for kind in kinds:
        a, b = e1[kind], e2[kind]
        # an all-unknown page is never similar to anything
        scores.append(0.0 if a.all_unknown or b.all_unknown else cosine_similarity(a, b))
    return SimilarityFeatures(tuple(kinds), tuple(scores))


def compute_features(p1, p2, kinds, models: Mapping, infer_epochs=DEFAULT_INFER_EPOCHS, seed=0) -> SimilarityFeatures:
    kinds = feature_set(kinds)
    missing = [k.slug for k in kinds if k not in models]
    if missing:
        raise KeyError(f"no embedding model for: {', '.join(missing)}")
    e1 = embed_page(p1, kinds, models, infer_epochs, seed)
    e2 = embed_page(p2, kinds, models, infer_epochs, seed)
    return similarity_from_embeddings(e1, e2, kinds)


class PairSimilarityTransformer(TransformerMixin, BaseEstimator):
    """Map page pairs to rows of per-kind cosine similarities.

    ``models`` maps EmbeddingKind to a trained Doc2VecModel. Inputs to
    ``transform`` are ``(page_a, page_b)`` tuples of HTML strings or trees.
    Embeddings of identical HTML are computed once (fixed inference seed).
    """

    def __init__(self, models=None, kinds="content-tags", infer_epochs=DEFAULT_INFER_EPOCHS, seed=0):
        self.models = models
        self.kinds = kinds
        self.infer_epochs = infer_epochs
        self.seed = seed

    def fit(self, X=None, y=None):
        self.kinds_ = feature_set(self.kinds)
        models = self.models or {}
        missing = [k.slug for k in self.kinds_ if k not in models]
        if missing:
            raise KeyError(f"no embedding model for: {', '.join(missing)}")
        self.n_features_out_ = len(self.kinds_)
        self._cache = {}
        return self

    def _embed(self, page):
        key = page if isinstance(page, (str, bytes)) else id(page)
        hit = self._cache.get(key)
        if hit is None:
            hit = embed_page(page, self.kinds_, self.models, self.infer_epochs, self.seed)
            self._cache[key] = hit
        return hit

    def transform(self, X):
        if not hasattr(self, "kinds_"):
            self.fit()
        rows = [similarity_from_embeddings(self._embed(a), self._embed(b), self.kinds_).scores for a, b in X]
        return np.asarray(rows, dtype=np.float64).reshape(len(rows), len(self.kinds_))


__all__ = [
    "ALL_KINDS",
    "PairSimilarityTransformer",
    "SimilarityFeatures",
    "compute_features",
    "cosine_similarity",
    "embed_page",
    "feature_set",
    "format_feature_set",
    "similarity_from_embeddings",
]
