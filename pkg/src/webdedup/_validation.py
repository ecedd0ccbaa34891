"""Input coercion helpers shared by the estimators."""

from __future__ import annotations

import numpy as np

from .dom import DomTree, EmbeddingKind, TokenSequence, extract_tokens, parse_html
from .errors import FeatureMismatch, KindMismatch


def as_token_sequences(X, kind: EmbeddingKind) -> list[TokenSequence]:
    """Accept TokenSequence, token lists, DomTree or raw HTML strings."""
    out = []
    for doc in X:
        if isinstance(doc, TokenSequence):
            if doc.kind != kind:
                raise KindMismatch(f"expected {kind.slug} tokens, got {doc.kind.slug}")
            out.append(doc)
        elif isinstance(doc, DomTree):
            out.append(extract_tokens(doc, kind))
        elif isinstance(doc, (str, bytes)):
            out.append(extract_tokens(parse_html(doc), kind))
        else:
            out.append(TokenSequence(kind, [str(t) for t in doc]))
    return out


def as_feature_matrix(X, n_features: int | None = None) -> np.ndarray:
    """2-D float array of similarity features; 1-D input is one column."""
    arr = np.asarray(getattr(X, "scores", X), dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1) if n_features in (None, 1) else arr.reshape(1, -1)
    if arr.ndim != 2:
        raise FeatureMismatch(f"expected a 2-D feature matrix, got shape {arr.shape}")
    if n_features is not None and arr.shape[1] != n_features:
        raise FeatureMismatch(f"expected {n_features} features, got {arr.shape[1]}")
    if not np.all(np.isfinite(arr)):
        raise FeatureMismatch("features must be finite")
    return arr


def as_labels(y) -> np.ndarray:
    arr = np.asarray(y).astype(np.int64).ravel()
    bad = set(np.unique(arr)) - {0, 1}
    if bad:
        raise ValueError(f"labels must be 0 (distinct) or 1 (clone), got {sorted(bad)}")
    return arr
