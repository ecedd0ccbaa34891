from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .._validation import as_token_sequences
from ..dom import EmbeddingKind
from .dbow import Hyperparams, infer_vector, train_dbow


class Doc2VecDBOW(TransformerMixin, BaseEstimator):
    """Scikit-learn wrapper around :func:`train_dbow` / :func:`infer_vector`.

    ``fit`` takes a list of documents (TokenSequence, token lists, or raw HTML
    strings) and ``transform`` returns inferred vectors, one row per document.
    """

    def __init__(
        self,
        kind="content-tags",
        vector_size=100,
        epochs=100,
        negative=5,
        alpha=0.025,
        min_alpha=1e-4,
        min_count=2,
        infer_epochs=50,
        seed=0,
        workers=1,
    ):
        self.kind = kind
        self.vector_size = vector_size
        self.epochs = epochs
        self.negative = negative
        self.alpha = alpha
        self.min_alpha = min_alpha
        self.min_count = min_count
        self.infer_epochs = infer_epochs
        self.seed = seed
        self.workers = workers

    def _hyper(self) -> Hyperparams:
        return Hyperparams(
            dim=self.vector_size,
            epochs=self.epochs,
            negative_samples=self.negative,
            initial_lr=self.alpha,
            final_lr=self.min_alpha,
            min_count=self.min_count,
            seed=self.seed,
        )

    def fit(self, X, y=None):
        kind = EmbeddingKind.parse(self.kind)
        docs = as_token_sequences(X, kind)
        self.model_ = train_dbow(docs, self._hyper(), workers=self.workers)
        self.loss_curve_ = list(self.model_.loss_history)
        self.n_features_out_ = self.vector_size
        return self

    @classmethod
    def from_model(cls, model, infer_epochs=50, seed=0):
        h = model.hyper
        est = cls(
            kind=model.kind.slug,
            vector_size=h.dim,
            epochs=h.epochs,
            negative=h.negative_samples,
            alpha=h.initial_lr,
            min_alpha=h.final_lr,
            min_count=h.min_count,
            infer_epochs=infer_epochs,
            seed=seed,
        )
        est.model_ = model
        est.loss_curve_ = list(model.loss_history)
        est.n_features_out_ = h.dim
        return est

    @property
    def document_vectors_(self):
        check_is_fitted(self, "model_")
        return self.model_.doc_vectors

    def infer(self, doc):
        check_is_fitted(self, "model_")
        (seq,) = as_token_sequences([doc], self.model_.kind)
        return infer_vector(self.model_, seq, self.infer_epochs, self.seed)

    def transform(self, X):
        check_is_fitted(self, "model_")
        docs = as_token_sequences(X, self.model_.kind)
        out = np.empty((len(docs), self.model_.dim))
        for i, doc in enumerate(docs):
            out[i] = infer_vector(self.model_, doc, self.infer_epochs, self.seed).values
        return out
