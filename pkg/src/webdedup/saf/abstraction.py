"""State abstraction functions used by the crawler.

A SAF turns a page into a cached representation once (``represent``) and
then decides clone/distinct for pairs of representations (``compare``).
"""

from __future__ import annotations

from typing import Any, Callable, Hashable, Mapping, Protocol

from ..dom import parse_html
from .classifiers import PairLabel, TrainedClassifier, classify
from .features import DEFAULT_INFER_EPOCHS, SimilarityFeatures, embed_page, similarity_from_embeddings


class StateAbstraction(Protocol):
    def represent(self, html: str) -> Any: ...

    def compare(self, a: Any, b: Any) -> PairLabel: ...


class EmbeddingSAF:
    """Doc2Vec similarities fed to a trained pair classifier.

    Inference uses one fixed seed for the whole session, so byte-identical
    pages always get identical embeddings.
    """

    def __init__(self, models: Mapping, classifier: TrainedClassifier, infer_epochs=DEFAULT_INFER_EPOCHS, seed=0):
        missing = [k.slug for k in classifier.feature_set if k not in models]
        if missing:
            raise KeyError(f"no embedding model for: {', '.join(missing)}")
        self.models = dict(models)
        self.classifier = classifier
        self.kinds = classifier.feature_set
        self.infer_epochs = infer_epochs
        self.seed = seed
        self._cache: dict = {}

    def represent(self, html: str) -> dict:
        rep = self._cache.get(html)
        if rep is None:
            rep = embed_page(parse_html(html), self.kinds, self.models, self.infer_epochs, self.seed)
            self._cache[html] = rep
        return rep

    def features(self, a: dict, b: dict) -> SimilarityFeatures:
        return similarity_from_embeddings(a, b, self.kinds)

    def compare(self, a: dict, b: dict) -> PairLabel:
        return classify(self.classifier, self.features(a, b))

    def classify_pages(self, html_a: str, html_b: str) -> PairLabel:
        return self.compare(self.represent(html_a), self.represent(html_b))


class OracleSAF:
    """Ground-truth equivalence: pages are clones iff they share a logical label."""

    def __init__(self, label_of: Callable[[str], Hashable]):
        self.label_of = label_of

    def represent(self, html: str):
        return self.label_of(html)

    def compare(self, a, b) -> PairLabel:
        return PairLabel.CLONE if a == b else PairLabel.DISTINCT


class AlwaysDistinctSAF:
    """No abstraction at all: every captured page is a new state."""

    def represent(self, html: str):
        return None

    def compare(self, a, b) -> PairLabel:
        return PairLabel.DISTINCT
