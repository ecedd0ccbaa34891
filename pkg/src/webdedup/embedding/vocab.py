from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from ..errors import EmptyCorpus, EmptyVocabulary


@dataclass
class Vocabulary:
    """Token table with dense indices ordered by descending frequency."""

    tokens: list = field(default_factory=list)
    counts: list = field(default_factory=list)

    def __post_init__(self):
        self.index = {tok: i for i, tok in enumerate(self.tokens)}

    def __len__(self):
        return len(self.tokens)

    def __contains__(self, token):
        return token in self.index

    def __getitem__(self, token) -> tuple[int, int]:
        i = self.index[token]
        return i, self.counts[i]

    def __eq__(self, other):
        if not isinstance(other, Vocabulary):
            return NotImplemented
        return self.tokens == other.tokens and self.counts == other.counts

    @property
    def total_count(self) -> int:
        return int(sum(self.counts))

    def encode(self, tokens: Iterable[str]) -> np.ndarray:
        """Indices of in-vocabulary tokens; unknown tokens are skipped."""
        idx = self.index
        return np.fromiter((idx[t] for t in tokens if t in idx), dtype=np.int64)

    def noise_distribution(self, power: float = 0.75) -> np.ndarray:
        weights = np.asarray(self.counts, dtype=np.float64) ** power
        return weights / weights.sum()


def build_vocab(corpus: Sequence, min_count: int = 2) -> Vocabulary:
    """Count tokens across the corpus and keep those seen at least ``min_count`` times."""
    if len(corpus) == 0:
        raise EmptyCorpus("corpus contains no documents")
    counter: Counter = Counter()
    for doc in corpus:
        counter.update(getattr(doc, "tokens", doc))
    kept = [(tok, c) for tok, c in counter.items() if c >= min_count]
    if not kept:
        raise EmptyVocabulary(f"no token occurs at least min_count={min_count} times")
    kept.sort(key=lambda tc: (-tc[1], tc[0]))
    return Vocabulary([t for t, _ in kept], [c for _, c in kept])
