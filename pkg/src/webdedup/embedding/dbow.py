"""Paragraph vectors, distributed bag-of-words variant, with negative sampling.

A document vector alone is trained to predict each of the document's tokens
against a handful of noise tokens drawn from the unigram distribution raised
to the 3/4 power. Word output vectors are shared across documents and are
frozen when inferring vectors for unseen documents.
"""

from __future__ import annotations

import logging
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numba
import numpy as np

from ..dom import EmbeddingKind, TokenSequence
from ..errors import EmptyCorpus, KindMismatch, MixedKinds
from .vocab import Vocabulary, build_vocab

logger = logging.getLogger(__name__)

NOISE_POWER = 0.75


@dataclass(frozen=True)
class Hyperparams:
    dim: int = 100
    epochs: int = 100
    negative_samples: int = 5
    initial_lr: float = 0.025
    final_lr: float = 1e-4
    min_count: int = 2
    seed: int = 0

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.negative_samples < 1:
            raise ValueError("negative_samples must be >= 1")
        if not 0 < self.final_lr <= self.initial_lr:
            raise ValueError("learning rates must satisfy 0 < final_lr <= initial_lr")
        if self.min_count < 1:
            raise ValueError("min_count must be >= 1")


@dataclass(eq=False)
class Doc2VecModel:
    kind: EmbeddingKind
    vocab: Vocabulary
    word_out_vectors: np.ndarray
    doc_vectors: np.ndarray
    hyper: Hyperparams
    loss_history: list = field(default_factory=list, repr=False)

    @property
    def dim(self) -> int:
        return self.hyper.dim

    def __eq__(self, other):
        # loss_history is a training diagnostic, not part of the model
        if not isinstance(other, Doc2VecModel):
            return NotImplemented
        return (
            self.kind == other.kind
            and self.vocab == other.vocab
            and self.hyper == other.hyper
            and self.word_out_vectors.dtype == other.word_out_vectors.dtype
            and np.array_equal(self.word_out_vectors, other.word_out_vectors)
            and np.array_equal(self.doc_vectors, other.doc_vectors)
        )


@dataclass(frozen=True, eq=False)
class Embedding:
    kind: EmbeddingKind
    values: np.ndarray
    # set when no token of the document was in the vocabulary
    all_unknown: bool = False

    def __len__(self):
        return len(self.values)


# ---------------------------------------------------------------------------
# objective


def _sigmoid(x):
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def _log_sigmoid(x):
    return -np.logaddexp(0.0, -x)


def negative_sampling_loss(doc_vec, word_out, target, negatives):
    """Loss and gradients of -log s(v.w+) - sum log s(-v.w-).

    Negatives equal to the target are ignored. Returns ``(loss, grad_doc,
    rows, grad_rows)`` where ``grad_rows[j]`` is the gradient for
    ``word_out[rows[j]]`` (rows may repeat; gradients must be accumulated).
    """
    negatives = np.asarray(negatives, dtype=np.int64)
    negatives = negatives[negatives != target]
    rows = np.concatenate(([target], negatives))
    labels = np.zeros(len(rows))
    labels[0] = 1.0
    w = word_out[rows]
    scores = w @ doc_vec
    signs = 2.0 * labels - 1.0
    loss = -float(np.sum(_log_sigmoid(signs * scores)))
    # d/ds of -log s(sign*s) is s(s) - label
    coeff = _sigmoid(scores) - labels
    grad_doc = coeff @ w
    grad_rows = np.outer(coeff, doc_vec)
    return loss, grad_doc, rows, grad_rows


def sgd_step(doc_vec, word_out, target, negatives, lr, train_words=False):
    """One negative-sampling step; returns the updated document vector.

    ``word_out`` is modified in place only when ``train_words`` is set.
    """
    if lr < 0:
        raise ValueError("lr must be non-negative")
    _, grad_doc, rows, grad_rows = negative_sampling_loss(doc_vec, word_out, target, negatives)
    if train_words:
        np.add.at(word_out, rows, -lr * grad_rows)
    return doc_vec - lr * grad_doc


@numba.njit(cache=True, nogil=True)
def _train_document(doc_vec, word_out, indices, negatives, lrs, train_words):
    """Run one pass over a document's token positions (hot loop). Returns summed loss.

    Scalar loops in the same order as the reference objective; word rows are
    updated sequentially so repeated negatives accumulate.
    """
    n, k = negatives.shape
    dim = doc_vec.shape[0]
    neu1e = np.empty(dim)
    total = 0.0
    for pos in range(n):
        target = indices[pos]
        lr = lrs[pos]
        neu1e[:] = 0.0
        for j in range(k + 1):
            if j == 0:
                row = target
                sign = 1.0
            else:
                row = negatives[pos, j - 1]
                if row == target:
                    continue
                sign = -1.0
            score = 0.0
            for d in range(dim):
                score += word_out[row, d] * doc_vec[d]
            z = sign * score
            # -log sigmoid(z), numerically stable
            if z > 0:
                total += np.log1p(np.exp(-z))
            else:
                total += -z + np.log1p(np.exp(z))
            # d loss / d score = -sign * sigmoid(-z)
            g = -sign / (1.0 + np.exp(z))
            for d in range(dim):
                neu1e[d] += g * word_out[row, d]
            if train_words:
                for d in range(dim):
                    word_out[row, d] -= lr * g * doc_vec[d]
        for d in range(dim):
            doc_vec[d] -= lr * neu1e[d]
    return total


class _NoiseSampler:
    def __init__(self, vocab: Vocabulary, k: int):
        self.cdf = np.cumsum(vocab.noise_distribution(NOISE_POWER))
        self.cdf[-1] = 1.0
        self.k = k

    def draw(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return np.searchsorted(self.cdf, rng.random((n, self.k)), side="right")


def _check_corpus(corpus) -> EmbeddingKind:
    if len(corpus) == 0:
        raise EmptyCorpus("corpus contains no documents")
    kinds = {doc.kind for doc in corpus}
    if len(kinds) > 1:
        raise MixedKinds(f"corpus mixes token-sequence kinds: {sorted(k.slug for k in kinds)}")
    return kinds.pop()


def train_dbow(corpus, hyper: Hyperparams | None = None, workers: int = 1) -> Doc2VecModel:
    """Train document and word-output vectors on a list of TokenSequence.

    ``workers=1`` is bit-deterministic for a fixed seed. With more workers the
    documents are sharded across threads that update the shared matrices
    without locking.
    """
    hyper = hyper or Hyperparams()
    kind = _check_corpus(corpus)
    vocab = build_vocab(corpus, hyper.min_count)
    rng = np.random.default_rng(hyper.seed)
    dim = hyper.dim
    doc_vectors = (rng.random((len(corpus), dim)) - 0.5) / dim
    word_out = (rng.random((len(vocab), dim)) - 0.5) / dim
    encoded = [vocab.encode(doc.tokens) for doc in corpus]
    sampler = _NoiseSampler(vocab, hyper.negative_samples)

    per_epoch = sum(len(e) for e in encoded)
    total_updates = max(per_epoch * hyper.epochs, 1)
    history = []

    def lr_at(start, n):
        t = np.arange(start, start + n, dtype=np.float64)
        return hyper.initial_lr - (hyper.initial_lr - hyper.final_lr) * t / total_updates

    if workers <= 1:
        done = 0
        for _ in range(hyper.epochs):
            loss = 0.0
            for d, idx in enumerate(encoded):
                if len(idx) == 0:
                    continue
                negs = sampler.draw(rng, len(idx))
                loss += _train_document(doc_vectors[d], word_out, idx, negs, lr_at(done, len(idx)), True)
                done += len(idx)
            history.append(loss / max(per_epoch, 1))
    else:
        history = _train_hogwild(encoded, doc_vectors, word_out, sampler, hyper, workers, lr_at)

    model = Doc2VecModel(
        kind=kind,
        vocab=vocab,
        word_out_vectors=word_out.astype(np.float32),
        doc_vectors=doc_vectors.astype(np.float32),
        hyper=hyper,
        loss_history=history,
    )
    if history:
        logger.debug("trained %s model: final epoch loss %.5f", kind.slug, history[-1])
    return model


def _train_hogwild(encoded, doc_vectors, word_out, sampler, hyper, workers, lr_at):
    shards = [list(range(w, len(encoded), workers)) for w in range(workers)]
    per_epoch = sum(len(e) for e in encoded)
    seeds = np.random.SeedSequence(hyper.seed).spawn(workers)
    rngs = [np.random.default_rng(s) for s in seeds]
    lock = threading.Lock()
    history = []

    def run(w, epoch, losses):
        done = epoch * per_epoch
        local = 0.0
        for d in shards[w]:
            idx = encoded[d]
            if len(idx) == 0:
                continue
            negs = sampler.draw(rngs[w], len(idx))
            # schedule position is approximate under sharding
            local += _train_document(doc_vectors[d], word_out, idx, negs, lr_at(done, len(idx)), True)
            done += len(idx)
        with lock:
            losses.append(local)

    with ThreadPoolExecutor(max_workers=workers) as pool:
        for epoch in range(hyper.epochs):
            losses: list = []
            list(pool.map(lambda w: run(w, epoch, losses), range(workers)))
            history.append(sum(losses) / max(per_epoch, 1))
    return history


def infer_vector(model: Doc2VecModel, tokens: TokenSequence, infer_epochs: int = 50, seed: int = 0) -> Embedding:
    """Fit a fresh document vector against the frozen word-output vectors."""
    if tokens.kind != model.kind:
        raise KindMismatch(f"model kind {model.kind.slug} != token kind {tokens.kind.slug}")
    dim = model.dim
    idx = model.vocab.encode(tokens.tokens)
    if len(idx) == 0:
        return Embedding(model.kind, np.zeros(dim), all_unknown=True)
    rng = np.random.default_rng(seed)
    vec = (rng.random(dim) - 0.5) / dim
    word_out = model.word_out_vectors.astype(np.float64)
    sampler = _NoiseSampler(model.vocab, model.hyper.negative_samples)
    hyper = model.hyper
    n = len(idx)
    total = n * infer_epochs
    for epoch in range(infer_epochs):
        negs = sampler.draw(rng, n)
        t = np.arange(epoch * n, (epoch + 1) * n, dtype=np.float64)
        lrs = hyper.initial_lr - (hyper.initial_lr - hyper.final_lr) * t / total
        _train_document(vec, word_out, idx, negs, lrs, False)
    return Embedding(model.kind, vec)
