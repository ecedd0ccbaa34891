import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import synthetic_corpus
from webdedup.dom import EmbeddingKind, TokenSequence
from webdedup.embedding import (
    Doc2VecDBOW,
    Hyperparams,
    build_vocab,
    dumps_model,
    infer_vector,
    load_model,
    loads_model,
    negative_sampling_loss,
    save_model,
    sgd_step,
    train_dbow,
)
from webdedup.embedding.dbow import _train_document
from webdedup.errors import EmptyCorpus, EmptyVocabulary, FormatError, KindMismatch, MixedKinds, VersionMismatch
from webdedup.saf import cosine_similarity

C = EmbeddingKind.CONTENT


def seq(*tokens, kind=C):
    return TokenSequence(kind, tuple(tokens))


# ---------------------------------------------------------------------------
# vocabulary


def test_vocab_counts_and_order():
    v = build_vocab([seq("a", "b", "a")], min_count=1)
    assert v["a"] == (0, 2) and v["b"] == (1, 1)
    assert v.total_count == 3


def test_vocab_ties_are_lexicographic():
    v = build_vocab([seq("z", "y", "x", "y", "z")], min_count=1)
    assert list(v.tokens) == ["y", "z", "x"]


def test_vocab_min_count_filters():
    with pytest.raises(EmptyVocabulary):
        build_vocab([seq("a", "b", "a")], min_count=3)
    assert "b" not in build_vocab([seq("a", "b", "a")], min_count=2)


def test_vocab_empty_corpus():
    with pytest.raises(EmptyCorpus):
        build_vocab([], min_count=1)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.lists(st.sampled_from("abcdefg"), max_size=15), min_size=1, max_size=5), st.integers(1, 3))
def test_vocab_matches_counter(docs, min_count):
    from collections import Counter

    counts = Counter(t for d in docs for t in d)
    expected = sorted((t for t, c in counts.items() if c >= min_count), key=lambda t: (-counts[t], t))
    corpus = [seq(*d) for d in docs]
    if not expected:
        with pytest.raises(EmptyVocabulary):
            build_vocab(corpus, min_count)
        return
    v = build_vocab(corpus, min_count)
    assert list(v.tokens) == expected
    assert all(v[t] == (i, counts[t]) for i, t in enumerate(expected))


# ---------------------------------------------------------------------------
# objective


def _finite_difference(doc, word_out, target, negs, h=1e-6):
    g = np.empty_like(doc)
    for i in range(len(doc)):
        e = np.zeros_like(doc)
        e[i] = h
        lp = negative_sampling_loss(doc + e, word_out, target, negs)[0]
        lm = negative_sampling_loss(doc - e, word_out, target, negs)[0]
        g[i] = (lp - lm) / (2 * h)
    return g


def test_gradient_matches_finite_differences():
    rng = np.random.default_rng(1)
    worst = 0.0
    for _ in range(100):
        doc = rng.normal(size=10)
        word_out = rng.normal(size=(8, 10))
        target = int(rng.integers(8))
        negs = rng.integers(0, 8, size=5)
        _, grad, _, _ = negative_sampling_loss(doc, word_out, target, negs)
        fd = _finite_difference(doc, word_out, target, negs)
        worst = max(worst, np.linalg.norm(grad - fd) / max(np.linalg.norm(fd), 1e-12))
    assert worst <= 1e-5


def test_gradient_at_zero_doc_vector():
    rng = np.random.default_rng(2)
    word_out = rng.normal(size=(6, 4))
    _, grad, _, _ = negative_sampling_loss(np.zeros(4), word_out, 0, [2, 3, 5])
    expected = -0.5 * word_out[0] + 0.5 * (word_out[2] + word_out[3] + word_out[5])
    np.testing.assert_allclose(grad, expected, atol=1e-12)


def test_zero_learning_rate_is_a_no_op():
    rng = np.random.default_rng(3)
    doc, word_out = rng.normal(size=5), rng.normal(size=(4, 5))
    before = word_out.copy()
    np.testing.assert_array_equal(sgd_step(doc, word_out, 1, [2, 3], 0.0, train_words=True), doc)
    np.testing.assert_array_equal(word_out, before)


def test_step_decreases_loss():
    rng = np.random.default_rng(4)
    doc, word_out = rng.normal(size=6), rng.normal(size=(5, 6))
    before = negative_sampling_loss(doc, word_out, 0, [1, 2])[0]
    after = negative_sampling_loss(sgd_step(doc, word_out, 0, [1, 2], 0.01), word_out, 0, [1, 2])[0]
    assert after < before


def test_compiled_loop_matches_reference_steps():
    # the hot loop against repeated numpy steps (distinct negatives, so row order does not matter)
    rng = np.random.default_rng(5)
    dim, vocab = 7, 9
    word_ref = rng.normal(size=(vocab, dim))
    doc_ref = rng.normal(size=dim)
    idx = np.array([0, 3, 5, 3], dtype=np.int64)
    negs = np.array([[1, 2], [4, 6], [7, 8], [0, 1]], dtype=np.int64)
    lrs = np.array([0.05, 0.04, 0.03, 0.02])
    word_fast, doc_fast = word_ref.copy(), doc_ref.copy()
    total = _train_document(doc_fast, word_fast, idx, negs, lrs, True)
    expected_loss = 0.0
    for pos in range(len(idx)):
        expected_loss += negative_sampling_loss(doc_ref, word_ref, idx[pos], negs[pos])[0]
        doc_ref = sgd_step(doc_ref, word_ref, idx[pos], negs[pos], lrs[pos], train_words=True)
    np.testing.assert_allclose(doc_fast, doc_ref, rtol=1e-12, atol=1e-12)
    np.testing.assert_allclose(word_fast, word_ref, rtol=1e-12, atol=1e-12)
    assert total == pytest.approx(expected_loss, rel=1e-12)


# ---------------------------------------------------------------------------
# training and inference


@pytest.fixture(scope="module")
def synthetic_model():
    return train_dbow(synthetic_corpus(), Hyperparams(seed=0))


def test_shapes_and_finiteness(synthetic_model):
    m = synthetic_model
    assert m.doc_vectors.shape == (3, 100) and m.word_out_vectors.shape == (6, 100)
    assert np.isfinite(m.doc_vectors).all() and np.isfinite(m.word_out_vectors).all()
    assert len(m.loss_history) == 100


def test_identical_docs_embed_closer(synthetic_model):
    d = synthetic_model.doc_vectors
    assert cosine_similarity(d[0], d[1]) > cosine_similarity(d[0], d[2])


def test_training_is_deterministic(synthetic_model):
    again = train_dbow(synthetic_corpus(), Hyperparams(seed=0))
    assert again == synthetic_model
    assert dumps_model(again) == dumps_model(synthetic_model)


def test_loss_falls_then_levels_off(synthetic_model):
    h = np.asarray(synthetic_model.loss_history)
    assert h[:10].mean() > h[-10:].mean() + 0.5
    assert h[-30:].std() < 0.1


def test_loss_five_epoch_monotone_trend(synthetic_model):
    # at most one epoch E whose loss is below that of E+5
    h = synthetic_model.loss_history
    violations = [e for e in range(len(h) - 5) if h[e] < h[e + 5]]
    assert len(violations) <= 1, f"{len(violations)} violations, first at epochs {violations[:5]}"


def test_mixed_kinds_rejected():
    with pytest.raises(MixedKinds):
        train_dbow([seq("a", "a"), seq("a", "a", kind=EmbeddingKind.TAGS)], Hyperparams(epochs=1))


def test_inference_is_deterministic(synthetic_model):
    tokens = synthetic_corpus()[2]
    a = infer_vector(synthetic_model, tokens, seed=7)
    b = infer_vector(synthetic_model, tokens, seed=7)
    np.testing.assert_array_equal(a.values, b.values)
    assert len(a) == 100 and not a.all_unknown


def test_inference_self_dominance(synthetic_model):
    rng = np.random.default_rng(0)
    wins = 0
    for trial in range(20):
        i = trial % 3
        v = infer_vector(synthetic_model, synthetic_corpus()[i], seed=trial).values
        if cosine_similarity(v, synthetic_model.doc_vectors[i]) > cosine_similarity(v, rng.uniform(-1, 1, 100)):
            wins += 1
    assert wins >= 19


def test_all_unknown_tokens(synthetic_model):
    e = infer_vector(synthetic_model, seq("never", "seen"))
    assert e.all_unknown and not e.values.any()


def test_inference_kind_mismatch(synthetic_model):
    with pytest.raises(KindMismatch):
        infer_vector(synthetic_model, seq("buy", kind=EmbeddingKind.TAGS))


def test_hogwild_training_keeps_quality():
    m = train_dbow(synthetic_corpus(), Hyperparams(seed=0), workers=2)
    d = m.doc_vectors
    assert np.isfinite(d).all()
    assert cosine_similarity(d[0], d[1]) > cosine_similarity(d[0], d[2])


@pytest.mark.parametrize(
    "bad",
    [dict(dim=0), dict(epochs=0), dict(negative_samples=0), dict(final_lr=0.0), dict(final_lr=0.5), dict(min_count=0)],
)
def test_hyperparams_validation(bad):
    with pytest.raises(ValueError):
        Hyperparams(**bad)


# ---------------------------------------------------------------------------
# persistence


def test_roundtrip(tmp_path, synthetic_model):
    path = tmp_path / "m.bin"
    save_model(synthetic_model, path)
    loaded = load_model(path)
    assert loaded == synthetic_model
    assert loaded.kind is C and loaded.hyper == synthetic_model.hyper
    assert path.read_bytes()[:5] == b"W2EMB"


def test_truncated_file_rejected(synthetic_model):
    data = dumps_model(synthetic_model)
    for cut in (3, 10, 40, len(data) // 2, len(data) - 1):
        with pytest.raises((FormatError, VersionMismatch)):
            loads_model(data[:cut])


def test_bad_magic_and_version(synthetic_model):
    data = bytearray(dumps_model(synthetic_model))
    with pytest.raises(VersionMismatch):
        loads_model(b"XXXXX" + bytes(data[5:]))
    data[5] = 99
    with pytest.raises(VersionMismatch):
        loads_model(bytes(data))


def test_corrupted_payload_rejected(synthetic_model):
    data = bytearray(dumps_model(synthetic_model))
    data[len(data) // 2] ^= 0xFF
    with pytest.raises(FormatError):
        loads_model(bytes(data))


# ---------------------------------------------------------------------------
# estimator wrapper


def test_estimator_api():
    est = Doc2VecDBOW(kind="content", epochs=20, vector_size=16)
    assert est.get_params()["vector_size"] == 16
    est.fit([list(s.tokens) for s in synthetic_corpus()])
    out = est.transform([["buy", "item"], ["login", "user"]])
    assert out.shape == (2, 16)
    assert est.document_vectors_.shape == (3, 16)
    assert len(est.loss_curve_) == 20
    again = Doc2VecDBOW.from_model(est.model_)
    np.testing.assert_array_equal(again.transform([["buy"]]), est.transform([["buy"]]))
