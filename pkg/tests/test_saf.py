import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from webdedup.dom import ALL_KINDS, EmbeddingKind
from webdedup.embedding import Embedding
from webdedup.errors import DimensionMismatch, EmptyDataset, FeatureMismatch, FormatError, KindMismatch, VersionMismatch
from webdedup.saf import (
    CLASSIFIER_KINDS,
    AlwaysDistinctSAF,
    EmbeddingSAF,
    MajorityVoteClassifier,
    OracleSAF,
    PairLabel,
    PairSimilarityTransformer,
    SimilarityFeatures,
    ThresholdClassifier,
    classify,
    compute_features,
    cosine_similarity,
    dumps_classifier,
    feature_set,
    fixed_threshold,
    load_classifier,
    loads_classifier,
    make_classifier,
    save_classifier,
    train_classifier,
)

CT = EmbeddingKind.CONTENT_TAGS
SEPARABLE_X = np.array([[0.1], [0.2], [0.9], [0.95]])
SEPARABLE_Y = np.array([0, 0, 1, 1])


# ---------------------------------------------------------------------------
# cosine similarity


def test_cosine_examples():
    v = np.array([0.3, -1.2, 2.0])
    assert cosine_similarity(v, v) == pytest.approx(1.0)
    assert cosine_similarity([1, 0], [0, 1]) == 0.0
    # 32 / sqrt(14 * 77)
    assert cosine_similarity([1, 2, 3], [4, 5, 6]) == pytest.approx(0.97463, abs=1e-5)
    assert cosine_similarity([0, 0], [1, 1]) == 0.0


def test_cosine_errors():
    with pytest.raises(DimensionMismatch):
        cosine_similarity([1, 2], [1, 2, 3])
    a = Embedding(EmbeddingKind.CONTENT, np.ones(3))
    b = Embedding(EmbeddingKind.TAGS, np.ones(3))
    with pytest.raises(KindMismatch):
        cosine_similarity(a, b)


vectors = st.lists(st.floats(-1e3, 1e3, allow_nan=False), min_size=3, max_size=3).filter(
    lambda v: np.linalg.norm(v) > 1e-3
)


@settings(max_examples=200, deadline=None)
@given(vectors, vectors, st.floats(1e-3, 1e3))
def test_cosine_symmetric_and_scale_invariant(a, b, lam):
    c = cosine_similarity(a, b)
    assert -1.0 <= c <= 1.0
    assert cosine_similarity(b, a) == pytest.approx(c, abs=1e-9)
    assert cosine_similarity(lam * np.asarray(a), b) == pytest.approx(c, abs=1e-9)


# ---------------------------------------------------------------------------
# feature sets and features


def test_feature_set_canonical_order():
    assert feature_set("content-tags,content") == (EmbeddingKind.CONTENT, CT)
    assert feature_set(ALL_KINDS) == ALL_KINDS
    for bad in ("", "tags,tags"):
        with pytest.raises(ValueError):
            feature_set(bad)


def test_identical_pages_score_one(fixture_model, fixture_pages):
    f = compute_features(fixture_pages["detail0"], fixture_pages["detail0"], "content-tags", {CT: fixture_model})
    assert f.kinds == (CT,)
    assert f.scores[0] == pytest.approx(1.0, abs=1e-6)


def test_all_kinds_feature_order(fixture_pages):
    from webdedup.dom import extract_tokens, parse_html
    from webdedup.embedding import Hyperparams, train_dbow

    models = {}
    for kind in ALL_KINDS:
        corpus = [extract_tokens(parse_html(h), kind) for h in fixture_pages.values()]
        models[kind] = train_dbow(corpus, Hyperparams(epochs=10, dim=20))
    f = compute_features(fixture_pages["catalog"], fixture_pages["buy"], ALL_KINDS, models)
    assert f.kinds == ALL_KINDS and len(f) == 3


def test_missing_model_rejected(fixture_model, fixture_pages):
    with pytest.raises(KeyError):
        compute_features(fixture_pages["buy"], fixture_pages["buy"], "tags", {CT: fixture_model})


def test_all_unknown_page_scores_zero(fixture_pages):
    from webdedup.dom import extract_tokens, parse_html
    from webdedup.embedding import Hyperparams, train_dbow

    kind = EmbeddingKind.CONTENT
    model = train_dbow([extract_tokens(parse_html(h), kind) for h in fixture_pages.values()], Hyperparams(epochs=5))
    page = "<p>qqq zzz</p>"
    f = compute_features(page, page, "content", {kind: model})
    assert f.scores == (0.0,)


def test_catalog_vs_detail_below_threshold(fixture_model, fixture_pages):
    f = compute_features(fixture_pages["catalog"], fixture_pages["detail0"], "content-tags", {CT: fixture_model})
    assert f.scores[0] < 0.8
    assert classify(fixed_threshold(0.8), f) is PairLabel.DISTINCT


def test_review_replica_above_threshold(fixture_model, fixture_pages):
    f = compute_features(fixture_pages["detail0"], fixture_pages["detail1"], "content-tags", {CT: fixture_model})
    assert f.scores[0] > 0.8
    assert classify(fixed_threshold(0.8), f) is PairLabel.CLONE


def test_pair_transformer(fixture_model, fixture_pages):
    t = PairSimilarityTransformer(models={CT: fixture_model}).fit()
    X = t.transform([(fixture_pages["detail0"], fixture_pages["detail0"]), (fixture_pages["buy"], fixture_pages["detail0"])])
    assert X.shape == (2, 1)
    assert X[0, 0] == pytest.approx(1.0, abs=1e-6) and X[1, 0] < 0.8


# ---------------------------------------------------------------------------
# classifiers


@pytest.mark.parametrize("kind,params", [("threshold", {}), ("decision-tree", {}), ("svm", {}), ("knn", {"k": 1})])
def test_separable_training_accuracy(kind, params):
    c = train_classifier(kind, SEPARABLE_X, SEPARABLE_Y, "content-tags", **params)
    assert np.mean(c.predict(SEPARABLE_X) == SEPARABLE_Y) == 1.0


@pytest.mark.parametrize("kind", CLASSIFIER_KINDS)
def test_every_kind_trains_and_predicts(kind):
    c = train_classifier(kind, SEPARABLE_X, SEPARABLE_Y)
    assert set(c.predict(SEPARABLE_X)) <= {0, 1}
    assert c.feature_set == (CT,)


def test_threshold_cut_on_example():
    est = ThresholdClassifier().fit([[0.56], [0.58], [0.95]], [0, 0, 1])
    assert 0.58 < est.threshold_ <= 0.95
    assert est.predict([[0.95], [0.56]]).tolist() == [1, 0]


def test_threshold_order_invariant():
    rng = np.random.default_rng(0)
    X = rng.random((30, 1))
    y = (X[:, 0] + rng.normal(0, 0.2, 30) > 0.5).astype(int)
    cut = ThresholdClassifier().fit(X, y).threshold_
    for _ in range(5):
        perm = rng.permutation(30)
        assert ThresholdClassifier().fit(X[perm], y[perm]).threshold_ == cut


def test_fixed_threshold_rule():
    c = fixed_threshold(0.8)
    assert classify(c, SimilarityFeatures((CT,), (0.95,))) is PairLabel.CLONE
    assert classify(c, SimilarityFeatures((CT,), (0.56,))) is PairLabel.DISTINCT
    assert classify(c, [0.8]) is PairLabel.DISTINCT


def test_single_class_is_degenerate():
    c = train_classifier("svm", [[0.9], [0.95]], [1, 1])
    assert c.degenerate
    assert c.predict([[0.0], [0.5]]).tolist() == [1, 1]
    assert classify(c, [0.1]) is PairLabel.CLONE


def test_empty_dataset_rejected():
    with pytest.raises(EmptyDataset):
        train_classifier("svm", np.empty((0, 1)), [])


def test_feature_mismatch():
    c = train_classifier("threshold", SEPARABLE_X, SEPARABLE_Y)
    with pytest.raises(FeatureMismatch):
        classify(c, [0.5, 0.5])
    with pytest.raises(FeatureMismatch):
        classify(c, SimilarityFeatures((EmbeddingKind.TAGS,), (0.5,)))


def test_knn1_memorizes_distinct_points():
    rng = np.random.default_rng(1)
    X = rng.random((40, 3))
    y = rng.integers(0, 2, 40)
    y[:2] = [0, 1]
    c = train_classifier("knn", X, y, ALL_KINDS, k=1)
    assert (c.predict(X) == y).all()


def test_ensemble_is_member_mode():
    rng = np.random.default_rng(2)
    X = rng.random((60, 1))
    y = (X[:, 0] + rng.normal(0, 0.15, 60) > 0.5).astype(int)
    ens = make_classifier("ensemble").fit(X, y)
    probe = rng.random((1000, 1))
    votes = ens.member_predictions(probe)
    mode = (votes.sum(axis=0) * 2 > votes.shape[0]).astype(int)
    assert (ens.predict(probe) == mode).all()


def test_ensemble_tie_is_distinct():
    members = [("a", make_classifier("threshold", threshold=0.0)), ("b", make_classifier("threshold", threshold=1.0))]
    ens = MajorityVoteClassifier(members).fit(SEPARABLE_X, SEPARABLE_Y)
    assert ens.predict([[0.5]]).tolist() == [0]


def test_classify_is_pure():
    c = train_classifier("random-forest", SEPARABLE_X, SEPARABLE_Y)
    assert len({classify(c, [0.6]) for _ in range(10)}) == 1


def test_get_params_roundtrip():
    est = make_classifier("svm")
    assert est.get_params() == {"reg": 1e-3, "epochs": 200, "lr": 0.1, "seed": 0}


# ---------------------------------------------------------------------------
# bundles and abstractions


@pytest.mark.parametrize("kind", CLASSIFIER_KINDS)
def test_bundle_roundtrip(tmp_path, kind):
    c = train_classifier(kind, SEPARABLE_X, SEPARABLE_Y)
    path = tmp_path / "c.saf"
    save_classifier(c, path)
    loaded = load_classifier(path)
    assert loaded.kind == c.kind and loaded.feature_set == c.feature_set
    probe = np.linspace(0, 1, 21).reshape(-1, 1)
    assert (loaded.predict(probe) == c.predict(probe)).all()


def test_bundle_corruption():
    data = dumps_classifier(train_classifier("svm", SEPARABLE_X, SEPARABLE_Y))
    with pytest.raises(VersionMismatch):
        loads_classifier(b"NOPE" + data[4:])
    with pytest.raises(FormatError):
        loads_classifier(data[:-3])


def test_embedding_saf(fixture_model, fixture_pages):
    saf = EmbeddingSAF({CT: fixture_model}, fixed_threshold(0.8))
    assert saf.classify_pages(fixture_pages["detail0"], fixture_pages["detail1"]) is PairLabel.CLONE
    assert saf.classify_pages(fixture_pages["buy"], fixture_pages["detail0"]) is PairLabel.DISTINCT
    # identical pages share one cached representation
    assert saf.represent(fixture_pages["buy"]) is saf.represent(fixture_pages["buy"])


def test_simple_abstractions():
    o = OracleSAF(len)
    assert o.compare(o.represent("ab"), o.represent("cd")) is PairLabel.CLONE
    assert o.compare(o.represent("ab"), o.represent("c")) is PairLabel.DISTINCT
    d = AlwaysDistinctSAF()
    assert d.compare(d.represent("x"), d.represent("x")) is PairLabel.DISTINCT
