"""Threshold-free pair classifiers over similarity features.

Decision trees, random forests, nearest neighbours and Gaussian naive Bayes
come from scikit-learn; the threshold rule, the linear SVM and the majority
vote are defined here. All estimators follow the scikit-learn protocol and
predict 1 for clone/near-duplicate pairs, 0 for distinct pairs.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, clone
from sklearn.ensemble import RandomForestClassifier
from sklearn.naive_bayes import GaussianNB
from sklearn.neighbors import KNeighborsClassifier
from sklearn.tree import DecisionTreeClassifier
from sklearn.utils.validation import check_is_fitted

from .._validation import as_feature_matrix, as_labels
from ..dom import ALL_KINDS
from ..errors import EmptyDataset, FeatureMismatch
from .features import SimilarityFeatures, feature_set, format_feature_set


class PairLabel(enum.IntEnum):
    DISTINCT = 0
    CLONE = 1


def _f1_scores(tp, n_pos, n_pred):
    with np.errstate(divide="ignore", invalid="ignore"):
        f1 = np.where(n_pred + n_pos > 0, 2 * tp / (n_pred + n_pos), 0.0)
    return f1


class ThresholdClassifier(ClassifierMixin, BaseEstimator):
    """Predict clone when one similarity feature exceeds a cut.

    With ``threshold=None`` the cut is learned: candidate cuts are midpoints
    between consecutive distinct training values (plus one below the minimum
    and one at the maximum); the cut with the best training F1 wins, ties
    going to the higher cut.
    """

    def __init__(self, feature=-1, threshold=None):
        self.feature = feature
        self.threshold = threshold

    def fit(self, X, y):
        X = as_feature_matrix(X)
        y = as_labels(y)
        self.classes_ = np.array([0, 1])
        self.n_features_in_ = X.shape[1]
        if self.threshold is not None:
            self.threshold_ = float(self.threshold)
            return self
        v = X[:, self.feature]
        uniq = np.unique(v)
        cuts = np.concatenate(([uniq[0] - 1.0], (uniq[:-1] + uniq[1:]) / 2.0, [uniq[-1]]))
        pred = v[None, :] > cuts[:, None]
        tp = (pred & (y[None, :] == 1)).sum(axis=1)
        n_pred = pred.sum(axis=1)
        f1 = _f1_scores(tp, int(y.sum()), n_pred)
        best = np.flatnonzero(f1 == f1.max())[-1]
        self.threshold_ = float(cuts[best])
        return self

    def predict(self, X):
        check_is_fitted(self, "threshold_")
        X = as_feature_matrix(X, self.n_features_in_)
        return (X[:, self.feature] > self.threshold_).astype(np.int64)


class LinearSVM(ClassifierMixin, BaseEstimator):
    """Linear SVM fit by stochastic sub-gradient descent on hinge loss + L2.

    Minimises ``reg/2 * |w|^2 + mean(max(0, 1 - y (w.x + b)))`` with step
    size ``lr / t`` in epoch ``t``. Features are standardised with the
    training mean and spread before fitting.
    """

    def __init__(self, reg=1e-3, epochs=200, lr=0.1, seed=0):
        self.reg = reg
        self.epochs = epochs
        self.lr = lr
        self.seed = seed

    def fit(self, X, y):
        X = as_feature_matrix(X)
        y = as_labels(y)
        self.classes_ = np.array([0, 1])
        self.n_features_in_ = X.shape[1]
        self.mean_ = X.mean(axis=0)
        scale = X.std(axis=0)
        self.scale_ = np.where(scale > 0, scale, 1.0)
        X = (X - self.mean_) / self.scale_
        signs = np.where(y == 1, 1.0, -1.0)
        rng = np.random.default_rng(self.seed)
        w = np.zeros(X.shape[1])
        b = 0.0
        for t in range(1, self.epochs + 1):
            step = self.lr / t
            for i in rng.permutation(len(X)):
                margin = signs[i] * (X[i] @ w + b)
                w *= 1.0 - step * self.reg
                if margin < 1.0:
                    w += step * signs[i] * X[i]
                    b += step * signs[i]
        self.coef_ = w
        self.intercept_ = b
        return self

    def decision_function(self, X):
        check_is_fitted(self, "coef_")
        X = as_feature_matrix(X, self.n_features_in_)
        return ((X - self.mean_) / self.scale_) @ self.coef_ + self.intercept_

    def predict(self, X):
        return (self.decision_function(X) > 0).astype(np.int64)


class KNearest(ClassifierMixin, BaseEstimator):
    """k-nearest-neighbour vote; k is capped at the training-set size."""

    def __init__(self, n_neighbors=5):
        self.n_neighbors = n_neighbors

    def fit(self, X, y):
        X = as_feature_matrix(X)
        y = as_labels(y)
        self.classes_ = np.array([0, 1])
        self.n_features_in_ = X.shape[1]
        k = max(1, min(self.n_neighbors, len(X)))
        self.knn_ = KNeighborsClassifier(n_neighbors=k).fit(X, y)
        return self

    def predict(self, X):
        check_is_fitted(self, "knn_")
        return self.knn_.predict(as_feature_matrix(X, self.n_features_in_)).astype(np.int64)


class ConstantClassifier(ClassifierMixin, BaseEstimator):
    def __init__(self, label=0):
        self.label = label

    def fit(self, X, y=None):
        X = as_feature_matrix(X)
        self.classes_ = np.array([0, 1])
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        X = as_feature_matrix(X, getattr(self, "n_features_in_", None))
        return np.full(len(X), int(self.label), dtype=np.int64)


class MajorityVoteClassifier(ClassifierMixin, BaseEstimator):
    """Hard majority vote; ties predict distinct."""

    def __init__(self, estimators=None):
        self.estimators = estimators

    def fit(self, X, y):
        X = as_feature_matrix(X)
        y = as_labels(y)
        self.classes_ = np.array([0, 1])
        self.n_features_in_ = X.shape[1]
        members = self.estimators if self.estimators is not None else default_members()
        self.estimators_ = [(name, clone(est).fit(X, y)) for name, est in members]
        return self

    def member_predictions(self, X):
        check_is_fitted(self, "estimators_")
        X = as_feature_matrix(X, self.n_features_in_)
        return np.vstack([est.predict(X) for _, est in self.estimators_])

    def predict(self, X):
        votes = self.member_predictions(X)
        return (2 * votes.sum(axis=0) > votes.shape[0]).astype(np.int64)


# ---------------------------------------------------------------------------
# factory

CLASSIFIER_KINDS = ("threshold", "knn", "decision-tree", "naive-bayes", "svm", "random-forest", "ensemble")

_ALIASES = {
    "threshold": "threshold",
    "knn": "knn",
    "nearest-neighbour": "knn",
    "k-nearest": "knn",
    "decision-tree": "decision-tree",
    "tree": "decision-tree",
    "dt": "decision-tree",
    "naive-bayes": "naive-bayes",
    "gaussian-nb": "naive-bayes",
    "nb": "naive-bayes",
    "svm": "svm",
    "linear-svm": "svm",
    "random-forest": "random-forest",
    "rf": "random-forest",
    "forest": "random-forest",
    "ensemble": "ensemble",
    "majority": "ensemble",
}


def canonical_kind(kind: str) -> str:
    key = kind.strip().lower().replace("_", "-")
    if key not in _ALIASES:
        raise ValueError(f"unknown classifier kind {kind!r}; choose from {', '.join(CLASSIFIER_KINDS)}")
    return _ALIASES[key]


def make_classifier(kind: str, *, k=5, n_trees=50, seed=0, threshold=None, feature=-1) -> BaseEstimator:
    kind = canonical_kind(kind)
    if kind == "threshold":
        return ThresholdClassifier(feature=feature, threshold=threshold)
    if kind == "knn":
        return KNearest(n_neighbors=k)
    if kind == "decision-tree":
        return DecisionTreeClassifier(criterion="gini", random_state=seed)
    if kind == "naive-bayes":
        return GaussianNB()
    if kind == "svm":
        return LinearSVM(seed=seed)
    if kind == "random-forest":
        return RandomForestClassifier(n_estimators=n_trees, criterion="gini", random_state=seed)
    return MajorityVoteClassifier(default_members(k=k, n_trees=n_trees, seed=seed, feature=feature))


def default_members(k=5, n_trees=50, seed=0, feature=-1):
    return [
        (name, make_classifier(name, k=k, n_trees=n_trees, seed=seed, feature=feature))
        for name in CLASSIFIER_KINDS
        if name != "ensemble"
    ]


@dataclass
class TrainedClassifier:
    kind: str
    estimator: BaseEstimator
    feature_set: tuple
    degenerate: bool = False

    def predict(self, X) -> np.ndarray:
        X = as_feature_matrix(X, len(self.feature_set))
        return np.asarray(self.estimator.predict(X), dtype=np.int64)

    def describe(self) -> str:
        extra = " (degenerate: single-class training data)" if self.degenerate else ""
        return f"{self.kind} on [{format_feature_set(self.feature_set)}]{extra}"


def train_classifier(kind, X, y, kinds=None, **params) -> TrainedClassifier:
    """Fit a pair classifier on similarity features.

    ``X`` rows follow the order of ``kinds`` (defaults to inferring a
    single-kind content-tags set for one column).
    """
    kind = canonical_kind(kind)
    if kinds is None:
        kinds = getattr(X[0], "kinds", None) if len(X) and isinstance(X[0], SimilarityFeatures) else None
    if len(X) == 0:
        raise EmptyDataset("cannot train a classifier on an empty dataset")
    X = as_feature_matrix([getattr(r, "scores", r) for r in X] if not isinstance(X, np.ndarray) else X)
    y = as_labels(y)
    if len(y) != len(X):
        raise FeatureMismatch(f"{len(X)} feature rows but {len(y)} labels")
    kinds = feature_set(kinds) if kinds is not None else _default_kinds(X.shape[1])
    if len(kinds) != X.shape[1]:
        raise FeatureMismatch(f"{len(kinds)} embedding kinds but {X.shape[1]} feature columns")
    observed = np.unique(y)
    if len(observed) == 1:
        est = ConstantClassifier(int(observed[0])).fit(X, y)
        return TrainedClassifier(kind, est, kinds, degenerate=True)
    est = make_classifier(kind, **params).fit(X, y)
    return TrainedClassifier(kind, est, kinds)


def _default_kinds(n):
    if n == 1:
        return (ALL_KINDS[2],)
    if n == 3:
        return ALL_KINDS
    raise FeatureMismatch(f"cannot infer the embedding kinds of {n} feature columns; pass kinds=")


def fixed_threshold(threshold: float, kinds="content-tags", feature=-1) -> TrainedClassifier:
    """A threshold rule that needs no training data."""
    kinds = feature_set(kinds)
    est = ThresholdClassifier(feature=feature, threshold=threshold)
    est.fit(np.zeros((2, len(kinds))), [0, 1])
    return TrainedClassifier("threshold", est, kinds)


def classify(c: TrainedClassifier, f) -> PairLabel:
    scores = np.asarray(getattr(f, "scores", f), dtype=np.float64).ravel()
    if isinstance(f, SimilarityFeatures) and tuple(f.kinds) != tuple(c.feature_set):
        raise FeatureMismatch(
            f"features computed for [{format_feature_set(f.kinds)}], classifier expects "
            f"[{format_feature_set(c.feature_set)}]"
        )
    if len(scores) != len(c.feature_set):
        raise FeatureMismatch(f"expected {len(c.feature_set)} features, got {len(scores)}")
    return PairLabel(int(c.predict(scores.reshape(1, -1))[0]))
