from .abstraction import AlwaysDistinctSAF, EmbeddingSAF, OracleSAF, StateAbstraction
from .bundle import dumps_classifier, load_classifier, loads_classifier, save_classifier
from .classifiers import (
    CLASSIFIER_KINDS,
    ConstantClassifier,
    KNearest,
    LinearSVM,
    MajorityVoteClassifier,
    PairLabel,
    ThresholdClassifier,
    TrainedClassifier,
    classify,
    fixed_threshold,
    make_classifier,
    train_classifier,
)
from .features import (
    PairSimilarityTransformer,
    SimilarityFeatures,
    compute_features,
    cosine_similarity,
    embed_page,
    feature_set,
    format_feature_set,
)

__all__ = [
    "AlwaysDistinctSAF",
    "CLASSIFIER_KINDS",
    "ConstantClassifier",
    "EmbeddingSAF",
    "KNearest",
    "LinearSVM",
    "MajorityVoteClassifier",
    "OracleSAF",
    "PairLabel",
    "PairSimilarityTransformer",
    "SimilarityFeatures",
    "StateAbstraction",
    "ThresholdClassifier",
    "TrainedClassifier",
    "classify",
    "compute_features",
    "cosine_similarity",
    "dumps_classifier",
    "embed_page",
    "feature_set",
    "fixed_threshold",
    "format_feature_set",
    "load_classifier",
    "loads_classifier",
    "make_classifier",
    "save_classifier",
    "train_classifier",
]
