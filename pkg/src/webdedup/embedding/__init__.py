from .dbow import (
    Doc2VecModel,
    Embedding,
    Hyperparams,
    infer_vector,
    negative_sampling_loss,
    sgd_step,
    train_dbow,
)
from .estimator import Doc2VecDBOW
from .model_io import dumps_model, load_model, loads_model, save_model
from .vocab import Vocabulary, build_vocab

__all__ = [
    "Doc2VecDBOW",
    "Doc2VecModel",
    "Embedding",
    "Hyperparams",
    "Vocabulary",
    "build_vocab",
    "dumps_model",
    "infer_vector",
    "load_model",
    "loads_model",
    "negative_sampling_loss",
    "save_model",
    "sgd_step",
    "train_dbow",
]
