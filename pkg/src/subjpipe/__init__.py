"""Subjectivity classification pipeline: contrastive pair generation,
PCA dimensionality reduction, elastic-net logistic regression, few-shot
adapter training, and majority-vote ensembling over external predictions."""

from .corpus import Label, LabeledDataset, Sentence, Split
from .embedstore import EmbeddingMatrix
from .ensemble import PredictionSet, majority_vote
from .fewshot import AdapterModel, FewShotConfig, Regime, train_fewshot
from .glmnet import ElasticNetLogistic, TrainConfig
from .pairgen import PairExample, PairGenConfig
from .pca import PcaReducer

__all__ = [
    "AdapterModel",
    "ElasticNetLogistic",
    "EmbeddingMatrix",
    "FewShotConfig",
    "Label",
    "LabeledDataset",
    "PairExample",
    "PairGenConfig",
    "PcaReducer",
    "PredictionSet",
    "Regime",
    "Sentence",
    "Split",
    "TrainConfig",
    "majority_vote",
    "train_fewshot",
]
