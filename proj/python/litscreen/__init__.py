"""Screening models for systematic-review abstracts."""

import json

from ._core import (
    ConfigError,
    DataError,
    IoError,
    ProvenanceError,
    boolean_match,
    generate_synthetic,
    lemmatize,
    load_corpus,
    porter_stem,
    pr_auc,
    preprocess,
    roc_auc,
    score,
    tokenize,
    train,
    workload,
)
from ._core import cross_validate_json as _cross_validate_json


def cross_validate(corpus_path, recipe, *, seed, k=5, n_trees=500, threads=1):
    """k-fold report for one recipe ("model1", "model2", "model3:N") as a dict."""
    return json.loads(_cross_validate_json(str(corpus_path), recipe, k, seed, n_trees, threads))


__all__ = [
    "ConfigError",
    "DataError",
    "IoError",
    "ProvenanceError",
    "boolean_match",
    "cross_validate",
    "generate_synthetic",
    "lemmatize",
    "load_corpus",
    "porter_stem",
    "pr_auc",
    "preprocess",
    "roc_auc",
    "score",
    "tokenize",
    "train",
    "workload",
]
