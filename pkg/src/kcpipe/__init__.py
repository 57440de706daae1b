"""Knowledge-construction comment classification pipeline.

Modules:
    corpus         data model, ingestion, normalization, folds, agreement
    features       character n-gram TF-IDF and class weights
    linear_models  from-scratch logistic regression / linear SVM baselines
    neural         tiny attention classifier with the composite objective
    evalstats      metrics and the statistical comparison suite
    runner         CV orchestration, ensembling, comparison, reports
"""

from .corpus import (Dataset, FoldPlan, KCLabel, LabeledExample, SourceKind,
                     cohens_kappa, ingest, normalize_text, stratified_kfold)
from .errors import DegenerateInputError, NumericError, ValidationError

__version__ = "0.1.0"

__all__ = [
    "Dataset", "DegenerateInputError", "FoldPlan", "KCLabel", "LabeledExample",
    "NumericError", "SourceKind", "ValidationError", "cohens_kappa", "ingest",
    "normalize_text", "stratified_kfold", "__version__",
]
