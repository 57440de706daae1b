"""Character n-gram TF-IDF features and balanced class weights.

The n-gram window slides over the whole normalized string, spaces included;
there is no word segmentation. Conventions are fixed for reproducibility:
smoothed idf ``ln((1 + N) / (1 + df)) + 1``, raw term counts, L2-normalized
output vectors.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .corpus import Dataset, KCLabel, NUM_CLASSES
from .errors import ValidationError


@dataclass(frozen=True)
class SparseVector:
    """Sorted sparse feature vector (parallel index/value arrays)."""

    indices: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        if len(self.indices) != len(self.values):
            raise ValidationError("indices and values must have the same length")

    @property
    def nnz(self) -> int:
        return len(self.indices)

    def norm(self) -> float:
        return float(np.sqrt(np.sum(self.values ** 2)))


EMPTY_SPARSE = SparseVector(indices=np.empty(0, dtype=np.int64),
                            values=np.empty(0, dtype=np.float64))


def _char_ngrams(text: str, n_min: int, n_max: int):
    for n in range(n_min, n_max + 1):
        for i in range(len(text) - n + 1):
            yield text[i:i + n]


@dataclass(frozen=True)
class TfIdfModel:
    ngram_range: tuple[int, int]
    vocabulary: dict[str, int]
    idf: np.ndarray
    sublinear_tf: bool = False
    min_df: int = 2

    @property
    def n_features(self) -> int:
        return len(self.vocabulary)

    def to_json(self) -> str:
        return json.dumps({
            "ngram_range": list(self.ngram_range),
            "min_df": self.min_df,
            "sublinear_tf": self.sublinear_tf,
            "vocabulary": self.vocabulary,
            "idf": self.idf.tolist(),
        }, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "TfIdfModel":
        obj = json.loads(text)
        return cls(ngram_range=tuple(obj["ngram_range"]),
                   vocabulary={str(k): int(v) for k, v in obj["vocabulary"].items()},
                   idf=np.asarray(obj["idf"], dtype=np.float64),
                   sublinear_tf=bool(obj["sublinear_tf"]),
                   min_df=int(obj["min_df"]))


def fit_tfidf(corpus: list[str], ngram_range: tuple[int, int] = (3, 5),
              min_df: int = 2) -> TfIdfModel:
    """Build the n-gram vocabulary and idf vector from normalized documents.

    Vocabulary keeps every n-gram with document frequency >= min_df, indexed
    in lexicographic order; idf_t = ln((1 + N) / (1 + df_t)) + 1.
    """
    if not corpus:
        raise ValidationError("empty corpus")
    n_min, n_max = ngram_range
    if not (1 <= n_min <= n_max):
        raise ValidationError(f"bad ngram_range {ngram_range}")
    df: Counter[str] = Counter()
    for doc in corpus:
        df.update(set(_char_ngrams(doc, n_min, n_max)))
    kept = sorted(g for g, c in df.items() if c >= min_df)
    vocabulary = {g: i for i, g in enumerate(kept)}
    n_docs = len(corpus)
    idf = np.array([math.log((1 + n_docs) / (1 + df[g])) + 1.0 for g in kept],
                   dtype=np.float64)
    return TfIdfModel(ngram_range=(n_min, n_max), vocabulary=vocabulary,
                      idf=idf, min_df=min_df)


def transform(model: TfIdfModel, text: str) -> SparseVector:
    """Map one document to its L2-normalized tf-idf vector.

    Out-of-vocabulary n-grams are ignored; a document with no in-vocabulary
    n-grams maps to the empty vector.
    """
    n_min, n_max = model.ngram_range
    counts: Counter[int] = Counter()
    vocab = model.vocabulary
    for gram in _char_ngrams(text, n_min, n_max):
        col = vocab.get(gram)
        if col is not None:
            counts[col] += 1
    if not counts:
        return EMPTY_SPARSE
    indices = np.array(sorted(counts), dtype=np.int64)
    tf = np.array([counts[i] for i in indices], dtype=np.float64)
    if model.sublinear_tf:
        tf = 1.0 + np.log(tf)
    values = tf * model.idf[indices]
    values /= np.sqrt(np.sum(values ** 2))
    return SparseVector(indices=indices, values=values)


@dataclass(frozen=True)
class ClassWeights:
    """Per-class weights n_total / (K * n_c); all 1.0 on a balanced corpus."""

    weights: dict[KCLabel, float] = field(default_factory=dict)

    def __getitem__(self, label: KCLabel) -> float:
        return self.weights[label]

    def as_array(self) -> np.ndarray:
        return np.array([self.weights[lab] for lab in KCLabel], dtype=np.float64)

    @classmethod
    def uniform(cls) -> "ClassWeights":
        return cls(weights={lab: 1.0 for lab in KCLabel})


def balanced_class_weights(data: Dataset) -> ClassWeights:
    n_total = len(data)
    weights = {}
    for lab in KCLabel:
        n_c = data.class_counts.get(lab, 0)
        if n_c == 0:
            raise ValidationError(f"class {lab.display_name} has no examples")
        weights[lab] = n_total / (NUM_CLASSES * n_c)
    return ClassWeights(weights=weights)
