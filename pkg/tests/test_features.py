import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kcpipe.errors import ValidationError
from kcpipe.features import (ClassWeights, TfIdfModel, balanced_class_weights,
                             fit_tfidf, transform)

from conftest import build_dataset


# --- fitting ------------------------------------------------------------------

def test_fit_single_doc_single_ngram():
    model = fit_tfidf(["abc"], ngram_range=(3, 3), min_df=1)
    assert model.vocabulary == {"abc": 0}
    assert model.idf[0] == pytest.approx(math.log(2 / 2) + 1.0)  # exactly 1.0


def test_fit_two_identical_docs():
    model = fit_tfidf(["abcd", "abcd"], ngram_range=(3, 3), min_df=1)
    assert set(model.vocabulary) == {"abc", "bcd"}
    assert np.allclose(model.idf, math.log(3 / 3) + 1.0)


def test_fit_short_string_contributes_nothing():
    model = fit_tfidf(["ab"], ngram_range=(3, 5), min_df=1)
    assert model.vocabulary == {}
    assert transform(model, "ab").nnz == 0


def test_fit_min_df_filters():
    model = fit_tfidf(["abcx", "abcy"], ngram_range=(3, 3), min_df=2)
    assert set(model.vocabulary) == {"abc"}
    assert model.idf[0] == pytest.approx(math.log(3 / 3) + 1.0)


def test_fit_empty_corpus_rejected():
    with pytest.raises(ValidationError):
        fit_tfidf([], ngram_range=(3, 5), min_df=1)
    with pytest.raises(ValidationError):
        fit_tfidf(["abc"], ngram_range=(0, 3), min_df=1)


def test_fit_window_includes_spaces():
    model = fit_tfidf(["a b", "a bc"], ngram_range=(3, 3), min_df=2)
    assert "a b" in model.vocabulary


def test_vocabulary_coverage_against_recount():
    corpus = ["the cat sat", "the dog sat", "a dog ran off", "cats and dogs"]
    n_min, n_max = 3, 5
    min_df = 2
    model = fit_tfidf(corpus, ngram_range=(n_min, n_max), min_df=min_df)
    # independent document-frequency recount
    all_grams = set()
    for doc in corpus:
        for n in range(n_min, n_max + 1):
            all_grams.update(doc[i:i + n] for i in range(len(doc) - n + 1))
    for gram in all_grams:
        df = sum(1 for doc in corpus
                 if any(doc[i:i + len(gram)] == gram
                        for i in range(len(doc) - len(gram) + 1)))
        assert (gram in model.vocabulary) == (df >= min_df), gram
        if gram in model.vocabulary:
            expected = math.log((1 + len(corpus)) / (1 + df)) + 1.0
            assert model.idf[model.vocabulary[gram]] == pytest.approx(expected)
    assert sorted(model.vocabulary.values()) == list(range(len(model.vocabulary)))


def test_model_json_roundtrip():
    model = fit_tfidf(["hello world", "hello there"], min_df=1)
    again = TfIdfModel.from_json(model.to_json())
    assert again.vocabulary == model.vocabulary
    assert np.array_equal(again.idf, model.idf)
    assert again.ngram_range == model.ngram_range
    v1, v2 = transform(model, "hello"), transform(again, "hello")
    assert np.array_equal(v1.indices, v2.indices)
    assert np.array_equal(v1.values, v2.values)


# --- transform -------------------------------------------------------------------

def test_transform_single_component():
    model = fit_tfidf(["abc"], ngram_range=(3, 3), min_df=1)
    vec = transform(model, "abc")
    assert vec.indices.tolist() == [0]
    assert vec.values[0] == pytest.approx(1.0)


def test_transform_out_of_vocabulary_empty():
    model = fit_tfidf(["abc"], ngram_range=(3, 3), min_df=1)
    assert transform(model, "zzzz").nnz == 0


def test_transform_equal_components():
    model = fit_tfidf(["abcd", "abcd"], ngram_range=(3, 3), min_df=1)
    # "abcbcd" holds one "abc" and one "bcd"; equal tf and idf gives 1/sqrt(2)
    vec = transform(model, "abcbcd")
    by_gram = {g: vec.values[list(vec.indices).index(i)]
               for g, i in model.vocabulary.items() if i in vec.indices}
    assert by_gram["abc"] == pytest.approx(1 / math.sqrt(2))
    assert by_gram["bcd"] == pytest.approx(1 / math.sqrt(2))


def test_transform_fit_corpus_doc_idempotent():
    corpus = ["some text here", "more text there"]
    model = fit_tfidf(corpus, min_df=1)
    a = transform(model, corpus[1])
    b = transform(model, corpus[1])
    assert np.array_equal(a.indices, b.indices)
    assert np.array_equal(a.values, b.values)


@settings(max_examples=150)
@given(st.lists(st.text(alphabet="ab c", max_size=12), min_size=1, max_size=6),
       st.text(alphabet="ab c", max_size=12))
def test_transform_unit_norm_property(corpus, doc):
    model = fit_tfidf(corpus, ngram_range=(3, 4), min_df=1)
    vec = transform(model, doc)
    if vec.nnz:
        assert vec.norm() == pytest.approx(1.0, abs=1e-9)
    assert np.all(np.diff(vec.indices) > 0)


# --- class weights -------------------------------------------------------------------

def test_weights_balanced_corpus():
    data = build_dataset([0] * 3 + [1] * 3 + [2] * 3 + [3] * 3)
    weights = balanced_class_weights(data)
    assert all(w == pytest.approx(1.0) for w in weights.weights.values())


def test_weights_imbalanced_hand_values():
    data = build_dataset([0] * 100 + [1] * 100 + [2] * 100 + [3] * 700)
    weights = balanced_class_weights(data)
    assert weights.as_array()[:3] == pytest.approx([2.5, 2.5, 2.5])
    assert weights.as_array()[3] == pytest.approx(1000 / (4 * 700))


def test_weights_singletons_balanced():
    data = build_dataset([0, 1, 2, 3])
    assert np.allclose(balanced_class_weights(data).as_array(), 1.0)


def test_weights_total_mass_identity():
    data = build_dataset([0] * 9 + [1] * 21 + [2] * 5 + [3] * 13)
    weights = balanced_class_weights(data)
    total = sum(weights.weights[lab] * data.class_counts[lab]
                for lab in weights.weights)
    assert total == pytest.approx(len(data), abs=1e-9)


def test_weights_empty_class_rejected():
    data = build_dataset([0, 0, 1, 2])
    with pytest.raises(ValidationError, match="Negotiate"):
        balanced_class_weights(data)


def test_weights_uniform_helper():
    assert np.allclose(ClassWeights.uniform().as_array(), 1.0)
