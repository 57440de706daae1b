import json
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kcpipe.corpus import (Dataset, FoldPlan, KCLabel, SourceKind,
                           cohens_kappa, ingest, normalize_text,
                           stratified_kfold, write_jsonl)
from kcpipe.errors import ValidationError

from conftest import build_dataset


# --- labels -------------------------------------------------------------------

def test_label_codes_and_names():
    assert [int(lab) for lab in KCLabel] == [0, 1, 2, 3]
    assert [lab.display_name for lab in KCLabel] == ["nonKC", "Share", "Explore", "Negotiate"]
    for lab in KCLabel:
        assert lab.definition.strip()
        assert KCLabel.from_string(lab.display_name) is lab
        assert KCLabel.from_string(lab.display_name.upper()) is lab


def test_label_unknown_name_rejected():
    with pytest.raises(ValidationError, match="unknown label"):
        KCLabel.from_string("chitchat")


# --- ingestion ----------------------------------------------------------------

def test_ingest_single_jsonl_record(tmp_path):
    path = tmp_path / "one.jsonl"
    path.write_text('{"text": "That\'s cool!", "label": "nonKC"}\n')
    data = ingest(path, format="jsonl")
    assert len(data) == 1
    assert data.class_counts[KCLabel.NONKC] == 1
    ex = data.examples[0]
    assert ex.id == "row-0"
    assert ex.normalized_text == normalize_text(ex.raw_text)
    assert ex.source is SourceKind.UNKNOWN


def test_ingest_lowercase_label_accepted(tmp_path):
    path = tmp_path / "low.jsonl"
    path.write_text('{"text": "x", "label": "negotiate"}\n')
    data = ingest(path)
    assert data.examples[0].label is KCLabel.NEGOTIATE


def test_ingest_csv(tmp_path):
    path = tmp_path / "d.csv"
    path.write_text(
        "id,text,label,source\n"
        "a,Hello there,Share,short_video\n"
        ",What is this?,share,long_video\n")
    data = ingest(path, format="csv")
    assert [ex.id for ex in data.examples] == ["a", "row-1"]
    assert data.class_counts[KCLabel.SHARE] == 2
    assert data.examples[0].source is SourceKind.SHORT_VIDEO


def test_ingest_unknown_label_names_record(tmp_path):
    path = tmp_path / "bad.jsonl"
    path.write_text('{"text": "a", "label": "Share"}\n{"text": "b", "label": "nope"}\n')
    with pytest.raises(ValidationError, match="record 1"):
        ingest(path)


def test_ingest_duplicate_id_rejected(tmp_path):
    path = tmp_path / "dup.jsonl"
    path.write_text('{"id": "x", "text": "a", "label": "Share"}\n'
                    '{"id": "x", "text": "b", "label": "Share"}\n')
    with pytest.raises(ValidationError, match="duplicate id"):
        ingest(path)


def test_ingest_missing_file_is_io_error(tmp_path):
    with pytest.raises(OSError):
        ingest(tmp_path / "absent.jsonl")


def test_ingest_invalid_json_and_source(tmp_path):
    bad = tmp_path / "bad.jsonl"
    bad.write_text("{not json}\n")
    with pytest.raises(ValidationError, match="invalid JSON"):
        ingest(bad)
    bad_source = tmp_path / "src.jsonl"
    bad_source.write_text('{"text": "a", "label": "Share", "source": "tv"}\n')
    with pytest.raises(ValidationError, match="unknown source"):
        ingest(bad_source)


def test_ingest_balanced_20k_counts(tmp_path):
    path = tmp_path / "big.jsonl"
    with path.open("w") as fh:
        i = 0
        for lab in KCLabel:
            for _ in range(5000):
                fh.write(json.dumps({"id": str(i), "text": f"t {i}",
                                     "label": lab.display_name}) + "\n")
                i += 1
    data = ingest(path)
    assert len(data) == 20_000
    assert all(data.class_counts[lab] == 5000 for lab in KCLabel)


def test_write_jsonl_roundtrip(tmp_path, small_dataset):
    out = tmp_path / "round.jsonl"
    write_jsonl(small_dataset, out)
    again = ingest(out)
    assert [ex.id for ex in again.examples] == [ex.id for ex in small_dataset.examples]
    assert [ex.label for ex in again.examples] == [ex.label for ex in small_dataset.examples]


# --- normalization ---------------------------------------------------------------

@pytest.mark.parametrize("raw,expected", [
    ("Check https://x.co NOW!", "check now!"),
    ("", ""),
    ("@bob I agree.", "i agree."),
    ("see www.example.com/page for more", "see for more"),
    ("So COOL \U0001F600\U0001F680!", "so cool !"),
    ("many\t\nspaces   here ", "many spaces here"),
    ("keep; the, punctuation: intact!?", "keep; the, punctuation: intact!?"),
    ("nested ftp://files.example.org/x then text", "nested then text"),
])
def test_normalize_examples(raw, expected):
    assert normalize_text(raw) == expected


def test_normalize_preserves_non_latin():
    assert normalize_text("份 Привет κόσμος") == "份 привет κόσμος"


def test_normalize_strips_variation_selector_and_zwj():
    combo = "a ❤️‍\U0001F525 b"  # heart + VS16 + ZWJ + fire
    out = normalize_text(combo)
    assert "️" not in out and "‍" not in out
    assert out.startswith("a") and out.endswith("b")


@settings(max_examples=300)
@given(st.text(max_size=200))
def test_normalize_is_a_fixed_point(text):
    once = normalize_text(text)
    assert normalize_text(once) == once


# --- stratified folds -------------------------------------------------------------

def _per_class_fold_counts(plan: FoldPlan, data: Dataset):
    counts = {lab: Counter() for lab in KCLabel}
    for ex in data.examples:
        counts[ex.label][plan.assignment[ex.id]] += 1
    return counts


def assert_stratified(plan: FoldPlan, data: Dataset):
    for lab, ctr in _per_class_fold_counts(plan, data).items():
        if data.class_counts[lab] == 0:
            continue
        by_fold = [ctr.get(f, 0) for f in range(plan.n_folds)]
        assert max(by_fold) - min(by_fold) <= 1, (lab, by_fold)


def test_stratified_paper_shape_exact_counts():
    data = build_dataset([c for c in range(4) for _ in range(5000)])
    plan = stratified_kfold(data, n_folds=10, seed=42)
    counts = _per_class_fold_counts(plan, data)
    for lab in KCLabel:
        assert all(counts[lab][f] == 500 for f in range(10))
    fold_sizes = Counter(plan.assignment.values())
    assert all(fold_sizes[f] == 2000 for f in range(10))


def test_stratified_two_singletons():
    data = build_dataset([0, 0])
    plan = stratified_kfold(data, n_folds=2, seed=0)
    assert sorted(plan.assignment.values()) == [0, 1]


def test_stratified_four_examples_two_classes():
    data = build_dataset([0, 0, 1, 1])
    plan = stratified_kfold(data, n_folds=2, seed=5)
    counts = _per_class_fold_counts(plan, data)
    for lab in (KCLabel.NONKC, KCLabel.SHARE):
        assert counts[lab][0] == 1 and counts[lab][1] == 1


def test_stratified_determinism_and_seed_sensitivity():
    data = build_dataset([c for c in range(4) for _ in range(30)])
    plan_a = stratified_kfold(data, n_folds=5, seed=9)
    plan_b = stratified_kfold(data, n_folds=5, seed=9)
    assert plan_a.assignment == plan_b.assignment
    plan_c = stratified_kfold(data, n_folds=5, seed=10)
    assert plan_c.assignment != plan_a.assignment


def test_stratified_uneven_counts_within_one():
    data = build_dataset([0] * 23 + [1] * 17 + [2] * 40 + [3] * 11)
    plan = stratified_kfold(data, n_folds=7, seed=1)
    assert_stratified(plan, data)


def test_stratified_permutation_keeps_counts():
    labels = [c for c in range(4) for _ in range(25)]
    data = build_dataset(labels)
    plan = stratified_kfold(data, n_folds=10, seed=3)
    rng = np.random.default_rng(0)
    shuffled = Dataset.from_examples(
        [data.examples[i] for i in rng.permutation(len(labels))])
    plan_shuffled = stratified_kfold(shuffled, n_folds=10, seed=3)
    assert plan_shuffled.assignment != plan.assignment  # order-sensitive
    original = _per_class_fold_counts(plan, data)
    after = _per_class_fold_counts(plan_shuffled, shuffled)
    for lab in KCLabel:
        assert sorted(original[lab].values()) == sorted(after[lab].values())
    assert_stratified(plan_shuffled, shuffled)


def test_stratified_small_class_error_names_class():
    data = build_dataset([0] * 12 + [1] * 12 + [2] * 12 + [3] * 3)
    with pytest.raises(ValidationError, match="Negotiate"):
        stratified_kfold(data, n_folds=5, seed=0)


def test_foldplan_json_roundtrip():
    data = build_dataset([c for c in range(4) for _ in range(10)])
    plan = stratified_kfold(data, n_folds=5, seed=2)
    again = FoldPlan.from_json(plan.to_json())
    assert again == plan


# --- Cohen's kappa -------------------------------------------------------------------

def test_kappa_perfect_agreement():
    labels = [0, 1, 2, 3, 0, 1, 2, 3, 1, 2]
    assert cohens_kappa(labels, labels) == 1.0


def test_kappa_perfect_disagreement():
    assert cohens_kappa([0, 0, 1, 1], [1, 1, 0, 0]) == pytest.approx(-1.0)


def test_kappa_strong_agreement_table():
    # 400 items, uniform marginals (100 per class per coder), 361 on the
    # diagonal: p_o = 0.9025, p_e = 0.25, kappa = 0.6525 / 0.75 = 0.87.
    diag = {0: 91, 1: 90, 2: 90, 3: 90}
    off = {(0, 1): 9, (1, 2): 10, (2, 3): 10, (3, 0): 9, (3, 1): 1}
    a, b = [], []
    for c, n in diag.items():
        a += [c] * n
        b += [c] * n
    for (i, j), n in off.items():
        a += [i] * n
        b += [j] * n
    assert Counter(a) == {c: 100 for c in range(4)}
    assert Counter(b) == {c: 100 for c in range(4)}
    assert cohens_kappa(a, b) == pytest.approx(0.87, abs=1e-12)


def test_kappa_symmetry():
    rng = np.random.default_rng(4)
    a = rng.integers(0, 4, 50).tolist()
    b = rng.integers(0, 4, 50).tolist()
    assert cohens_kappa(a, b) == pytest.approx(cohens_kappa(b, a), abs=0)


def test_kappa_independent_labelings_near_zero():
    rng = np.random.default_rng(123)
    a = rng.integers(0, 4, 10_000)
    b = rng.integers(0, 4, 10_000)
    assert abs(cohens_kappa(a, b)) <= 0.05


def test_kappa_degenerate_single_label():
    assert cohens_kappa([2, 2, 2], [2, 2, 2]) == 1.0


def test_kappa_input_validation():
    with pytest.raises(ValidationError):
        cohens_kappa([0, 1], [0])
    with pytest.raises(ValidationError):
        cohens_kappa([], [])
