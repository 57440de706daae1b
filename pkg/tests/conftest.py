import pytest

from kcpipe.corpus import (Dataset, KCLabel, LabeledExample, SourceKind,
                           ingest, normalize_text)
from kcpipe.demo_data import make_corpus, write_jsonl


def build_dataset(labels, texts=None, prefix="ex") -> Dataset:
    """Dataset from a label list (and optional matching texts)."""
    examples = []
    for i, lab in enumerate(labels):
        raw = texts[i] if texts is not None else f"text {i}"
        examples.append(LabeledExample(
            id=f"{prefix}-{i}", raw_text=raw, normalized_text=normalize_text(raw),
            label=KCLabel(lab), source=SourceKind.UNKNOWN))
    return Dataset.from_examples(examples)


@pytest.fixture(scope="session")
def demo_file(tmp_path_factory):
    """800-document separable 4-class corpus on disk (JSONL)."""
    path = tmp_path_factory.mktemp("data") / "demo800.jsonl"
    write_jsonl(make_corpus(n_docs=800, seed=7), str(path))
    return path


@pytest.fixture(scope="session")
def demo_dataset(demo_file):
    return ingest(demo_file, format="jsonl")


@pytest.fixture(scope="session")
def small_file(tmp_path_factory):
    """200-document corpus for the quicker training tests."""
    path = tmp_path_factory.mktemp("data") / "demo200.jsonl"
    write_jsonl(make_corpus(n_docs=200, seed=11), str(path))
    return path


@pytest.fixture(scope="session")
def small_dataset(small_file):
    return ingest(small_file, format="jsonl")
