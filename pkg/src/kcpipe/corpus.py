"""Comment corpus handling: data model, ingestion, text normalization,
stratified fold planning, and inter-coder agreement.

A labeled example is one top-level comment with one of four
knowledge-construction (KC) codes. Datasets are read from JSONL or CSV
files with columns/keys ``id`` (optional), ``text``, ``label`` and
``source`` (optional), normalized on ingest, and split into stratified
folds with a seeded, order-independent-per-class construction.
"""

from __future__ import annotations

import csv
import json
import re
from collections import Counter
from dataclasses import dataclass
from enum import Enum, IntEnum
from pathlib import Path

import numpy as np

from .errors import ValidationError


class KCLabel(IntEnum):
    """The four knowledge-construction codes, ordered by epistemic depth."""

    NONKC = 0
    SHARE = 1
    EXPLORE = 2
    NEGOTIATE = 3

    @property
    def display_name(self) -> str:
        return _DISPLAY_NAMES[self]

    @property
    def definition(self) -> str:
        """Operational coding definition for this category."""
        return _DEFINITIONS[self]

    @classmethod
    def from_string(cls, name: str) -> "KCLabel":
        """Parse a label name case-insensitively ("share", "Share", "SHARE")."""
        try:
            return _NAME_TO_LABEL[name.strip().lower()]
        except KeyError:
            raise ValidationError(f"unknown label {name!r}; expected one of "
                                  f"{[l.display_name for l in cls]}") from None


_DISPLAY_NAMES = {
    KCLabel.NONKC: "nonKC",
    KCLabel.SHARE: "Share",
    KCLabel.EXPLORE: "Explore",
    KCLabel.NEGOTIATE: "Negotiate",
}

_DEFINITIONS = {
    KCLabel.NONKC: (
        "Social or affective comment (a positive or negative reaction) with "
        "little focus on the video's content; captures sentiment rather than "
        "knowledge building."
    ),
    KCLabel.SHARE: (
        "Asks clarifying questions, seeks information, or offers simple "
        "statements of personal experience, fact, or opinion related to the "
        "video content."
    ),
    KCLabel.EXPLORE: (
        "States agreement or disagreement (including bare 'I agree' / "
        "'disagree') and asks questions that probe the extent of the "
        "disagreement."
    ),
    KCLabel.NEGOTIATE: (
        "Clarifies concepts and negotiates areas of disagreement to integrate "
        "ideas, with more extensive evidence and explanation; includes testing "
        "proposed syntheses against other contexts and applying or summarising "
        "newly built knowledge."
    ),
}

_NAME_TO_LABEL = {v.lower(): k for k, v in _DISPLAY_NAMES.items()}

NUM_CLASSES = len(KCLabel)


class SourceKind(Enum):
    SHORT_VIDEO = "short_video"
    LONG_VIDEO = "long_video"
    UNKNOWN = "unknown"

    @classmethod
    def from_string(cls, name: str) -> "SourceKind":
        try:
            return cls(name.strip().lower())
        except ValueError:
            raise ValidationError(
                f"unknown source {name!r}; expected one of "
                f"{[s.value for s in cls]}") from None


@dataclass(frozen=True)
class LabeledExample:
    id: str
    raw_text: str
    normalized_text: str
    label: KCLabel
    source: SourceKind = SourceKind.UNKNOWN


@dataclass(frozen=True)
class Dataset:
    """An ordered, id-unique collection of labeled examples."""

    examples: tuple[LabeledExample, ...]
    class_counts: dict[KCLabel, int]

    def __len__(self) -> int:
        return len(self.examples)

    @classmethod
    def from_examples(cls, examples: list[LabeledExample] | tuple[LabeledExample, ...]) -> "Dataset":
        examples = tuple(examples)
        seen: set[str] = set()
        for i, ex in enumerate(examples):
            if ex.id in seen:
                raise ValidationError(f"record {i}: duplicate id {ex.id!r}")
            seen.add(ex.id)
        counts = Counter(ex.label for ex in examples)
        return cls(examples=examples,
                   class_counts={lab: counts.get(lab, 0) for lab in KCLabel})


# --- text normalization ------------------------------------------------------

# Removal classes, applied in this order after lowercasing so the result is a
# fixed point of the full chain: emoji first (so a removed emoji cannot splice
# the pieces of a URL back together), then URLs, then @-mentions. Matches are
# replaced with a space, never the empty string, so removal cannot join two
# fragments into a new token.
_EMOJI_RE = re.compile(
    "["
    "\U0001F600-\U0001F64F"   # emoticons
    "\U0001F300-\U0001F5FF"   # misc symbols & pictographs
    "\U0001F680-\U0001F6FF"   # transport & map
    "\U0001F900-\U0001F9FF"   # supplemental symbols & pictographs
    "✀-➿"           # dingbats
    "︀-️"           # variation selectors
    "‍"                  # zero-width joiner
    "]+"
)
_URL_RE = re.compile(r"(?:[a-z][a-z0-9+.\-]*://\S+|\bwww\.\S+)")
_MENTION_RE = re.compile(r"@\w+")
_WS_RE = re.compile(r"\s+")


def normalize_text(raw: str) -> str:
    """Lowercase, strip URLs / @-mentions / emoji, and collapse whitespace.

    Total function: any input (including empty) yields a valid, possibly
    empty, output. ASCII punctuation is preserved. Idempotent.
    """
    text = raw.lower()
    text = _EMOJI_RE.sub(" ", text)
    text = _URL_RE.sub(" ", text)
    text = _MENTION_RE.sub(" ", text)
    return _WS_RE.sub(" ", text).strip()


# --- ingestion ----------------------------------------------------------------

def _iter_records(path: Path, format: str):
    if format == "jsonl":
        with path.open("r", encoding="utf-8") as fh:
            idx = 0
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                try:
                    rec = json.loads(line)
                except json.JSONDecodeError as e:
                    raise ValidationError(f"record {idx}: invalid JSON: {e.msg}") from e
                if not isinstance(rec, dict):
                    raise ValidationError(f"record {idx}: expected a JSON object")
                yield idx, rec
                idx += 1
    elif format == "csv":
        with path.open("r", encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            for idx, rec in enumerate(reader):
                yield idx, rec
    else:
        raise ValidationError(f"unknown format {format!r}; expected 'csv' or 'jsonl'")


def ingest(path: str | Path, format: str = "jsonl") -> Dataset:
    """Load a labeled comment file into a Dataset, preserving input order.

    Each record needs ``text`` and ``label`` (label names case-insensitive);
    ``id`` defaults to ``row-<index>`` and ``source`` to ``unknown``.
    ``normalized_text`` is populated via :func:`normalize_text`.
    """
    path = Path(path)
    examples: list[LabeledExample] = []
    for idx, rec in _iter_records(path, format):
        text = rec.get("text")
        label = rec.get("label")
        if text is None or label is None:
            raise ValidationError(f"record {idx}: missing required field 'text' or 'label'")
        rec_id = rec.get("id") or f"row-{idx}"
        source = rec.get("source")
        try:
            parsed_label = KCLabel.from_string(str(label))
            parsed_source = (SourceKind.from_string(str(source))
                             if source else SourceKind.UNKNOWN)
        except ValidationError as e:
            raise ValidationError(f"record {idx}: {e}") from None
        examples.append(LabeledExample(
            id=str(rec_id),
            raw_text=str(text),
            normalized_text=normalize_text(str(text)),
            label=parsed_label,
            source=parsed_source,
        ))
    return Dataset.from_examples(examples)


def write_jsonl(data: Dataset, path: str | Path) -> None:
    """Write a dataset back out in the canonical JSONL schema."""
    with Path(path).open("w", encoding="utf-8") as fh:
        for ex in data.examples:
            fh.write(json.dumps({
                "id": ex.id,
                "text": ex.raw_text,
                "label": ex.label.display_name,
                "source": ex.source.value,
            }, ensure_ascii=False) + "\n")


# --- stratified fold planning --------------------------------------------------

@dataclass(frozen=True)
class FoldPlan:
    """Deterministic stratified assignment of example ids to folds."""

    n_folds: int
    seed: int
    assignment: dict[str, int]

    def fold_ids(self, fold_idx: int) -> list[str]:
        return [i for i, f in self.assignment.items() if f == fold_idx]

    def to_json(self) -> str:
        return json.dumps({"n_folds": self.n_folds, "seed": self.seed,
                           "assignment": self.assignment}, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "FoldPlan":
        obj = json.loads(text)
        return cls(n_folds=int(obj["n_folds"]), seed=int(obj["seed"]),
                   assignment={str(k): int(v) for k, v in obj["assignment"].items()})


def stratified_kfold(data: Dataset, n_folds: int, seed: int) -> FoldPlan:
    """Assign every example to one of ``n_folds`` folds, stratified by label.

    Construction: shuffle ids within each class with a seeded generator
    (classes processed in fixed label order), then deal each class round-robin
    into folds. Per fold and class, counts differ from n_c/n_folds by at most
    one. Deterministic given (data order, n_folds, seed).
    """
    if n_folds < 2:
        raise ValidationError(f"n_folds must be >= 2, got {n_folds}")
    for lab in KCLabel:
        n_c = data.class_counts.get(lab, 0)
        if 0 < n_c < n_folds:
            raise ValidationError(
                f"class {lab.display_name} has {n_c} members, fewer than "
                f"n_folds={n_folds}")
    rng = np.random.default_rng(seed)
    assignment: dict[str, int] = {}
    for lab in KCLabel:
        ids = [ex.id for ex in data.examples if ex.label == lab]
        order = rng.permutation(len(ids))
        for pos, j in enumerate(order):
            assignment[ids[j]] = pos % n_folds
    # report in dataset order for stable serialization
    return FoldPlan(n_folds=n_folds, seed=seed,
                    assignment={ex.id: assignment[ex.id] for ex in data.examples})


# --- inter-coder agreement ------------------------------------------------------

def cohens_kappa(labels_a, labels_b) -> float:
    """Chance-corrected agreement between two label sequences.

    kappa = (p_o - p_e) / (1 - p_e) with observed agreement p_o and chance
    agreement p_e from the marginal products. Returns exactly 1.0 in the
    degenerate case p_e == 1 (both coders constant on the same label).
    """
    if len(labels_a) != len(labels_b):
        raise ValidationError(
            f"label lists differ in length: {len(labels_a)} vs {len(labels_b)}")
    n = len(labels_a)
    if n == 0:
        raise ValidationError("empty label lists")
    a = [int(x) for x in labels_a]
    b = [int(x) for x in labels_b]
    p_o = sum(1 for x, y in zip(a, b) if x == y) / n
    count_a = Counter(a)
    count_b = Counter(b)
    p_e = sum(count_a[c] * count_b.get(c, 0) for c in count_a) / (n * n)
    if p_e == 1.0:
        return 1.0
    return (p_o - p_e) / (1.0 - p_e)
