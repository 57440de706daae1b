"""Synthetic separable comment corpus for demos and end-to-end tests.

Each class gets its own small set of marker words; every document mixes a
few class markers with shared filler words, so any reasonable classifier
can separate the classes while the vocabulary still overlaps. Generation
is fully seeded.

Run directly to write a JSONL dataset:

    python -m kcpipe.demo_data demo.jsonl --docs 800 --seed 7
"""

from __future__ import annotations

import argparse

import numpy as np

from .corpus import KCLabel

_MARKERS = {
    KCLabel.NONKC: ["wow", "haha", "lol", "cool", "nice", "omg"],
    KCLabel.SHARE: ["what", "how", "fact", "saw", "heard", "question"],
    KCLabel.EXPLORE: ["agree", "disagree", "but", "wrong", "right", "doubt"],
    KCLabel.NEGOTIATE: ["because", "evidence", "therefore", "depends", "consider", "both"],
}

_FILLERS = [
    "the", "a", "video", "this", "that", "it", "is", "was", "really", "so",
    "about", "science", "one", "thing", "part", "here", "very", "much",
    "first", "other", "people", "time", "good", "point", "idea", "watch",
]

_PUNCT = [".", "!", "?"]


def make_corpus(n_docs: int = 800, seed: int = 7) -> list[dict]:
    """Balanced 4-class synthetic records ``{id, text, label, source}``."""
    rng = np.random.default_rng(seed)
    per_class = n_docs // len(KCLabel)
    records = []
    i = 0
    for label in KCLabel:
        markers = _MARKERS[label]
        for _ in range(per_class):
            n_markers = int(rng.integers(2, 5))
            n_fillers = int(rng.integers(3, 8))
            words = [markers[int(k)] for k in rng.integers(0, len(markers), n_markers)]
            words += [_FILLERS[int(k)] for k in rng.integers(0, len(_FILLERS), n_fillers)]
            order = rng.permutation(len(words))
            text = " ".join(words[int(j)] for j in order) + _PUNCT[int(rng.integers(0, 3))]
            records.append({
                "id": f"doc-{i:05d}",
                "text": text,
                "label": label.display_name,
                "source": "short_video" if i % 2 == 0 else "long_video",
            })
            i += 1
    return records


def write_jsonl(records: list[dict], path: str) -> None:
    import json
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description="write a synthetic demo corpus")
    parser.add_argument("out", help="output JSONL path")
    parser.add_argument("--docs", type=int, default=800)
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args(argv)
    records = make_corpus(n_docs=args.docs, seed=args.seed)
    write_jsonl(records, args.out)
    print(f"wrote {len(records)} records to {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
