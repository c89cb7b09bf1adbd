"""Training data: sentence-level instance files and SQuAD 2.0 pairs.

The instance file format is the pipeline's sentence-level JSONL
(question_id, passage_id, sentence_index, question, sentence, label).
SQuAD 2.0 provides extra (question, sentence) pairs: a context sentence
is labeled 1 when a gold answer span falls inside it, unanswerable
questions contribute label-0 pairs, and the result is downsampled to an
exactly equal number of positive and negative pairs.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path

from .text import split_sentences


@dataclass(frozen=True)
class Pair:
    question: str
    sentence: str
    label: int
    source: str  # "cast" | "squad2"


def load_instance_pairs(path) -> list[Pair]:
    pairs = []
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            try:
                pairs.append(Pair(
                    question=obj["question"],
                    sentence=obj["sentence"],
                    label=int(obj["label"]),
                    source="cast",
                ))
            except KeyError as e:
                raise ValueError(f"{path}:{lineno}: missing field {e.args[0]!r}") from e
    return pairs


def _spans_overlap(a, b):
    return max(a[0], b[0]) < min(a[1], b[1])


def squad2_pairs(path) -> list[Pair]:
    """All (question, sentence) pairs derivable from a SQuAD 2.0 file."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"SQuAD 2.0 file not found: {path}")
    with open(path, "r", encoding="utf-8") as f:
        payload = json.load(f)
    pairs = []
    for article in payload.get("data", []):
        for paragraph in article.get("paragraphs", []):
            context = paragraph["context"]
            sentence_spans = split_sentences(context)
            for qa in paragraph.get("qas", []):
                question = qa["question"]
                if qa.get("is_impossible"):
                    answer_spans = []
                else:
                    answer_spans = [
                        (a["answer_start"], a["answer_start"] + len(a["text"]))
                        for a in qa.get("answers", [])
                    ]
                for span in sentence_spans:
                    label = int(any(_spans_overlap(span, a) for a in answer_spans))
                    pairs.append(Pair(
                        question=question,
                        sentence=context[span[0]:span[1]].strip(),
                        label=label,
                        source="squad2",
                    ))
    return pairs


def balance_pairs(pairs: list[Pair], seed: int) -> list[Pair]:
    """Downsample the majority label to an exact 50/50 split, seeded."""
    positives = [p for p in pairs if p.label == 1]
    negatives = [p for p in pairs if p.label == 0]
    rng = random.Random(seed)
    keep = min(len(positives), len(negatives))
    sampled_pos = rng.sample(positives, keep)
    sampled_neg = rng.sample(negatives, keep)
    merged = sampled_pos + sampled_neg
    rng.shuffle(merged)
    return merged


def write_pairs(path, pairs: list[Pair]):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        for p in pairs:
            f.write(json.dumps(
                {"question": p.question, "sentence": p.sentence,
                 "label": p.label, "source": p.source},
                ensure_ascii=False,
            ))
            f.write("\n")


def read_pairs(path) -> list[Pair]:
    pairs = []
    with open(path, "r", encoding="utf-8") as f:
        for line in f:
            if line.strip():
                obj = json.loads(line)
                pairs.append(Pair(obj["question"], obj["sentence"],
                                  int(obj["label"]), obj.get("source", "cast")))
    return pairs
