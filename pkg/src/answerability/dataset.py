"""Three-level labeled dataset construction from nugget-annotated passages.

Sentences are labeled 1 when they overlap an information nugget in at
least one character, passages by OR over their sentences, and ranking
instances (all n-element passage subsets per question) by OR over their
member passages. Splitting is done at the question level.
"""

from __future__ import annotations

import itertools
import json
import math
import random
import re
from dataclasses import dataclass, replace
from pathlib import Path

from . import interchange
from .interchange import PassageInstance, SentenceInstance
from .types import (
    DEFAULT_RANKING_SIZE,
    Dataset,
    Passage,
    Question,
    RankingInstance,
    Sentence,
    ValidationError,
    validate_dataset,
)

# Tokens (lowercased, trailing period stripped) that end with a period
# without ending a sentence.
ABBREVIATIONS = frozenset({
    "dr", "mr", "mrs", "ms", "prof", "st", "jr", "sr", "rev", "gen",
    "vs", "etc", "e.g", "i.e", "cf", "al", "ca", "approx",
    "fig", "no", "vol", "pp", "ed", "dept", "inc", "ltd", "co", "corp",
    "jan", "feb", "mar", "apr", "jun", "jul", "aug", "sep", "sept",
    "oct", "nov", "dec", "u.s", "u.k",
})

# A boundary is a run of terminal punctuation followed by whitespace and
# an uppercase letter; the whitespace belongs to the next sentence.
_BOUNDARY = re.compile(r"[.!?]+(?=\s+[A-Z])")


def _is_abbreviation(text: str, punct_start: int) -> bool:
    word_start = punct_start
    while word_start > 0 and not text[word_start - 1].isspace():
        word_start -= 1
    token = text[word_start:punct_start].lstrip("\"'([{")
    return token.lower() in ABBREVIATIONS


def segment_passage(text: str) -> list[tuple[int, int]]:
    """Split passage text into ordered sentence spans that partition it.

    Rule-based: a sentence ends at terminal punctuation (., !, ?)
    followed by whitespace and a capital letter, except after known
    abbreviations and single-letter initials. Text without terminal
    punctuation stays one span.
    """
    if not text or not text.strip():
        raise ValueError("cannot segment empty text")
    boundaries = [0]
    for m in _BOUNDARY.finditer(text):
        if m.group(0) == "." and _is_abbreviation(text, m.start()):
            continue
        boundaries.append(m.end())
    boundaries.append(len(text))
    return [(a, b) for a, b in zip(boundaries, boundaries[1:])]


def segment_dataset(dataset: Dataset) -> Dataset:
    """Fill in sentence spans for passages that arrive without them."""
    passages = []
    for p in dataset.passages:
        if p.sentences:
            passages.append(p)
        else:
            spans = segment_passage(p.text)
            sentences = tuple(Sentence(i, span) for i, span in enumerate(spans))
            passages.append(replace(p, sentences=sentences))
    return Dataset(dataset.questions, passages, dataset.nuggets, dataset.rankings)


def overlaps(a: tuple[int, int], b: tuple[int, int]) -> bool:
    """Half-open intervals share at least one character position."""
    return max(a[0], b[0]) < min(a[1], b[1])


def label_sentence(span: tuple[int, int], nugget_spans) -> int:
    """1 iff the sentence interval intersects any nugget interval."""
    return int(any(overlaps(span, g) for g in nugget_spans))


def label_passage(sentence_labels) -> int:
    """OR over the sentence labels of one passage."""
    labels = list(sentence_labels)
    if not labels:
        raise ValueError("passage has no sentence labels")
    return int(any(labels))


def label_dataset(dataset: Dataset) -> Dataset:
    """Attach sentence labels derived from nugget overlap."""
    by_passage = dataset.nuggets_by_passage()
    passages = []
    for p in dataset.passages:
        spans = [g.span for g in by_passage.get((p.question_id, p.id), [])]
        sentences = tuple(
            replace(s, label=label_sentence(s.span, spans)) for s in p.sentences
        )
        passages.append(replace(p, sentences=sentences))
    return Dataset(dataset.questions, passages, dataset.nuggets, dataset.rankings)


def generate_rankings(
    question_id: str,
    passages: list[Passage],
    n: int = DEFAULT_RANKING_SIZE,
) -> list[RankingInstance]:
    """All C(m, n) passage subsets of one question, labeled by OR.

    Passage ids within an instance are ascending and the returned list
    is in lexicographic subset order.
    """
    if len(passages) < n:
        raise ValueError(
            f"question {question_id}: {len(passages)} passages, need at least {n}"
        )
    labels = {p.id: label_passage(p.sentence_labels()) for p in passages}
    ordered = sorted(labels)
    return [
        RankingInstance(question_id, subset, int(any(labels[pid] for pid in subset)))
        for subset in itertools.combinations(ordered, n)
    ]


@dataclass(frozen=True)
class SplitSpec:
    """Question-level split fractions and the shuffle seed."""

    train_fraction: float = 0.9
    validation_fraction_of_train: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError(f"train_fraction must be in (0, 1), got {self.train_fraction}")
        if not 0.0 <= self.validation_fraction_of_train < 1.0:
            raise ValueError(
                "validation_fraction_of_train must be in [0, 1), "
                f"got {self.validation_fraction_of_train}"
            )


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def split_questions(question_ids, spec: SplitSpec) -> dict[str, str]:
    """Assign each question to train, validation, or test.

    Deterministic for identical (ids, seed): ids are sorted before the
    seeded shuffle, so input order does not matter. Fractions are
    honored to the nearest integer; validation is carved out of the
    train portion.
    """
    ids = sorted(question_ids)
    if len(ids) != len(set(ids)):
        raise ValueError("duplicate question ids")
    if len(ids) < 3:
        raise ValueError(f"need at least 3 questions to split, got {len(ids)}")
    rng = random.Random(spec.seed)
    rng.shuffle(ids)
    n_trainval = _round_half_up(spec.train_fraction * len(ids))
    n_validation = _round_half_up(spec.validation_fraction_of_train * n_trainval)
    assignment = {}
    for i, qid in enumerate(ids):
        if i < n_trainval - n_validation:
            assignment[qid] = "train"
        elif i < n_trainval:
            assignment[qid] = "validation"
        else:
            assignment[qid] = "test"
    return assignment


@dataclass
class BuiltDataset:
    """Everything build() produces, prior to serialization."""

    dataset: Dataset
    sentence_instances: dict[str, list[SentenceInstance]]
    passage_instances: dict[str, list[PassageInstance]]
    ranking_instances: dict[str, list[RankingInstance]]
    stats: dict


def _pair_counts(labels) -> dict:
    answerable = sum(1 for x in labels if x == 1)
    return {"answerable": answerable, "unanswerable": len(labels) - answerable}


def build_dataset(
    dataset: Dataset,
    spec: SplitSpec | None = None,
    n: int = DEFAULT_RANKING_SIZE,
) -> BuiltDataset:
    """Segment, validate, label, split, and generate ranking instances.

    Questions that all arrive with explicit partitions keep them (the
    stats record the split as preassigned); otherwise partitions are
    assigned from ``spec``. Ranking instances are generated for
    validation and test questions only; the train portion has none.
    """
    spec = spec or SplitSpec()
    dataset = segment_dataset(dataset)
    violations = validate_dataset(Dataset(
        dataset.questions, dataset.passages, dataset.nuggets, []
    ))
    if violations:
        raise ValidationError(violations)
    dataset = label_dataset(dataset)

    preassigned = bool(dataset.questions) and all(
        q.partition != "unassigned" for q in dataset.questions
    )
    if preassigned:
        assignment = {q.id: q.partition for q in dataset.questions}
    else:
        assignment = split_questions([q.id for q in dataset.questions], spec)
    questions = sorted(
        (replace(q, partition=assignment[q.id]) for q in dataset.questions),
        key=lambda q: q.id,
    )

    by_question = dataset.passages_by_question()
    sentence_instances = {p: [] for p in ("train", "validation", "test")}
    passage_instances = {p: [] for p in ("train", "validation", "test")}
    ranking_instances = {p: [] for p in ("validation", "test")}
    per_question = {}

    for q in questions:
        partition = q.partition
        passages = sorted(by_question.get(q.id, []), key=lambda p: p.id)
        q_sentences = []
        q_passages = []
        for p in passages:
            for s in p.sentences:
                q_sentences.append(SentenceInstance(
                    question_id=q.id,
                    passage_id=p.id,
                    sentence_index=s.index,
                    question=q.text,
                    sentence=p.sentence_text(s.index),
                    label=s.label,
                ))
            q_passages.append(PassageInstance(
                question_id=q.id,
                passage_id=p.id,
                question=q.text,
                passage=p.text,
                label=label_passage(p.sentence_labels()),
            ))
        sentence_instances[partition].extend(q_sentences)
        passage_instances[partition].extend(q_passages)
        if partition in ranking_instances and passages:
            ranking_instances[partition].extend(
                generate_rankings(q.id, passages, n)
            )
        per_question[q.id] = {
            "partition": partition,
            "sentence_pairs": _pair_counts([s.label for s in q_sentences]),
            "passage_pairs": _pair_counts([p.label for p in q_passages]),
        }

    stats = {
        "n": n,
        "split": {
            "source": "preassigned" if preassigned else "seeded",
            "seed": None if preassigned else spec.seed,
            "train_fraction": None if preassigned else spec.train_fraction,
            "validation_fraction_of_train": (
                None if preassigned else spec.validation_fraction_of_train
            ),
        },
        "questions": {
            part: sum(1 for q in questions if q.partition == part)
            for part in ("train", "validation", "test")
        },
        "sentence_pairs": {
            **{part: _pair_counts([i.label for i in sentence_instances[part]])
               for part in ("train", "validation", "test")},
            "total": _pair_counts(
                [i.label for part in sentence_instances.values() for i in part]
            ),
        },
        "passage_pairs": {
            **{part: _pair_counts([i.label for i in passage_instances[part]])
               for part in ("train", "validation", "test")},
            "total": _pair_counts(
                [i.label for part in passage_instances.values() for i in part]
            ),
        },
        "ranking_pairs": {
            part: _pair_counts([r.label for r in ranking_instances[part]])
            for part in ("validation", "test")
        },
        "per_question": per_question,
    }

    labeled = Dataset(
        questions,
        sorted(
            (p for ps in by_question.values() for p in ps),
            key=lambda p: (p.question_id, p.id),
        ),
        dataset.nuggets,
        list(ranking_instances["test"]),
    )
    return BuiltDataset(
        dataset=labeled,
        sentence_instances=sentence_instances,
        passage_instances=passage_instances,
        ranking_instances=ranking_instances,
        stats=stats,
    )


def write_built(built: BuiltDataset, output_dir) -> list[Path]:
    """Write per-partition instance files plus stats.json.

    Emits sentences.{train,validation,test}.jsonl and
    passages.{train,validation,test}.jsonl, rankings.test.jsonl, and
    rankings.validation.jsonl when validation rankings exist (the
    calibration stage consumes those).
    """
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for part in ("train", "validation", "test"):
        path = output_dir / f"sentences.{part}.jsonl"
        interchange.write_jsonl(path, (
            interchange.sentence_instance_to_obj(x)
            for x in built.sentence_instances[part]
        ))
        written.append(path)
        path = output_dir / f"passages.{part}.jsonl"
        interchange.write_jsonl(path, (
            interchange.passage_instance_to_obj(x)
            for x in built.passage_instances[part]
        ))
        written.append(path)
    path = output_dir / "rankings.test.jsonl"
    interchange.write_jsonl(path, (
        interchange.ranking_to_obj(r) for r in built.ranking_instances["test"]
    ))
    written.append(path)
    if built.ranking_instances["validation"]:
        path = output_dir / "rankings.validation.jsonl"
        interchange.write_jsonl(path, (
            interchange.ranking_to_obj(r)
            for r in built.ranking_instances["validation"]
        ))
        written.append(path)
    path = output_dir / "stats.json"
    with open(path, "w", encoding="utf-8") as f:
        json.dump(built.stats, f, ensure_ascii=False, indent=2)
        f.write("\n")
    written.append(path)
    return written


def build(input_path, output_dir, spec: SplitSpec | None = None,
          n: int = DEFAULT_RANKING_SIZE) -> BuiltDataset:
    """Load a corpus, build the three-level dataset, write all outputs."""
    dataset = interchange.load_corpus(input_path)
    built = build_dataset(dataset, spec, n)
    write_built(built, output_dir)
    return built
