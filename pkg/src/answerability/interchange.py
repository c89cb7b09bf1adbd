"""JSONL readers and writers for every file format the pipeline touches.

Corpus files hold one JSON object per line, UTF-8, discriminated by a
``kind`` field: question, passage (embedding sentence spans), nugget,
ranking. Serialization is canonical (fixed key order, compact separators)
so that load -> save round-trips are byte-identical.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Iterator

from .types import (
    Dataset,
    DatasetLoadError,
    Nugget,
    Passage,
    Question,
    RankingInstance,
    ScoreRecord,
    Sentence,
)


def dumps(obj: dict) -> str:
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":"))


def write_jsonl(path, objs: Iterable[dict]):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        for obj in objs:
            f.write(dumps(obj))
            f.write("\n")


def append_jsonl(path, objs: Iterable[dict]):
    with open(path, "a", encoding="utf-8") as f:
        for obj in objs:
            f.write(dumps(obj))
            f.write("\n")


def read_jsonl(path) -> Iterator[dict]:
    path = Path(path)
    try:
        f = open(path, "r", encoding="utf-8")
    except OSError as e:
        raise DatasetLoadError(f"cannot open {path}: {e}") from e
    with f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as e:
                raise DatasetLoadError(f"{path}:{lineno}: invalid JSON: {e}") from e
            if not isinstance(obj, dict):
                raise DatasetLoadError(f"{path}:{lineno}: expected a JSON object")
            yield obj


def _require(obj: dict, field: str, context: str) -> Any:
    if field not in obj:
        raise DatasetLoadError(f"{context}: missing field {field!r}")
    return obj[field]


def _span(value, context: str) -> tuple[int, int]:
    if (
        not isinstance(value, (list, tuple))
        or len(value) != 2
        or not all(isinstance(v, int) for v in value)
    ):
        raise DatasetLoadError(f"{context}: span must be a pair of integers, got {value!r}")
    return (value[0], value[1])


# --- corpus records -------------------------------------------------------

def question_to_obj(q: Question) -> dict:
    return {"kind": "question", "id": q.id, "text": q.text, "partition": q.partition}


def passage_to_obj(p: Passage) -> dict:
    return {
        "kind": "passage",
        "id": p.id,
        "question_id": p.question_id,
        "text": p.text,
        "relevant": p.relevant,
        "sentences": [
            {"index": s.index, "span": [s.span[0], s.span[1]], "label": s.label}
            for s in p.sentences
        ],
    }


def nugget_to_obj(g: Nugget) -> dict:
    return {
        "kind": "nugget",
        "question_id": g.question_id,
        "passage_id": g.passage_id,
        "span": [g.span[0], g.span[1]],
    }


def ranking_to_obj(r: RankingInstance) -> dict:
    return {
        "kind": "ranking",
        "question_id": r.question_id,
        "passage_ids": list(r.passage_ids),
        "label": r.label,
    }


def obj_to_question(obj: dict, context: str) -> Question:
    return Question(
        id=str(_require(obj, "id", context)),
        text=str(_require(obj, "text", context)),
        partition=str(obj.get("partition", "unassigned")),
    )


def obj_to_passage(obj: dict, context: str) -> Passage:
    sentences = []
    for s in obj.get("sentences") or []:
        sentences.append(Sentence(
            index=int(_require(s, "index", context)),
            span=_span(_require(s, "span", context), context),
            label=s.get("label"),
        ))
    return Passage(
        id=str(_require(obj, "id", context)),
        question_id=str(_require(obj, "question_id", context)),
        text=str(_require(obj, "text", context)),
        relevant=bool(_require(obj, "relevant", context)),
        sentences=tuple(sentences),
    )


def obj_to_nugget(obj: dict, context: str) -> Nugget:
    return Nugget(
        question_id=str(_require(obj, "question_id", context)),
        passage_id=str(_require(obj, "passage_id", context)),
        span=_span(_require(obj, "span", context), context),
    )


def obj_to_ranking(obj: dict, context: str) -> RankingInstance:
    pids = _require(obj, "passage_ids", context)
    if not isinstance(pids, list):
        raise DatasetLoadError(f"{context}: passage_ids must be a list")
    return RankingInstance(
        question_id=str(_require(obj, "question_id", context)),
        passage_ids=tuple(str(p) for p in pids),
        label=_require(obj, "label", context),
    )


def load_corpus(path) -> Dataset:
    """Load a corpus file, or every ``*.jsonl`` file inside a directory."""
    path = Path(path)
    if path.is_dir():
        files = sorted(path.glob("*.jsonl"))
        if not files:
            raise DatasetLoadError(f"no .jsonl files in directory {path}")
    else:
        files = [path]
    dataset = Dataset()
    for f in files:
        for i, obj in enumerate(read_jsonl(f), start=1):
            context = f"{f}:{i}"
            kind = _require(obj, "kind", context)
            if kind == "question":
                dataset.questions.append(obj_to_question(obj, context))
            elif kind == "passage":
                dataset.passages.append(obj_to_passage(obj, context))
            elif kind == "nugget":
                dataset.nuggets.append(obj_to_nugget(obj, context))
            elif kind == "ranking":
                dataset.rankings.append(obj_to_ranking(obj, context))
            else:
                raise DatasetLoadError(f"{context}: unknown record kind {kind!r}")
    return dataset


def save_corpus(dataset: Dataset, path):
    def records():
        for q in dataset.questions:
            yield question_to_obj(q)
        for p in dataset.passages:
            yield passage_to_obj(p)
        for g in dataset.nuggets:
            yield nugget_to_obj(g)
        for r in dataset.rankings:
            yield ranking_to_obj(r)
    write_jsonl(path, records())


# --- labeled instance records --------------------------------------------

@dataclass(frozen=True)
class SentenceInstance:
    """One question-sentence pair with its ground-truth label."""

    question_id: str
    passage_id: str
    sentence_index: int
    question: str
    sentence: str
    label: int

    @property
    def identity(self) -> tuple[str, str, int]:
        return (self.question_id, self.passage_id, self.sentence_index)


@dataclass(frozen=True)
class PassageInstance:
    """One question-passage pair with its ground-truth label."""

    question_id: str
    passage_id: str
    question: str
    passage: str
    label: int

    @property
    def identity(self) -> tuple[str, str]:
        return (self.question_id, self.passage_id)


def sentence_instance_to_obj(x: SentenceInstance) -> dict:
    return {
        "question_id": x.question_id,
        "passage_id": x.passage_id,
        "sentence_index": x.sentence_index,
        "question": x.question,
        "sentence": x.sentence,
        "label": x.label,
    }


def obj_to_sentence_instance(obj: dict, context: str) -> SentenceInstance:
    return SentenceInstance(
        question_id=str(_require(obj, "question_id", context)),
        passage_id=str(_require(obj, "passage_id", context)),
        sentence_index=int(_require(obj, "sentence_index", context)),
        question=str(_require(obj, "question", context)),
        sentence=str(_require(obj, "sentence", context)),
        label=int(_require(obj, "label", context)),
    )


def passage_instance_to_obj(x: PassageInstance) -> dict:
    return {
        "question_id": x.question_id,
        "passage_id": x.passage_id,
        "question": x.question,
        "passage": x.passage,
        "label": x.label,
    }


def obj_to_passage_instance(obj: dict, context: str) -> PassageInstance:
    return PassageInstance(
        question_id=str(_require(obj, "question_id", context)),
        passage_id=str(_require(obj, "passage_id", context)),
        question=str(_require(obj, "question", context)),
        passage=str(_require(obj, "passage", context)),
        label=int(_require(obj, "label", context)),
    )


def load_sentence_instances(path) -> list[SentenceInstance]:
    return [
        obj_to_sentence_instance(obj, f"{path}:{i}")
        for i, obj in enumerate(read_jsonl(path), start=1)
    ]


def load_passage_instances(path) -> list[PassageInstance]:
    return [
        obj_to_passage_instance(obj, f"{path}:{i}")
        for i, obj in enumerate(read_jsonl(path), start=1)
    ]


def load_rankings(path) -> list[RankingInstance]:
    return [
        obj_to_ranking(obj, f"{path}:{i}")
        for i, obj in enumerate(read_jsonl(path), start=1)
    ]


# --- score records --------------------------------------------------------

def score_record_to_obj(r: ScoreRecord) -> dict:
    return {
        "question_id": r.question_id,
        "passage_id": r.passage_id,
        "sentence_index": r.sentence_index,
        "probability": r.probability,
    }


def obj_to_score_record(obj: dict, context: str) -> ScoreRecord:
    try:
        return ScoreRecord(
            question_id=str(_require(obj, "question_id", context)),
            passage_id=str(_require(obj, "passage_id", context)),
            sentence_index=int(_require(obj, "sentence_index", context)),
            probability=float(_require(obj, "probability", context)),
        )
    except ValueError as e:
        raise DatasetLoadError(f"{context}: {e}") from e


def load_score_records(path) -> list[ScoreRecord]:
    return [
        obj_to_score_record(obj, f"{path}:{i}")
        for i, obj in enumerate(read_jsonl(path), start=1)
    ]


# --- prediction records ----------------------------------------------------

def ranking_prediction_to_obj(
    question_id: str,
    passage_ids: tuple[str, ...],
    config: str,
    ranking_score: float,
    decision: int,
    passages: list[dict],
) -> dict:
    return {
        "question_id": question_id,
        "passage_ids": list(passage_ids),
        "config": config,
        "ranking_score": ranking_score,
        "decision": decision,
        "passages": passages,
    }


def load_predictions(path) -> list[dict]:
    return list(read_jsonl(path))
