"""Domain types shared by all pipeline stages, plus dataset validation.

All types are immutable after construction and safe to share across
threads. Character offsets index Unicode scalar values (Python string
indices), never bytes. Spans are half-open intervals [start, end).
"""

from __future__ import annotations

from dataclasses import dataclass, field

PARTITIONS = ("train", "validation", "test", "unassigned")

AGGREGATION_FNS = ("max", "mean")

# Decision thresholds tied to each aggregation function; applied with an
# inclusive >= comparison at both the passage and the ranking stage.
DEFAULT_THRESHOLDS = {"max": 0.5, "mean": 0.25}

DEFAULT_RANKING_SIZE = 3


class DatasetLoadError(Exception):
    """Input could not be parsed as the interchange format.

    Raised by loaders only; a dataset that parses but breaks invariants
    is reported through :func:`validate_dataset` instead.
    """


class ValidationError(Exception):
    """A dataset failed invariant validation."""

    def __init__(self, violations):
        self.violations = list(violations)
        lines = "\n".join(f"  - {v}" for v in self.violations[:20])
        more = "" if len(self.violations) <= 20 else f"\n  ... and {len(self.violations) - 20} more"
        super().__init__(f"{len(self.violations)} validation violation(s):\n{lines}{more}")


@dataclass(frozen=True)
class Violation:
    """One broken invariant, naming the entity it was found on."""

    entity: str
    problem: str

    def __str__(self):
        return f"{self.entity}: {self.problem}"


@dataclass(frozen=True)
class Question:
    id: str
    text: str
    partition: str = "unassigned"


@dataclass(frozen=True)
class Sentence:
    """A sentence of a passage, stored as a span into the passage text."""

    index: int
    span: tuple[int, int]
    label: int | None = None


@dataclass(frozen=True)
class Passage:
    """A passage associated with one question.

    ``relevant`` records whether the passage came from the ground-truth
    relevant pool or from the randomly sampled non-relevant pool; labels
    are derived from nugget overlap independently of this flag.
    """

    id: str
    question_id: str
    text: str
    relevant: bool
    sentences: tuple[Sentence, ...] = ()

    def sentence_text(self, index: int) -> str:
        start, end = self.sentences[index].span
        return self.text[start:end]

    def sentence_labels(self) -> list[int | None]:
        return [s.label for s in self.sentences]


@dataclass(frozen=True)
class Nugget:
    """A character span of answer content inside one passage."""

    question_id: str
    passage_id: str
    span: tuple[int, int]


@dataclass(frozen=True)
class RankingInstance:
    """A fixed-size set of passages treated as one retrieval output."""

    question_id: str
    passage_ids: tuple[str, ...]
    label: int


@dataclass(frozen=True)
class ScoreRecord:
    """Probability that one sentence contributes to the answer."""

    question_id: str
    passage_id: str
    sentence_index: int
    probability: float

    def __post_init__(self):
        if not 0.0 <= self.probability <= 1.0:
            raise ValueError(
                f"probability must be in [0, 1], got {self.probability!r} "
                f"for {self.identity}"
            )

    @property
    def identity(self) -> tuple[str, str, int]:
        return (self.question_id, self.passage_id, self.sentence_index)


@dataclass(frozen=True)
class AggregationConfig:
    """Aggregation functions and thresholds for both pipeline stages.

    Thresholds left as None resolve to the per-function defaults
    (max -> 0.5, mean -> 0.25).
    """

    passage_fn: str = "max"
    ranking_fn: str = "mean"
    passage_threshold: float | None = None
    ranking_threshold: float | None = None

    def __post_init__(self):
        for fn in (self.passage_fn, self.ranking_fn):
            if fn not in AGGREGATION_FNS:
                raise ValueError(f"unknown aggregation function {fn!r}")
        if self.passage_threshold is None:
            object.__setattr__(self, "passage_threshold", DEFAULT_THRESHOLDS[self.passage_fn])
        if self.ranking_threshold is None:
            object.__setattr__(self, "ranking_threshold", DEFAULT_THRESHOLDS[self.ranking_fn])
        for t in (self.passage_threshold, self.ranking_threshold):
            if not 0.0 <= t <= 1.0:
                raise ValueError(f"threshold must be in [0, 1], got {t!r}")

    @property
    def name(self) -> str:
        return f"{self.passage_fn}-{self.ranking_fn}"


ALL_CONFIGS = (
    AggregationConfig("max", "max"),
    AggregationConfig("max", "mean"),
    AggregationConfig("mean", "max"),
    AggregationConfig("mean", "mean"),
)


@dataclass
class Dataset:
    """A full annotated corpus: questions, passages, nuggets, rankings."""

    questions: list[Question] = field(default_factory=list)
    passages: list[Passage] = field(default_factory=list)
    nuggets: list[Nugget] = field(default_factory=list)
    rankings: list[RankingInstance] = field(default_factory=list)

    def question_by_id(self) -> dict[str, Question]:
        return {q.id: q for q in self.questions}

    def passages_by_question(self) -> dict[str, list[Passage]]:
        out: dict[str, list[Passage]] = {}
        for p in self.passages:
            out.setdefault(p.question_id, []).append(p)
        return out

    def nuggets_by_passage(self) -> dict[tuple[str, str], list[Nugget]]:
        out: dict[tuple[str, str], list[Nugget]] = {}
        for n in self.nuggets:
            out.setdefault((n.question_id, n.passage_id), []).append(n)
        return out


def _validate_passage_sentences(passage: Passage, name: str, out: list[Violation]):
    text_len = len(passage.text)
    sentences = passage.sentences
    if not sentences:
        if text_len:
            out.append(Violation(name, "has no sentence spans but non-empty text"))
        return
    for s in sentences:
        start, end = s.span
        if not (0 <= start < end <= text_len):
            out.append(Violation(
                name, f"sentence {s.index} span [{start}, {end}) outside [0, {text_len})"
            ))
            return
        if s.label not in (None, 0, 1):
            out.append(Violation(name, f"sentence {s.index} label {s.label!r} is not binary"))
    if [s.index for s in sentences] != list(range(len(sentences))):
        out.append(Violation(name, "sentence indices are not 0..k-1 in order"))
        return
    if sentences[0].span[0] != 0:
        out.append(Violation(name, "first sentence does not start at offset 0"))
    for prev, cur in zip(sentences, sentences[1:]):
        if cur.span[0] != prev.span[1]:
            out.append(Violation(
                name,
                f"gap or overlap between sentence {prev.index} and {cur.index} "
                f"({prev.span} vs {cur.span})",
            ))
    if sentences[-1].span[1] != text_len:
        out.append(Violation(
            name, f"last sentence ends at {sentences[-1].span[1]}, text length is {text_len}"
        ))


def validate_dataset(dataset: Dataset, n: int | None = None) -> list[Violation]:
    """Check every type invariant; return one violation per breakage.

    An empty list means the dataset is valid. ``n`` fixes the expected
    ranking size; when None it is inferred from the first ranking
    instance.
    """
    out: list[Violation] = []

    seen_q: set[str] = set()
    for q in dataset.questions:
        name = f"question {q.id}"
        if q.id in seen_q:
            out.append(Violation(name, "duplicate question id"))
        seen_q.add(q.id)
        if not q.text:
            out.append(Violation(name, "empty text"))
        if q.partition not in PARTITIONS:
            out.append(Violation(name, f"unknown partition {q.partition!r}"))

    passage_key: set[tuple[str, str]] = set()
    passage_by_key: dict[tuple[str, str], Passage] = {}
    for p in dataset.passages:
        name = f"passage {p.question_id}/{p.id}"
        key = (p.question_id, p.id)
        if key in passage_key:
            out.append(Violation(name, "duplicate passage id within question"))
        passage_key.add(key)
        passage_by_key[key] = p
        if p.question_id not in seen_q:
            out.append(Violation(name, f"references unknown question {p.question_id!r}"))
        _validate_passage_sentences(p, name, out)

    for g in dataset.nuggets:
        start, end = g.span
        name = f"nugget {g.question_id}/{g.passage_id}[{start}:{end})"
        passage = passage_by_key.get((g.question_id, g.passage_id))
        if passage is None:
            out.append(Violation(name, "references unknown passage"))
            continue
        if not (0 <= start < end <= len(passage.text)):
            out.append(Violation(
                name, f"span outside passage text of length {len(passage.text)}"
            ))

    expected_n = n
    for r in dataset.rankings:
        name = f"ranking {r.question_id}/{'+'.join(r.passage_ids)}"
        if expected_n is None:
            expected_n = len(r.passage_ids)
        if len(r.passage_ids) != expected_n:
            out.append(Violation(
                name, f"has {len(r.passage_ids)} passages, expected {expected_n}"
            ))
        if len(set(r.passage_ids)) != len(r.passage_ids):
            out.append(Violation(name, "duplicate passage ids"))
        for pid in r.passage_ids:
            if (r.question_id, pid) not in passage_key:
                out.append(Violation(name, f"passage {pid!r} does not belong to question"))
        if r.label not in (0, 1):
            out.append(Violation(name, f"label {r.label!r} is not binary"))

    return out
