"""Two-stage max/mean aggregation of sentence scores with fixed thresholds.

Sentence probabilities are reduced to a passage score, passage scores to
a ranking score, each by max or mean. Decisions compare the score
against the threshold with an inclusive >=, so a score exactly at the
threshold counts as answerable. The ranking stage consumes real-valued
passage scores; the binary variant exists only for external predictors
that emit hard 0/1 passage decisions.
"""

from __future__ import annotations

from dataclasses import dataclass

from .types import AggregationConfig, RankingInstance, ScoreRecord

BINARY_MODES = ("max", "t33", "t66")
_BINARY_THRESHOLDS = {"t33": 0.33, "t66": 0.66}


class MissingScoreError(Exception):
    """A referenced sentence or passage has no score record."""


def aggregate(values, fn: str) -> float:
    """Reduce a non-empty list of scores with max or mean.

    The mean is clamped into [min(values), max(values)], where the true
    arithmetic mean provably lies; this removes the 1-ulp float rounding
    cases where the computed mean would exceed the maximum.
    """
    values = list(values)
    if not values:
        raise ValueError("cannot aggregate an empty score list")
    if fn == "max":
        return max(values)
    if fn == "mean":
        mean = sum(values) / len(values)
        return min(max(mean, min(values)), max(values))
    raise ValueError(f"unknown aggregation function {fn!r}")


@dataclass(frozen=True)
class PassageResult:
    passage_id: str
    aggregated_score: float
    decision: int


@dataclass(frozen=True)
class RankingResult:
    question_id: str
    passage_results: tuple[PassageResult, ...]
    ranking_score: float
    decision: int

    @property
    def passage_ids(self) -> tuple[str, ...]:
        return tuple(p.passage_id for p in self.passage_results)


def decide_passage(passage_id: str, probabilities, config: AggregationConfig) -> PassageResult:
    score = aggregate(probabilities, config.passage_fn)
    return PassageResult(passage_id, score, int(score >= config.passage_threshold))


def decide_ranking(
    question_id: str,
    passage_results,
    config: AggregationConfig,
    n: int | None = None,
) -> RankingResult:
    """Aggregate the member passages' real-valued scores, then threshold."""
    passage_results = tuple(passage_results)
    if n is not None and len(passage_results) != n:
        raise ValueError(
            f"ranking for {question_id} has {len(passage_results)} passages, expected {n}"
        )
    score = aggregate([p.aggregated_score for p in passage_results], config.ranking_fn)
    return RankingResult(
        question_id, passage_results, score, int(score >= config.ranking_threshold)
    )


def decide_ranking_binary(predictions, mode: str) -> int:
    """Reduce hard 0/1 passage predictions to one ranking decision.

    ``max`` fires when any passage is predicted positive. ``t33`` and
    ``t66`` compare the fraction of positives against 0.33 and 0.66,
    which for n=3 means at least 1 and at least 2 positives.
    """
    predictions = list(predictions)
    if not predictions:
        raise ValueError("no passage predictions")
    if any(p not in (0, 1) for p in predictions):
        raise ValueError(f"passage predictions must be binary, got {predictions}")
    if mode == "max":
        return int(any(predictions))
    if mode in _BINARY_THRESHOLDS:
        fraction = sum(predictions) / len(predictions)
        return int(fraction >= _BINARY_THRESHOLDS[mode])
    raise ValueError(f"unknown binary aggregation mode {mode!r}")


def group_scores(score_records) -> dict[tuple[str, str], list[float]]:
    """Index score records into per-passage probability lists.

    Sentence indices of each passage must be contiguous from 0; a gap
    means a missing score record and is reported as such.
    """
    by_passage: dict[tuple[str, str], dict[int, float]] = {}
    for r in score_records:
        key = (r.question_id, r.passage_id)
        indexed = by_passage.setdefault(key, {})
        if r.sentence_index in indexed:
            raise ValueError(f"duplicate score record for {r.identity}")
        indexed[r.sentence_index] = r.probability
    out = {}
    for (qid, pid), indexed in by_passage.items():
        for i in range(len(indexed)):
            if i not in indexed:
                raise MissingScoreError(
                    f"missing score record for ({qid!r}, {pid!r}, {i})"
                )
        out[(qid, pid)] = [indexed[i] for i in range(len(indexed))]
    return out


def run_pipeline(
    score_records,
    rankings,
    config: AggregationConfig,
) -> list[RankingResult]:
    """Produce one RankingResult per instance, in instance order."""
    grouped = group_scores(score_records)
    passage_cache: dict[tuple[str, str], PassageResult] = {}

    def passage_result(qid, pid):
        key = (qid, pid)
        if key not in passage_cache:
            if key not in grouped:
                raise MissingScoreError(f"no score records for passage ({qid!r}, {pid!r})")
            passage_cache[key] = decide_passage(pid, grouped[key], config)
        return passage_cache[key]

    results = []
    for instance in rankings:
        members = tuple(
            passage_result(instance.question_id, pid) for pid in instance.passage_ids
        )
        results.append(decide_ranking(
            instance.question_id, members, config, n=len(instance.passage_ids)
        ))
    return results


def predictions_to_objs(results, config: AggregationConfig):
    """Serialize pipeline results as prediction records."""
    from . import interchange

    for r in results:
        yield interchange.ranking_prediction_to_obj(
            question_id=r.question_id,
            passage_ids=r.passage_ids,
            config=config.name,
            ranking_score=r.ranking_score,
            decision=r.decision,
            passages=[
                {
                    "passage_id": p.passage_id,
                    "score": p.aggregated_score,
                    "decision": p.decision,
                }
                for p in r.passage_results
            ],
        )


def aggregate_binary_file(passage_predictions, rankings, mode: str):
    """Map per-passage 0/1 predictions onto ranking instances.

    ``passage_predictions`` maps (question_id, passage_id) to 0/1 or
    None for instances the predictor failed on. Rankings touching an
    unpredicted passage yield an explicit unpredicted marker rather
    than a guess.
    """
    rows = []
    for instance in rankings:
        member = [
            passage_predictions.get((instance.question_id, pid))
            for pid in instance.passage_ids
        ]
        row = {
            "question_id": instance.question_id,
            "passage_ids": list(instance.passage_ids),
            "config": f"binary-{mode}",
        }
        if any(m is None for m in member):
            row["unpredicted"] = True
            row["missing"] = [
                pid for pid, m in zip(instance.passage_ids, member) if m is None
            ]
        else:
            row["decision"] = decide_ranking_binary(member, mode)
        rows.append(row)
    return rows
