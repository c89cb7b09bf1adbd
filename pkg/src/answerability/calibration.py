"""Threshold selection on the validation partition.

Sweeps a fixed grid of thresholds over aggregated validation scores and
picks the one maximizing classification accuracy, breaking ties toward
the smallest threshold so reruns are bit-identical.
"""

from __future__ import annotations

from dataclasses import dataclass

from .aggregation import aggregate, group_scores
from .types import AGGREGATION_FNS


@dataclass(frozen=True)
class CalibrationResult:
    level: str
    fn: str
    step: float
    chosen_threshold: float
    accuracy: float
    curve: tuple[tuple[float, float], ...]

    def to_obj(self) -> dict:
        return {
            "level": self.level,
            "fn": self.fn,
            "step": self.step,
            "chosen_threshold": self.chosen_threshold,
            "accuracy": self.accuracy,
            "curve": [{"threshold": t, "accuracy": a} for t, a in self.curve],
        }


def threshold_grid(step: float) -> list[float]:
    """Multiples of step in [0, 1], always including both endpoints."""
    if not 0.0 < step <= 0.5:
        raise ValueError(f"grid step must be in (0, 0.5], got {step}")
    grid = []
    k = 0
    while True:
        t = round(k * step, 10)
        if t > 1.0:
            break
        grid.append(t)
        k += 1
    if grid[-1] != 1.0:
        grid.append(1.0)
    return grid


def sweep_thresholds(scores, labels, step: float = 0.05) -> tuple[float, float, list]:
    """Accuracy of (score >= t) against labels at every grid point.

    Returns (chosen threshold, its accuracy, full curve); the chosen
    threshold is the smallest grid point attaining maximum accuracy.
    """
    scores = list(scores)
    labels = list(labels)
    if not scores:
        raise ValueError("empty validation set")
    if len(scores) != len(labels):
        raise ValueError(f"{len(scores)} scores vs {len(labels)} labels")
    curve = []
    for t in threshold_grid(step):
        correct = sum(1 for s, y in zip(scores, labels) if int(s >= t) == y)
        curve.append((t, correct / len(scores)))
    best_t, best_acc = max(curve, key=lambda ta: (ta[1], -ta[0]))
    return best_t, best_acc, curve


def passage_level_scores(score_records, passage_instances, fn: str):
    """Aggregate sentence scores per passage instance."""
    grouped = group_scores(score_records)
    scores, labels = [], []
    for x in passage_instances:
        scores.append(aggregate(grouped[x.identity], fn))
        labels.append(x.label)
    return scores, labels


def ranking_level_scores(score_records, rankings, passage_fn: str, ranking_fn: str):
    """Aggregate sentence scores to passage scores, then per ranking."""
    grouped = group_scores(score_records)
    passage_score = {
        key: aggregate(probs, passage_fn) for key, probs in grouped.items()
    }
    scores, labels = [], []
    for r in rankings:
        member = [passage_score[(r.question_id, pid)] for pid in r.passage_ids]
        scores.append(aggregate(member, ranking_fn))
        labels.append(r.label)
    return scores, labels


def calibrate(
    score_records,
    instances,
    fn: str,
    level: str,
    step: float = 0.05,
    passage_fn: str | None = None,
) -> CalibrationResult:
    """Select the threshold for one (level, fn) pair.

    At ranking level, ``passage_fn`` controls how sentence scores are
    collapsed to the passage scores the ranking stage consumes; it
    defaults to ``fn``.
    """
    if fn not in AGGREGATION_FNS:
        raise ValueError(f"unknown aggregation function {fn!r}")
    if level == "passage":
        scores, labels = passage_level_scores(score_records, instances, fn)
    elif level == "ranking":
        scores, labels = ranking_level_scores(
            score_records, instances, passage_fn or fn, fn
        )
    else:
        raise ValueError(f"unknown calibration level {level!r}")
    chosen, accuracy, curve = sweep_thresholds(scores, labels, step)
    return CalibrationResult(
        level=level,
        fn=fn,
        step=step,
        chosen_threshold=chosen,
        accuracy=accuracy,
        curve=tuple(curve),
    )
