import pytest
from hypothesis import given
import hypothesis.strategies as st

from answerability.calibration import (
    calibrate,
    sweep_thresholds,
    threshold_grid,
)
from answerability.interchange import PassageInstance
from answerability.types import RankingInstance, ScoreRecord


def test_grid_step_005_has_21_points():
    grid = threshold_grid(0.05)
    assert len(grid) == 21
    assert grid[0] == 0.0
    assert grid[-1] == 1.0
    assert grid[9] == 0.45


def test_grid_step_that_does_not_divide_one_still_ends_at_one():
    assert threshold_grid(0.3) == [0.0, 0.3, 0.6, 0.9, 1.0]


def test_grid_step_out_of_range_errors():
    with pytest.raises(ValueError):
        threshold_grid(0.0)
    with pytest.raises(ValueError):
        threshold_grid(0.6)


def test_oracle_scores_pick_smallest_positive_grid_point():
    # With 0/1 scores and at least one negative, every threshold in
    # (0, 1] is perfect; the tie-break selects the smallest one.
    scores = [1.0, 0.0, 1.0, 0.0]
    labels = [1, 0, 1, 0]
    chosen, accuracy, curve = sweep_thresholds(scores, labels, step=0.05)
    assert chosen == 0.05
    assert accuracy == 1.0
    assert dict(curve)[0.0] == 0.5


def test_separable_scores_derived_example():
    # Positives at 0.6, negatives at 0.4: thresholds in (0.4, 0.6]
    # are perfect, and with step 0.05 the grid's first such point is 0.45.
    scores = [0.6, 0.6, 0.4, 0.4]
    labels = [1, 1, 0, 0]
    chosen, accuracy, curve = sweep_thresholds(scores, labels, step=0.05)
    assert chosen == 0.45
    assert accuracy == 1.0
    by_threshold = dict(curve)
    for t in (0.45, 0.5, 0.55, 0.6):
        assert by_threshold[t] == 1.0
    assert by_threshold[0.4] == 0.5  # 0.4 >= 0.4 misclassifies both negatives
    assert by_threshold[0.65] == 0.5


def test_sweep_empty_errors():
    with pytest.raises(ValueError):
        sweep_thresholds([], [], step=0.05)


def test_sweep_is_deterministic():
    scores = [0.81, 0.11, 0.46, 0.52, 0.09]
    labels = [1, 0, 0, 1, 0]
    assert sweep_thresholds(scores, labels) == sweep_thresholds(scores, labels)


@given(
    st.lists(st.floats(0, 1, allow_nan=False), min_size=1, max_size=30),
    st.data(),
)
def test_chosen_threshold_attains_maximum(scores, data):
    labels = data.draw(st.lists(
        st.integers(0, 1), min_size=len(scores), max_size=len(scores)
    ))
    chosen, accuracy, curve = sweep_thresholds(scores, labels, step=0.1)
    assert any(t == chosen for t, _ in curve)
    assert all(accuracy >= a for _, a in curve)
    # smallest-threshold tie-break
    assert all(t >= chosen for t, a in curve if a == accuracy)


def test_calibrate_passage_level():
    scores = [
        ScoreRecord("q1", "p1", 0, 0.9), ScoreRecord("q1", "p1", 1, 0.2),
        ScoreRecord("q1", "p2", 0, 0.3), ScoreRecord("q1", "p2", 1, 0.1),
    ]
    instances = [
        PassageInstance("q1", "p1", "q", "text one", 1),
        PassageInstance("q1", "p2", "q", "text two", 0),
    ]
    result = calibrate(scores, instances, fn="max", level="passage", step=0.05)
    assert result.level == "passage"
    assert result.accuracy == 1.0
    # max scores are 0.9 and 0.3: first perfect grid point is 0.35.
    assert result.chosen_threshold == 0.35
    assert result.to_obj()["curve"][0] == {"threshold": 0.0, "accuracy": 0.5}


def test_calibrate_ranking_level_uses_passage_stage():
    scores = [
        ScoreRecord("q1", "p1", 0, 1.0), ScoreRecord("q1", "p1", 1, 0.0),
        ScoreRecord("q1", "p2", 0, 0.0),
        ScoreRecord("q1", "p3", 0, 0.0),
        ScoreRecord("q1", "p4", 0, 0.0),
    ]
    rankings = [
        RankingInstance("q1", ("p1", "p2", "p3"), 1),
        RankingInstance("q1", ("p2", "p3", "p4"), 0),
    ]
    # Passage maxes are (1, 0, 0, 0); ranking means are 1/3 and 0, so
    # thresholds in (0, 1/3] are perfect and the sweep picks 0.05.
    result = calibrate(scores, rankings, fn="mean", level="ranking",
                       step=0.05, passage_fn="max")
    assert result.accuracy == 1.0
    assert result.chosen_threshold == 0.05
    assert dict(result.curve)[0.2] == 1.0
    # With passage mean instead, p1 collapses to 0.5 and the positive
    # ranking drops to 1/6, visible at the 0.2 grid point.
    result = calibrate(scores, rankings, fn="mean", level="ranking", step=0.05)
    assert result.accuracy == 1.0
    assert result.chosen_threshold == 0.05
    assert dict(result.curve)[0.2] == 0.5


def test_calibrate_rejects_unknown_level_or_fn():
    with pytest.raises(ValueError):
        calibrate([], [], fn="max", level="sentence")
    with pytest.raises(ValueError):
        calibrate([], [], fn="median", level="passage")
