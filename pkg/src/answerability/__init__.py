"""Answerability prediction over ranked passages.

Scores sentences for answer content, aggregates the scores to passage
and ranking level with max/mean plus fixed thresholds, and evaluates
predictions against a three-level labeled dataset built from
nugget-annotated passages.
"""

from .aggregation import (
    PassageResult,
    RankingResult,
    aggregate,
    decide_passage,
    decide_ranking,
    decide_ranking_binary,
    run_pipeline,
)
from .calibration import CalibrationResult, calibrate, sweep_thresholds
from .dataset import (
    SplitSpec,
    build_dataset,
    generate_rankings,
    label_passage,
    label_sentence,
    segment_passage,
    split_questions,
)
from .evaluation import EvalReport, McNemarResult, accuracy, mcnemar, mcnemar_from_counts
from .scoring import (
    ConstantScorer,
    FileScorer,
    LexicalScorer,
    OracleScorer,
    RemoteScorer,
    Scorer,
    score_dataset,
)
from .types import (
    ALL_CONFIGS,
    AggregationConfig,
    Dataset,
    Nugget,
    Passage,
    Question,
    RankingInstance,
    ScoreRecord,
    Sentence,
    ValidationError,
    Violation,
    validate_dataset,
)

__version__ = "0.1.0"

__all__ = [
    "AggregationConfig",
    "ALL_CONFIGS",
    "CalibrationResult",
    "ConstantScorer",
    "Dataset",
    "EvalReport",
    "FileScorer",
    "LexicalScorer",
    "McNemarResult",
    "Nugget",
    "OracleScorer",
    "Passage",
    "PassageResult",
    "Question",
    "RankingInstance",
    "RankingResult",
    "RemoteScorer",
    "ScoreRecord",
    "Scorer",
    "Sentence",
    "SplitSpec",
    "ValidationError",
    "Violation",
    "accuracy",
    "aggregate",
    "build_dataset",
    "calibrate",
    "decide_passage",
    "decide_ranking",
    "decide_ranking_binary",
    "generate_rankings",
    "label_passage",
    "label_sentence",
    "mcnemar",
    "mcnemar_from_counts",
    "run_pipeline",
    "score_dataset",
    "segment_passage",
    "split_questions",
    "sweep_thresholds",
    "validate_dataset",
]
