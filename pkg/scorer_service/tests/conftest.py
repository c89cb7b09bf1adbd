import json

import pytest

from scorer_service.model import ModelConfig
from scorer_service.training import TrainingConfig, train

POSITIVE_SENTENCES = [
    "the waggle dance tells other bees where the flowers are",
    "romulus founded the city according to the old legend",
    "charged particles from the sun light up the upper atmosphere",
    "chlorophyll breaks down and the hidden pigments appear",
    "the answer is mauna kea when measured from its base",
    "the gas released by yeast makes the dough rise",
    "the cable was finished in 1858 after two failed attempts",
    "oxygen glows green and red during strong displays",
    "trapped sugars form the red anthocyanin pigments",
    "solar wind electrons collide with the magnetosphere",
]

NEGATIVE_SENTENCES = [
    "the weather was pleasant for most of the afternoon",
    "tourists often visit the fountain early in the morning",
    "the stadium could seat fifty thousand spectators",
    "cave paintings in spain show early honey gatherers",
    "monarch butterflies migrate south every single year",
    "volcanic eruptions keep reshaping the island landscape",
    "polar bears hunt seals at their breathing holes",
    "winter ascents of the peak were not achieved until recently",
    "maple sap flows best on cold nights and warm days",
    "the trench bottom lies nearly eleven kilometers down",
]

QUESTIONS = [
    "where is the answer hiding",
    "what explains the phenomenon",
    "who did the founding work",
    "how does the mechanism work",
]


def toy_pairs():
    """Separable toy data: positives share answer-ish vocabulary."""
    rows = []
    for qi, question in enumerate(QUESTIONS):
        for si, sentence in enumerate(POSITIVE_SENTENCES):
            rows.append({
                "question_id": f"q{qi}", "passage_id": f"p{si}",
                "sentence_index": 0, "question": question,
                "sentence": sentence, "label": 1,
            })
        for si, sentence in enumerate(NEGATIVE_SENTENCES):
            rows.append({
                "question_id": f"q{qi}", "passage_id": f"n{si}",
                "sentence_index": 0, "question": question,
                "sentence": sentence, "label": 0,
            })
    return rows


def write_instances(path, rows):
    with open(path, "w", encoding="utf-8") as f:
        for row in rows:
            f.write(json.dumps(row, ensure_ascii=False) + "\n")


@pytest.fixture(scope="session")
def toy_train_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "sentences.train.jsonl"
    write_instances(path, toy_pairs())
    return path


@pytest.fixture(scope="session")
def fast_model_config():
    return ModelConfig(dim=32, heads=2, layers=1, feedforward=64,
                       dropout=0.0, max_len=64)


@pytest.fixture(scope="session")
def trained_checkpoint(tmp_path_factory, toy_train_file, fast_model_config):
    checkpoint = tmp_path_factory.mktemp("ckpt") / "toy.pt"
    config = TrainingConfig(
        train_file=str(toy_train_file),
        checkpoint=str(checkpoint),
        epochs=20,
        seed=13,
        model=fast_model_config,
    )
    report = train(config)
    return checkpoint, report
