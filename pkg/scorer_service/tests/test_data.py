import json

import pytest

from scorer_service.data import balance_pairs, read_pairs, squad2_pairs, write_pairs
from scorer_service.text import encode_pair, split_sentences, Vocab, CLS, SEP, UNK


def squad_fixture(tmp_path):
    """Two paragraphs, one answerable QA each, plus an impossible one."""
    context1 = ("The Eiffel Tower was completed in 1889. It stands on the "
                "Champ de Mars. Millions visit it every year.")
    answer1 = "1889"
    context2 = ("Honey never spoils when sealed. Archaeologists found edible "
                "honey in ancient tombs.")
    answer2 = "in ancient tombs"
    payload = {"version": "v2.0", "data": [{
        "title": "fixture",
        "paragraphs": [
            {
                "context": context1,
                "qas": [
                    {"id": "a1", "question": "When was the tower completed?",
                     "is_impossible": False,
                     "answers": [{"text": answer1,
                                  "answer_start": context1.index(answer1)}]},
                    {"id": "i1", "question": "Who designed the elevators?",
                     "is_impossible": True, "answers": []},
                ],
            },
            {
                "context": context2,
                "qas": [
                    {"id": "a2", "question": "Where was edible honey found?",
                     "is_impossible": False,
                     "answers": [{"text": answer2,
                                  "answer_start": context2.index(answer2)}]},
                ],
            },
        ],
    }]}
    path = tmp_path / "squad2.json"
    path.write_text(json.dumps(payload), encoding="utf-8")
    return path


def test_squad_pairs_label_sentences_containing_the_answer(tmp_path):
    pairs = squad2_pairs(squad_fixture(tmp_path))
    # 3 sentences x 2 questions on paragraph 1, 2 x 1 on paragraph 2.
    assert len(pairs) == 8
    by_question = {}
    for p in pairs:
        by_question.setdefault(p.question, []).append(p)
    tower = by_question["When was the tower completed?"]
    assert [p.label for p in tower] == [1, 0, 0]
    impossible = by_question["Who designed the elevators?"]
    assert [p.label for p in impossible] == [0, 0, 0]
    honey = by_question["Where was edible honey found?"]
    assert [p.label for p in honey] == [0, 1]
    assert all(p.source == "squad2" for p in pairs)


def test_missing_squad_file_raises_before_training(tmp_path):
    from scorer_service.training import TrainingConfig, prepare_training_pairs
    train_file = tmp_path / "train.jsonl"
    train_file.write_text(json.dumps({
        "question_id": "q", "passage_id": "p", "sentence_index": 0,
        "question": "q text", "sentence": "s text", "label": 1,
    }) + "\n")
    config = TrainingConfig(
        train_file=str(train_file),
        checkpoint=str(tmp_path / "ckpt.pt"),
        augmentation="squad2",
        squad_file=str(tmp_path / "missing.json"),
    )
    with pytest.raises(FileNotFoundError):
        prepare_training_pairs(config)
    assert not (tmp_path / "ckpt.pt").exists()


def test_training_config_requires_squad_file_with_augmentation(tmp_path):
    from scorer_service.training import TrainingConfig
    with pytest.raises(ValueError):
        TrainingConfig(train_file="x", checkpoint="y", augmentation="squad2")


def test_balance_is_exact_and_seeded(tmp_path):
    pairs = squad2_pairs(squad_fixture(tmp_path))
    balanced = balance_pairs(pairs, seed=5)
    positives = sum(1 for p in balanced if p.label == 1)
    negatives = sum(1 for p in balanced if p.label == 0)
    assert positives == negatives == min(
        sum(1 for p in pairs if p.label == 1),
        sum(1 for p in pairs if p.label == 0),
    )
    assert balance_pairs(pairs, seed=5) == balanced
    out = tmp_path / "balanced.jsonl"
    write_pairs(out, balanced)
    assert read_pairs(out) == balanced


def test_split_sentences_covers_text():
    text = "One here. Two here! Three?"
    spans = split_sentences(text)
    assert [text[a:b].strip() for a, b in spans] == ["One here.", "Two here!", "Three?"]


def test_encode_pair_truncates_from_sentence_end():
    vocab = Vocab.build(["alpha beta gamma delta"])
    ids, truncated = encode_pair(vocab, "alpha", "beta gamma delta", max_len=4)
    assert truncated
    assert len(ids) == 4
    assert ids[0] == CLS
    assert SEP in ids
    full, not_truncated = encode_pair(vocab, "alpha", "beta", max_len=16)
    assert not not_truncated
    assert UNK not in full
