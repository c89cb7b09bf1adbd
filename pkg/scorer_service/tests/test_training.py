import time

from scorer_service.data import read_pairs
from scorer_service.model import load_checkpoint, score_sentences
from scorer_service.training import TrainingConfig, train

from conftest import NEGATIVE_SENTENCES, POSITIVE_SENTENCES, toy_pairs


def test_overfit_beats_majority_rate(trained_checkpoint):
    checkpoint, report = trained_checkpoint
    rows = toy_pairs()
    majority_rate = max(
        sum(r["label"] for r in rows), len(rows) - sum(r["label"] for r in rows)
    ) / len(rows)
    assert report["train_accuracy"] > majority_rate
    assert report["duration_s"] < 300  # well under the 5-minute budget
    # The loaded checkpoint separates held-in positives from negatives.
    model, vocab, _ = load_checkpoint(checkpoint)
    probs_pos, _ = score_sentences(
        model, vocab, "where is the answer hiding", POSITIVE_SENTENCES[:5]
    )
    probs_neg, _ = score_sentences(
        model, vocab, "where is the answer hiding", NEGATIVE_SENTENCES[:5]
    )
    assert sum(probs_pos) / len(probs_pos) > sum(probs_neg) / len(probs_neg)


def test_training_report_written_beside_checkpoint(trained_checkpoint):
    checkpoint, report = trained_checkpoint
    report_path = checkpoint.with_suffix(checkpoint.suffix + ".report.json")
    assert report_path.exists()
    assert report["n_train_pairs"] + report["n_validation_pairs"] == len(toy_pairs())
    assert report["validation_accuracy"] is not None


def test_same_seed_gives_identical_data_order(tmp_path, toy_train_file,
                                              fast_model_config):
    def materialized(run_dir):
        checkpoint = run_dir / "m.pt"
        train(TrainingConfig(
            train_file=str(toy_train_file),
            checkpoint=str(checkpoint),
            epochs=1,
            seed=99,
            model=fast_model_config,
        ))
        return read_pairs(checkpoint.with_suffix(".pt.training_data.jsonl"))

    a_dir, b_dir = tmp_path / "a", tmp_path / "b"
    a_dir.mkdir(), b_dir.mkdir()
    assert materialized(a_dir) == materialized(b_dir)


def test_different_seed_changes_data_order(tmp_path, toy_train_file,
                                           fast_model_config):
    def order(seed):
        checkpoint = tmp_path / f"s{seed}.pt"
        train(TrainingConfig(
            train_file=str(toy_train_file),
            checkpoint=str(checkpoint),
            epochs=1,
            seed=seed,
            model=fast_model_config,
        ))
        return read_pairs(checkpoint.with_suffix(".pt.training_data.jsonl"))

    assert order(1) != order(2)


def test_squad_augmented_training_set_is_balanced(tmp_path, toy_train_file,
                                                  fast_model_config):
    import json
    context = ("Alpha is the first letter. Beta comes second. Gamma is third. "
               "Delta follows. Epsilon is fifth.")
    payload = {"data": [{"paragraphs": [{
        "context": context,
        "qas": [
            {"id": "1", "question": "Which letter is first?",
             "is_impossible": False,
             "answers": [{"text": "Alpha is the first",
                          "answer_start": 0}]},
            {"id": "2", "question": "Which letter is tenth?",
             "is_impossible": True, "answers": []},
        ],
    }]}]}
    squad = tmp_path / "squad.json"
    squad.write_text(json.dumps(payload), encoding="utf-8")

    checkpoint = tmp_path / "aug.pt"
    train(TrainingConfig(
        train_file=str(toy_train_file),
        checkpoint=str(checkpoint),
        augmentation="squad2",
        squad_file=str(squad),
        epochs=1,
        seed=7,
        model=fast_model_config,
    ))
    materialized = read_pairs(checkpoint.with_suffix(".pt.training_data.jsonl"))
    squad_rows = [p for p in materialized if p.source == "squad2"]
    assert squad_rows, "augmentation rows missing from materialized training data"
    positives = sum(1 for p in squad_rows if p.label == 1)
    assert positives == len(squad_rows) - positives
