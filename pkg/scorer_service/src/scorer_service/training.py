"""Training loop for the answer-in-the-sentence classifier."""

from __future__ import annotations

import json
import random
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import torch
from torch import nn

from . import data as data_mod
from .model import ModelConfig, SentenceClassifier, pad_batch, save_checkpoint
from .text import Vocab, encode_pair


@dataclass(frozen=True)
class TrainingConfig:
    train_file: str
    checkpoint: str
    augmentation: str = "none"          # none | squad2
    squad_file: str | None = None
    max_input_length: int = 128
    epochs: int = 12
    learning_rate: float = 1e-3
    batch_size: int = 16
    seed: int = 13
    validation_fraction: float = 0.1
    model: ModelConfig = field(default_factory=ModelConfig)

    def __post_init__(self):
        if self.augmentation not in ("none", "squad2"):
            raise ValueError(f"unknown augmentation {self.augmentation!r}")
        if self.augmentation == "squad2" and not self.squad_file:
            raise ValueError("augmentation=squad2 requires squad_file")

    @classmethod
    def from_path(cls, path) -> "TrainingConfig":
        with open(path, "r", encoding="utf-8") as f:
            obj = json.load(f)
        model_cfg = ModelConfig(**obj.pop("model", {}))
        return cls(model=model_cfg, **obj)


def prepare_training_pairs(config: TrainingConfig) -> list[data_mod.Pair]:
    """Load instance pairs, optionally merged with balanced SQuAD pairs.

    Raises before any training work when the augmentation source is
    missing. The combined order is seeded-shuffled so identical seeds
    give identical data order and augmentation sample selection.
    """
    pairs = data_mod.load_instance_pairs(config.train_file)
    if not pairs:
        raise ValueError(f"no training pairs in {config.train_file}")
    if config.augmentation == "squad2":
        raw = data_mod.squad2_pairs(config.squad_file)
        pairs = pairs + data_mod.balance_pairs(raw, config.seed)
    rng = random.Random(config.seed)
    rng.shuffle(pairs)
    return pairs


def _batches(items, size):
    for i in range(0, len(items), size):
        yield items[i:i + size]


def _accuracy(model, vocab, pairs, max_len, batch_size):
    if not pairs:
        return None
    model.eval()
    correct = 0
    with torch.no_grad():
        for batch in _batches(pairs, batch_size):
            ids = pad_batch([
                encode_pair(vocab, p.question, p.sentence, max_len)[0]
                for p in batch
            ])
            predicted = model(ids).argmax(dim=-1)
            correct += sum(
                int(pred) == p.label for pred, p in zip(predicted, batch)
            )
    return correct / len(pairs)


def train(config: TrainingConfig) -> dict:
    """Train, save the checkpoint, and return the training report.

    Also materializes the exact training pairs (with their source tags)
    beside the checkpoint for auditing, and writes the report JSON.
    """
    started = time.time()
    torch.manual_seed(config.seed)
    pairs = prepare_training_pairs(config)

    checkpoint_path = Path(config.checkpoint)
    checkpoint_path.parent.mkdir(parents=True, exist_ok=True)
    data_mod.write_pairs(
        checkpoint_path.with_suffix(checkpoint_path.suffix + ".training_data.jsonl"),
        pairs,
    )

    n_val = int(len(pairs) * config.validation_fraction)
    val_pairs = pairs[:n_val]
    train_pairs = pairs[n_val:]

    max_len = min(config.max_input_length, config.model.max_len)
    vocab = Vocab.build(
        [p.question for p in train_pairs] + [p.sentence for p in train_pairs]
    )
    model = SentenceClassifier(len(vocab), config.model)
    optimizer = torch.optim.Adam(model.parameters(), lr=config.learning_rate)
    loss_fn = nn.CrossEntropyLoss()

    model.train()
    for _ in range(config.epochs):
        for batch in _batches(train_pairs, config.batch_size):
            ids = pad_batch([
                encode_pair(vocab, p.question, p.sentence, max_len)[0]
                for p in batch
            ])
            labels = torch.tensor([p.label for p in batch], dtype=torch.long)
            optimizer.zero_grad()
            loss = loss_fn(model(ids), labels)
            loss.backward()
            optimizer.step()

    report = {
        "n_train_pairs": len(train_pairs),
        "n_validation_pairs": len(val_pairs),
        "n_squad_pairs": sum(1 for p in pairs if p.source == "squad2"),
        "train_accuracy": _accuracy(model, vocab, train_pairs, max_len,
                                    config.batch_size),
        "validation_accuracy": _accuracy(model, vocab, val_pairs, max_len,
                                         config.batch_size),
        "epochs": config.epochs,
        "seed": config.seed,
        "augmentation": config.augmentation,
        "duration_s": time.time() - started,
        "config": asdict(config),
    }
    save_checkpoint(checkpoint_path, model, vocab, extra={
        "trained": {k: report[k] for k in
                    ("n_train_pairs", "epochs", "seed", "augmentation")},
    })
    report_path = checkpoint_path.with_suffix(checkpoint_path.suffix + ".report.json")
    with open(report_path, "w", encoding="utf-8") as f:
        json.dump(report, f, indent=2)
        f.write("\n")
    return report
