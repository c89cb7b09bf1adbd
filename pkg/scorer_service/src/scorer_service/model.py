"""Compact transformer sequence classifier.

A from-scratch encoder stands in for a pretrained backbone: this
environment has no model hub access, and the wire contract only
requires some sequence-classification model behind it. Reproducing the
published accuracies would mean swapping in a pretrained BERT and the
full training data; the serving and training interfaces stay the same.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import torch
from torch import nn

from .text import PAD, Vocab, encode_pair


@dataclass(frozen=True)
class ModelConfig:
    dim: int = 64
    heads: int = 4
    layers: int = 2
    feedforward: int = 128
    dropout: float = 0.1
    max_len: int = 128


class SentenceClassifier(nn.Module):
    """[CLS] question [SEP] sentence -> probability the sentence answers."""

    def __init__(self, vocab_size: int, config: ModelConfig):
        super().__init__()
        self.config = config
        self.token_embedding = nn.Embedding(vocab_size, config.dim, padding_idx=PAD)
        self.position_embedding = nn.Embedding(config.max_len, config.dim)
        layer = nn.TransformerEncoderLayer(
            d_model=config.dim,
            nhead=config.heads,
            dim_feedforward=config.feedforward,
            dropout=config.dropout,
            batch_first=True,
        )
        self.encoder = nn.TransformerEncoder(layer, num_layers=config.layers)
        self.head = nn.Linear(config.dim, 2)

    def forward(self, ids: torch.Tensor) -> torch.Tensor:
        positions = torch.arange(ids.size(1), device=ids.device)
        x = self.token_embedding(ids) + self.position_embedding(positions)
        mask = ids.eq(PAD)
        x = self.encoder(x, src_key_padding_mask=mask)
        return self.head(x[:, 0, :])  # CLS position


def pad_batch(sequences: list[list[int]]) -> torch.Tensor:
    width = max(len(s) for s in sequences)
    return torch.tensor(
        [s + [PAD] * (width - len(s)) for s in sequences], dtype=torch.long
    )


@torch.no_grad()
def score_sentences(model: SentenceClassifier, vocab: Vocab, question: str,
                    sentences: list[str]) -> tuple[list[float], bool]:
    """Probabilities for all sentences of one passage, plus truncation flag."""
    model.eval()
    encoded = [
        encode_pair(vocab, question, s, model.config.max_len) for s in sentences
    ]
    batch = pad_batch([ids for ids, _ in encoded])
    probabilities = torch.softmax(model(batch), dim=-1)[:, 1]
    truncated = any(flag for _, flag in encoded)
    return [float(p) for p in probabilities], truncated


def save_checkpoint(path, model: SentenceClassifier, vocab: Vocab, extra=None):
    torch.save({
        "model_state": model.state_dict(),
        "model_config": asdict(model.config),
        "vocab_tokens": vocab.itos[4:],
        "extra": extra or {},
    }, path)


def load_checkpoint(path) -> tuple[SentenceClassifier, Vocab, dict]:
    payload = torch.load(path, map_location="cpu", weights_only=True)
    vocab = Vocab(payload["vocab_tokens"])
    config = ModelConfig(**payload["model_config"])
    model = SentenceClassifier(len(vocab), config)
    model.load_state_dict(payload["model_state"])
    model.eval()
    return model, vocab, payload.get("extra", {})
