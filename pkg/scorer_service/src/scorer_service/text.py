"""Tokenization, vocabulary, and input encoding for the classifier.

Inputs are encoded as [CLS] question [SEP] sentence, truncated from the
sentence end when they exceed the configured maximum length.
"""

from __future__ import annotations

import re
from collections import Counter

PAD, UNK, CLS, SEP = 0, 1, 2, 3
SPECIALS = ("[PAD]", "[UNK]", "[CLS]", "[SEP]")

_TOKEN = re.compile(r"[a-z0-9']+")

# Plain terminal-punctuation splitter for SQuAD contexts; boundaries sit
# after ., ! or ? followed by whitespace and a capital.
_SENT_BOUNDARY = re.compile(r"[.!?]+(?=\s+[A-Z\"'(])")


def tokenize(text: str) -> list[str]:
    return _TOKEN.findall(text.lower())


def split_sentences(text: str) -> list[tuple[int, int]]:
    """Character spans of sentences; the whole text if nothing splits."""
    boundaries = [0]
    boundaries.extend(m.end() for m in _SENT_BOUNDARY.finditer(text))
    boundaries.append(len(text))
    return [(a, b) for a, b in zip(boundaries, boundaries[1:]) if text[a:b].strip()]


class Vocab:
    """Token-to-id mapping built from the training corpus."""

    def __init__(self, tokens: list[str]):
        self.itos = list(SPECIALS) + tokens
        self.stoi = {t: i for i, t in enumerate(self.itos)}

    def __len__(self):
        return len(self.itos)

    @classmethod
    def build(cls, texts, min_count: int = 1, max_size: int = 30000) -> "Vocab":
        counts = Counter()
        for text in texts:
            counts.update(tokenize(text))
        kept = [
            token
            for token, count in sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
            if count >= min_count
        ]
        return cls(kept[: max_size - len(SPECIALS)])

    def ids(self, text: str) -> list[int]:
        return [self.stoi.get(t, UNK) for t in tokenize(text)]


def encode_pair(vocab: Vocab, question: str, sentence: str,
                max_len: int) -> tuple[list[int], bool]:
    """Ids for one (question, sentence) pair plus a truncation flag.

    The question side is never cut; overflow is truncated from the
    sentence end.
    """
    q_ids = vocab.ids(question)
    s_ids = vocab.ids(sentence)
    ids = [CLS] + q_ids + [SEP] + s_ids
    if len(ids) <= max_len:
        return ids, False
    return ids[:max_len], True
