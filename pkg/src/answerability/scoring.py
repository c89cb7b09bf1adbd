"""Sentence-level answerability scorers.

Every backend maps a (question, sentence) pair, or the instance identity
for lookup-style backends, to a probability in [0, 1] that the sentence
contains part of the answer. Backends are read-only after construction
and safe to call concurrently.
"""

from __future__ import annotations

import re
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import requests

from . import interchange
from .types import ScoreRecord


class ScoringError(Exception):
    pass


class MissingScoreError(ScoringError):
    """A lookup backend has no record for the requested identity."""


class TransportError(ScoringError):
    """Remote scoring failed; distinct from any probability value."""


class ScoringAborted(ScoringError):
    """score_dataset gave up after exhausting the backend's retries."""

    def __init__(self, completed: int, cause: Exception):
        self.completed = completed
        self.cause = cause
        super().__init__(f"aborted after {completed} completed record(s): {cause}")


class Scorer:
    """Base scorer; subclasses implement score_one or override score_batch."""

    name = "scorer"
    max_in_flight = 1

    def score_one(self, question: str, sentence: str, identity=None) -> float:
        raise NotImplementedError

    def score_batch(self, question: str, sentences: list[str], identities=None) -> list[float]:
        """Score all sentences of one passage against the question."""
        if identities is None:
            identities = [None] * len(sentences)
        return [self.score_one(question, s, i) for s, i in zip(sentences, identities)]


class ConstantScorer(Scorer):
    name = "constant"

    def __init__(self, value: float):
        if not 0.0 <= value <= 1.0:
            raise ValueError(f"constant must be in [0, 1], got {value}")
        self.value = float(value)

    def score_one(self, question, sentence, identity=None):
        return self.value


class OracleScorer(Scorer):
    """Emits the ground-truth sentence label as a 0/1 probability."""

    name = "oracle"

    def __init__(self, labels: dict):
        self.labels = dict(labels)

    @classmethod
    def from_instances(cls, instances) -> "OracleScorer":
        return cls({x.identity: x.label for x in instances})

    @classmethod
    def from_path(cls, path) -> "OracleScorer":
        return cls.from_instances(interchange.load_sentence_instances(path))

    def score_one(self, question, sentence, identity=None):
        if identity not in self.labels:
            raise MissingScoreError(f"no ground-truth label for identity {identity!r}")
        return float(self.labels[identity])


_TOKEN = re.compile(r"[a-z0-9]+")


def tokenize(text: str) -> list[str]:
    return _TOKEN.findall(text.lower())


def token_overlap_f1(question: str, sentence: str) -> float:
    """F1 of the token-multiset overlap between question and sentence.

    Depends only on the two token multisets, so it is invariant to word
    order on either side.
    """
    q = Counter(tokenize(question))
    s = Counter(tokenize(sentence))
    overlap = sum((q & s).values())
    if overlap == 0:
        return 0.0
    precision = overlap / sum(s.values())
    recall = overlap / sum(q.values())
    return 2 * precision * recall / (precision + recall)


class LexicalScorer(Scorer):
    """Term-overlap similarity; a weak but fully deterministic baseline."""

    name = "lexical"

    def score_one(self, question, sentence, identity=None):
        return token_overlap_f1(question, sentence)


class FileScorer(Scorer):
    """Replays precomputed score records keyed by instance identity."""

    name = "file"

    def __init__(self, records: dict):
        self.records = dict(records)

    @classmethod
    def from_path(cls, path) -> "FileScorer":
        return cls({r.identity: r.probability for r in interchange.load_score_records(path)})

    def score_one(self, question, sentence, identity=None):
        if identity not in self.records:
            raise MissingScoreError(f"no score record for identity {identity!r}")
        return self.records[identity]


class RemoteScorer(Scorer):
    """Client for the POST /score wire protocol.

    One request per passage: ``{"question": ..., "sentences": [...]}``
    must come back as ``{"probabilities": [...]}`` of equal length with
    values in [0, 1]; anything else is a protocol violation. Failed
    requests are retried up to the retry budget.
    """

    name = "remote"

    def __init__(self, url: str, timeout: float = 30.0, retries: int = 2,
                 max_in_flight: int = 1, session=None):
        self.url = url.rstrip("/") + "/score"
        self.timeout = timeout
        self.retries = retries
        self.max_in_flight = max(1, int(max_in_flight))
        self.session = session or requests.Session()

    def score_one(self, question, sentence, identity=None):
        return self.score_batch(question, [sentence])[0]

    def _post(self, question, sentences):
        resp = self.session.post(
            self.url,
            json={"question": question, "sentences": sentences},
            timeout=self.timeout,
        )
        if not 200 <= resp.status_code < 300:
            raise TransportError(f"POST {self.url} returned {resp.status_code}")
        body = resp.json()
        probs = body.get("probabilities")
        if not isinstance(probs, list) or len(probs) != len(sentences):
            raise TransportError(
                f"protocol violation: expected {len(sentences)} probabilities, "
                f"got {probs!r}"
            )
        values = [float(p) for p in probs]
        if any(not 0.0 <= p <= 1.0 for p in values):
            raise TransportError(f"protocol violation: probability out of [0, 1]: {values}")
        return values

    def score_batch(self, question, sentences, identities=None):
        last = None
        for _ in range(self.retries + 1):
            try:
                return self._post(question, sentences)
            except (requests.RequestException, ValueError) as e:
                last = TransportError(f"POST {self.url} failed: {e}")
            except TransportError as e:
                last = e
        raise last


def _group_by_passage(instances):
    groups = []
    for x in instances:
        key = (x.question_id, x.passage_id)
        if groups and groups[-1][0] == key:
            groups[-1][1].append(x)
        else:
            groups.append((key, [x]))
    return groups


def score_dataset(scorer: Scorer, instances, output_path, resume: bool = True) -> int:
    """Score every sentence instance, writing one record per input row.

    Sentences are batched per passage. When the output file already
    holds records (a partial earlier run), those identities are skipped
    and only the missing records are appended. Returns the number of
    records written by this call. A backend failure aborts with the
    count of records completed before it.
    """
    output_path = Path(output_path)
    done = set()
    if resume and output_path.exists():
        done = {r.identity for r in interchange.load_score_records(output_path)}
    pending = [x for x in instances if x.identity not in done]
    groups = _group_by_passage(pending)

    def run(group):
        _, items = group
        probs = scorer.score_batch(
            items[0].question,
            [x.sentence for x in items],
            [x.identity for x in items],
        )
        return [
            ScoreRecord(x.question_id, x.passage_id, x.sentence_index, p)
            for x, p in zip(items, probs)
        ]

    output_path.parent.mkdir(parents=True, exist_ok=True)
    written = 0
    mode = "a" if (resume and done) else "w"
    with open(output_path, mode, encoding="utf-8") as f:
        def emit(records):
            nonlocal written
            for r in records:
                f.write(interchange.dumps(interchange.score_record_to_obj(r)))
                f.write("\n")
                written += 1
            f.flush()

        try:
            if scorer.max_in_flight > 1 and len(groups) > 1:
                with ThreadPoolExecutor(max_workers=scorer.max_in_flight) as pool:
                    for records in pool.map(run, groups):
                        emit(records)
            else:
                for group in groups:
                    emit(run(group))
        except ScoringError as e:
            raise ScoringAborted(len(done) + written, e) from e
    return written
