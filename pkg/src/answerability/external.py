"""Adapter for black-box answerability predictors.

A predictor receives the question and one passage (passage mode) or n
passages (ranking mode) and must answer with a bare 0 or 1. Two
transports are supported: a persistent subprocess speaking one JSON
object per line on stdin and one bare 0/1 per line on stdout, and an
HTTP endpoint answering POSTs the same way. Anything that does not
parse strictly as 0 or 1 after the retry budget is recorded as a
malformed response; the run always completes.
"""

from __future__ import annotations

import json
import queue
import subprocess
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import requests

from . import interchange
from .types import DatasetLoadError

ERROR_KINDS = ("timeout", "transport", "malformed")


class PredictorError(Exception):
    kind = "transport"


class PredictorTimeout(PredictorError):
    kind = "timeout"


class PredictorTransportError(PredictorError):
    kind = "transport"


class MalformedResponse(PredictorError):
    kind = "malformed"


@dataclass(frozen=True)
class PredictorSpec:
    """How to reach one external predictor and how patient to be.

    ``max_in_flight`` bounds concurrent calls; only the http transport
    can go above 1, the subprocess line protocol is inherently serial.
    """

    mode: str                      # passage | ranking
    transport: str                 # subprocess | http
    command: tuple[str, ...] = ()  # subprocess argv
    endpoint: str = ""             # http URL
    timeout: float = 30.0
    retries: int = 1
    max_in_flight: int = 1

    def __post_init__(self):
        if self.mode not in ("passage", "ranking"):
            raise ValueError(f"unknown predictor mode {self.mode!r}")
        if self.transport == "subprocess":
            if not self.command:
                raise ValueError("subprocess transport requires a command")
        elif self.transport == "http":
            if not self.endpoint:
                raise ValueError("http transport requires an endpoint")
        else:
            raise ValueError(f"unknown transport {self.transport!r}")
        if self.max_in_flight < 1:
            raise ValueError("max_in_flight must be at least 1")

    @classmethod
    def from_path(cls, path) -> "PredictorSpec":
        with open(path, "r", encoding="utf-8") as f:
            obj = json.load(f)
        return cls(
            mode=obj.get("mode", "passage"),
            transport=obj.get("transport", "subprocess"),
            command=tuple(obj.get("command", ())),
            endpoint=obj.get("endpoint", ""),
            timeout=float(obj.get("timeout", 30.0)),
            retries=int(obj.get("retries", 1)),
            max_in_flight=int(obj.get("max_in_flight", 1)),
        )


def parse_binary(raw: str) -> int:
    """Strictly parse a predictor reply: exactly '0' or '1' after stripping."""
    value = raw.strip()
    if value == "0":
        return 0
    if value == "1":
        return 1
    raise MalformedResponse(f"expected bare 0 or 1, got {raw!r}")


class SubprocessPredictor:
    """Keeps one filter process alive and exchanges one line per call.

    A dead or hung process is killed and respawned on the next attempt,
    so a single bad instance cannot poison the rest of the run.
    """

    def __init__(self, spec: PredictorSpec):
        self.spec = spec
        self._proc = None
        self._lines: queue.Queue = queue.Queue()

    def _spawn(self):
        self._proc = subprocess.Popen(
            list(self.spec.command),
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            text=True,
            bufsize=1,
        )
        self._lines = queue.Queue()
        thread = threading.Thread(
            target=self._drain, args=(self._proc, self._lines), daemon=True
        )
        thread.start()

    @staticmethod
    def _drain(proc, lines):
        for line in proc.stdout:
            lines.put(line)
        lines.put(None)  # EOF marker

    def close(self):
        if self._proc is not None:
            self._proc.kill()
            self._proc.wait()
            self._proc = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def call(self, payload: dict) -> int:
        if self._proc is None or self._proc.poll() is not None:
            self.close()
            try:
                self._spawn()
            except OSError as e:
                raise PredictorTransportError(f"cannot start predictor: {e}") from e
        try:
            self._proc.stdin.write(json.dumps(payload, ensure_ascii=False) + "\n")
            self._proc.stdin.flush()
        except (BrokenPipeError, OSError) as e:
            self.close()
            raise PredictorTransportError(f"predictor pipe closed: {e}") from e
        try:
            line = self._lines.get(timeout=self.spec.timeout)
        except queue.Empty:
            self.close()
            raise PredictorTimeout(
                f"no reply within {self.spec.timeout}s from {self.spec.command[0]}"
            ) from None
        if line is None:
            self.close()
            raise PredictorTransportError("predictor exited before replying")
        return parse_binary(line)


class HttpPredictor:
    def __init__(self, spec: PredictorSpec, session=None):
        self.spec = spec
        self.session = session or requests.Session()

    def close(self):
        self.session.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def call(self, payload: dict) -> int:
        try:
            resp = self.session.post(
                self.spec.endpoint, json=payload, timeout=self.spec.timeout
            )
        except requests.Timeout as e:
            raise PredictorTimeout(f"no reply within {self.spec.timeout}s") from e
        except requests.RequestException as e:
            raise PredictorTransportError(str(e)) from e
        if not 200 <= resp.status_code < 300:
            raise PredictorTransportError(f"predictor returned HTTP {resp.status_code}")
        return parse_binary(resp.text)


def open_predictor(spec: PredictorSpec):
    if spec.transport == "subprocess":
        return SubprocessPredictor(spec)
    return HttpPredictor(spec)


def predict(predictor, spec: PredictorSpec, question: str, passages: list[str]) -> int:
    """One strict 0/1 prediction, retrying up to the spec's budget."""
    expected = 1 if spec.mode == "passage" else None
    if expected is not None and len(passages) != expected:
        raise ValueError(f"passage mode expects 1 passage, got {len(passages)}")
    payload = {"question": question, "passages": passages}
    last = None
    for _ in range(spec.retries + 1):
        try:
            return predictor.call(payload)
        except PredictorError as e:
            last = e
    raise last


def _ranking_payloads(instances_path, corpus_path):
    """Resolve ranking instances to (identity dict, question, passage texts)."""
    if corpus_path is None:
        raise DatasetLoadError(
            "ranking-mode prediction needs --corpus to resolve passage texts"
        )
    corpus = interchange.load_corpus(corpus_path)
    question_text = {q.id: q.text for q in corpus.questions}
    passage_text = {(p.question_id, p.id): p.text for p in corpus.passages}
    for r in interchange.load_rankings(instances_path):
        identity = {"question_id": r.question_id, "passage_ids": list(r.passage_ids)}
        try:
            question = question_text[r.question_id]
            passages = [passage_text[(r.question_id, pid)] for pid in r.passage_ids]
        except KeyError as e:
            raise DatasetLoadError(f"corpus does not contain {e.args[0]!r}") from e
        yield identity, question, passages


def _passage_payloads(instances_path):
    for x in interchange.load_passage_instances(instances_path):
        identity = {"question_id": x.question_id, "passage_id": x.passage_id}
        yield identity, x.question, [x.passage]


def run_predictor(spec: PredictorSpec, instances_path, output_path,
                  corpus_path=None) -> dict:
    """Predict every instance, in order, tolerating per-instance failures.

    Writes one prediction row (or an explicit error marker) per input
    row and returns the run manifest with timing, retry, and error
    tallies. The manifest is also written beside the output file.
    """
    if spec.mode == "ranking":
        payloads = list(_ranking_payloads(instances_path, corpus_path))
    else:
        payloads = list(_passage_payloads(instances_path))

    config = f"external-{spec.mode}"
    errors = {kind: 0 for kind in ERROR_KINDS}
    started = time.time()

    def attempt_one(predictor, identity, question, passages):
        row = {**identity, "config": config}
        used = 0
        for attempt in range(spec.retries + 1):
            try:
                row["prediction"] = predictor.call(
                    {"question": question, "passages": passages}
                )
                return row, None, used
            except PredictorError as e:
                failure = e
                if attempt < spec.retries:
                    used += 1
        row["error"] = failure.kind
        return row, failure, used

    if spec.transport == "http" and spec.max_in_flight > 1:
        # Each worker gets its own session; rows merge in input order.
        def run_one(payload):
            with HttpPredictor(spec) as predictor:
                return attempt_one(predictor, *payload)

        with ThreadPoolExecutor(max_workers=spec.max_in_flight) as pool:
            outcomes = list(pool.map(run_one, payloads))
    else:
        outcomes = []
        with open_predictor(spec) as predictor:
            for payload in payloads:
                outcomes.append(attempt_one(predictor, *payload))

    rows = []
    retries = 0
    for row, failure, used in outcomes:
        if failure is not None:
            errors[failure.kind] += 1
        retries += used
        rows.append(row)
    elapsed = time.time() - started

    interchange.write_jsonl(output_path, rows)
    manifest = {
        "mode": spec.mode,
        "transport": spec.transport,
        "n_instances": len(rows),
        "n_predicted": sum(1 for r in rows if "prediction" in r),
        "errors": errors,
        "retries": retries,
        "started_unix": started,
        "duration_s": elapsed,
    }
    manifest_path = Path(str(output_path) + ".manifest.json")
    with open(manifest_path, "w", encoding="utf-8") as f:
        json.dump(manifest, f, indent=2)
        f.write("\n")
    return manifest
