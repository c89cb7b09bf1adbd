"""HTTP service implementing the sentence-scoring wire protocol.

POST /score takes {"question": str, "sentences": [str, ...]} and
returns {"probabilities": [float, ...]} of equal length. Requests that
do not match that shape get a 400 with an error body. Inputs beyond the
model's maximum length are truncated from the sentence end, flagged by
an X-Truncated response header. GET /health reports the model identity
and checkpoint hash.
"""

from __future__ import annotations

import hashlib
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .model import load_checkpoint, score_sentences


def _file_sha256(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _bad_request(message: str) -> JSONResponse:
    return JSONResponse(status_code=400, content={"error": message})


def create_app(checkpoint_path) -> FastAPI:
    checkpoint_path = Path(checkpoint_path)
    model, vocab, extra = load_checkpoint(checkpoint_path)
    checkpoint_hash = _file_sha256(checkpoint_path)

    app = FastAPI(title="sentence answerability scorer")

    @app.get("/health")
    def health():
        return {
            "model": "sentence-classifier-transformer",
            "checkpoint": checkpoint_path.name,
            "checkpoint_sha256": checkpoint_hash,
            "vocab_size": len(vocab),
            "max_input_length": model.config.max_len,
            "trained": extra.get("trained", {}),
        }

    @app.post("/score")
    async def score(request: Request):
        try:
            body = await request.json()
        except Exception:
            return _bad_request("request body is not valid JSON")
        if not isinstance(body, dict):
            return _bad_request("request body must be a JSON object")
        question = body.get("question")
        sentences = body.get("sentences")
        if not isinstance(question, str) or not question:
            return _bad_request("'question' must be a non-empty string")
        if not isinstance(sentences, list) or not sentences:
            return _bad_request("'sentences' must be a non-empty list")
        if not all(isinstance(s, str) and s for s in sentences):
            return _bad_request("every sentence must be a non-empty string")

        probabilities, truncated = score_sentences(model, vocab, question, sentences)
        headers = {"X-Truncated": "true"} if truncated else {}
        return JSONResponse(
            content={"probabilities": probabilities}, headers=headers
        )

    return app
