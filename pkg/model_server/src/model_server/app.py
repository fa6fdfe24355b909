"""FastAPI application exposing the embedding/sentiment wire protocol.

Endpoints:
    POST /v1/embed      {"texts": [...]} -> {"dim", "model", "vectors"}
    POST /v1/sentiment  {"texts": [...]} -> {"model", "scores"}
    GET  /v1/health     -> {"status", "embed_model", "sentiment_model", "dim"}

Environment: EMBED_MODEL_PATH, SENTIMENT_CHECKPOINT_PATH (optional),
MAX_BATCH (default 64), PORT (default 8000).
"""

from __future__ import annotations

import os

from fastapi import FastAPI, HTTPException, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .classifier import SentimentScorer
from .encoder import Encoder


class TextBatch(BaseModel):
    texts: list[str]


def create_app(
    embed_model_path: str | None = None,
    sentiment_checkpoint_path: str | None = None,
    max_batch: int | None = None,
) -> FastAPI:
    embed_model_path = embed_model_path or os.environ.get("EMBED_MODEL_PATH")
    sentiment_checkpoint_path = (
        sentiment_checkpoint_path or os.environ.get("SENTIMENT_CHECKPOINT_PATH")
    )
    if max_batch is None:
        max_batch = int(os.environ.get("MAX_BATCH", "64"))

    encoder = Encoder(embed_model_path) if embed_model_path else None
    scorer = (
        SentimentScorer(sentiment_checkpoint_path) if sentiment_checkpoint_path else None
    )

    app = FastAPI(title="model-server")

    @app.exception_handler(RequestValidationError)
    async def malformed(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"detail": "malformed request"})

    def check_batch(texts: list[str]) -> None:
        if not texts:
            raise HTTPException(status_code=400, detail="texts must be non-empty")
        if len(texts) > max_batch:
            raise HTTPException(status_code=413, detail=f"batch exceeds {max_batch}")

    @app.post("/v1/embed")
    def embed(batch: TextBatch):
        if encoder is None:
            raise HTTPException(status_code=503, detail="embedding model not loaded")
        check_batch(batch.texts)
        vectors = encoder.encode(batch.texts)
        return {"dim": encoder.dim, "model": encoder.model_name, "vectors": vectors}

    @app.post("/v1/sentiment")
    def sentiment(batch: TextBatch):
        if scorer is None:
            raise HTTPException(status_code=503, detail="sentiment model not loaded")
        check_batch(batch.texts)
        return {"model": scorer.model_name, "scores": scorer.score(batch.texts)}

    @app.get("/v1/health")
    def health():
        return {
            "status": "ok" if encoder is not None else "degraded",
            "embed_model": encoder.model_name if encoder else None,
            "sentiment_model": scorer.model_name if scorer else None,
            "dim": encoder.dim if encoder else None,
        }

    return app


def serve() -> None:
    import uvicorn

    uvicorn.run(create_app(), host="0.0.0.0", port=int(os.environ.get("PORT", "8000")))
