"""Pluggable embedding and sentiment providers.

Three kinds exist: a deterministic hash-based reference embedder (offline,
cross-platform reproducible), precomputed-file providers keyed by text
hash, and remote clients speaking the sidecar wire protocol.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable, Mapping

import numpy as np
import requests

from .errors import (
    DimensionMismatch,
    MalformedFile,
    MissingKey,
    ProviderUnavailable,
)

SENTIMENT_LABELS = (
    "optimistic",
    "thankful",
    "empathetic",
    "pessimistic",
    "anxious",
    "sad",
    "annoyed",
    "denial",
    "surprise",
    "joking",
)

DEFAULT_THRESHOLD = 0.5

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_U64 = 0xFFFFFFFFFFFFFFFF


def fnv1a64(data: bytes) -> int:
    """FNV-1a 64-bit hash."""
    h = _FNV_OFFSET
    for byte in data:
        h = ((h ^ byte) * _FNV_PRIME) & _U64
    return h


def text_key(text: str) -> str:
    """Cache key: SHA-256 of the exact (normalized) text."""
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class ProviderDescriptor:
    kind: str  # reference | precomputed | remote
    dimension: int
    model: str
    max_input_tokens: int | None = None

    def __post_init__(self):
        if self.dimension < 2:
            raise ValueError(f"dimension must be >= 2, got {self.dimension}")


def reference_embed(text: str, dim: int) -> np.ndarray:
    """Deterministic trigram-hash embedding.

    Lowercase the text, hash every character trigram with FNV-1a 64,
    accumulate +1 at (hash mod dim), L2-normalize. Texts shorter than
    three characters (including empty) give the zero vector.
    """
    if dim < 2:
        raise ValueError("dim must be >= 2")
    vec = np.zeros(dim, dtype=np.float64)
    lowered = text.lower()
    for i in range(len(lowered) - 2):
        trigram = lowered[i:i + 3]
        vec[fnv1a64(trigram.encode("utf-8")) % dim] += 1.0
    norm = float(np.linalg.norm(vec))
    if norm > 0:
        vec /= norm
    return vec


class EmbeddingProvider:
    """Interface: subclasses implement embed_one; batching maps over it."""

    descriptor: ProviderDescriptor

    def embed_one(self, text: str) -> np.ndarray:
        raise NotImplementedError

    def embed_batch(self, texts: list[str]) -> list[np.ndarray]:
        return [self.embed_one(t) for t in texts]


class ReferenceEmbeddingProvider(EmbeddingProvider):
    def __init__(self, dim: int = 768):
        self.descriptor = ProviderDescriptor(
            kind="reference", dimension=dim, model=f"reference-fnv1a-trigram-d{dim}"
        )

    def embed_one(self, text: str) -> np.ndarray:
        return reference_embed(text, self.descriptor.dimension)


class PrecomputedEmbeddingProvider(EmbeddingProvider):
    """Serves vectors from a precomputed file, keyed by text SHA-256."""

    def __init__(self, vectors: Mapping[str, np.ndarray], dim: int, model: str):
        for key, vec in vectors.items():
            if len(vec) != dim:
                raise DimensionMismatch(dim, len(vec))
        self._vectors = {k: np.asarray(v, dtype=np.float64) for k, v in vectors.items()}
        self.descriptor = ProviderDescriptor(kind="precomputed", dimension=dim, model=model)

    def embed_one(self, text: str) -> np.ndarray:
        key = text_key(text)
        if key not in self._vectors:
            raise MissingKey(key)
        return self._vectors[key]

    def __contains__(self, text: str) -> bool:
        return text_key(text) in self._vectors


def load_precomputed_embeddings(source: IO[str] | Path | str) -> PrecomputedEmbeddingProvider:
    """Load a JSON Lines embedding file.

    First line is a header {"dim": int, "model": str}; each following line
    is {"key": hex-sha256, "vector": [floats]}.
    """
    lines = _read_lines(source)
    header, entries = _parse_jsonl(lines)
    try:
        dim, model = int(header["dim"]), str(header["model"])
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedFile(f"bad embeddings header: {exc}") from exc
    vectors = {}
    for obj in entries:
        try:
            vectors[str(obj["key"])] = np.asarray(obj["vector"], dtype=np.float64)
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedFile(f"bad embedding entry: {exc}") from exc
    return PrecomputedEmbeddingProvider(vectors, dim, model)


def save_precomputed_embeddings(
    path: Path | str,
    vectors: Mapping[str, np.ndarray],
    dim: int,
    model: str,
) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps({"dim": dim, "model": model}) + "\n")
        for key in sorted(vectors):
            fh.write(json.dumps({"key": key, "vector": [float(x) for x in vectors[key]]}) + "\n")


@dataclass(frozen=True)
class SentimentPrediction:
    """Scores for all 10 labels plus the thresholded label set."""

    scores: dict[str, float]
    threshold: float = DEFAULT_THRESHOLD

    def __post_init__(self):
        missing = set(SENTIMENT_LABELS) - set(self.scores)
        if missing:
            raise ValueError(f"scores missing labels: {sorted(missing)}")

    @property
    def labels(self) -> frozenset[str]:
        return frozenset(l for l in SENTIMENT_LABELS if self.scores[l] >= self.threshold)


class SentimentProvider:
    model: str = "unknown"

    def predict_one(self, text: str) -> SentimentPrediction:
        raise NotImplementedError

    def predict_batch(self, texts: list[str]) -> list[SentimentPrediction]:
        return [self.predict_one(t) for t in texts]


class PrecomputedSentimentProvider(SentimentProvider):
    def __init__(self, scores: Mapping[str, Mapping[str, float]], model: str,
                 threshold: float = DEFAULT_THRESHOLD):
        self._scores = {k: dict(v) for k, v in scores.items()}
        self.model = model
        self.threshold = threshold

    def predict_one(self, text: str) -> SentimentPrediction:
        key = text_key(text)
        if key not in self._scores:
            raise MissingKey(key)
        return SentimentPrediction(scores=self._scores[key], threshold=self.threshold)

    def __contains__(self, text: str) -> bool:
        return text_key(text) in self._scores


def load_precomputed_sentiments(
    source: IO[str] | Path | str,
    threshold: float = DEFAULT_THRESHOLD,
) -> PrecomputedSentimentProvider:
    """Load a JSON Lines sentiment file: header {"model": str}, then
    {"key": hex-sha256, "scores": {label: float}} per line."""
    lines = _read_lines(source)
    header, entries = _parse_jsonl(lines)
    model = str(header.get("model", "unknown"))
    scores = {}
    for obj in entries:
        try:
            scores[str(obj["key"])] = {str(l): float(s) for l, s in obj["scores"].items()}
        except (KeyError, TypeError, ValueError, AttributeError) as exc:
            raise MalformedFile(f"bad sentiment entry: {exc}") from exc
    return PrecomputedSentimentProvider(scores, model, threshold)


def save_precomputed_sentiments(
    path: Path | str,
    scores: Mapping[str, Mapping[str, float]],
    model: str,
) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps({"model": model}) + "\n")
        for key in sorted(scores):
            fh.write(json.dumps({"key": key, "scores": dict(scores[key])}) + "\n")


class RemoteEmbeddingProvider(EmbeddingProvider):
    """Client for the sidecar /v1/embed endpoint."""

    def __init__(self, base_url: str, timeout: float = 60.0, session=None):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout
        self._session = session or requests.Session()
        health = self._get("/v1/health")
        dim = int(health.get("dim") or 0)
        if dim < 2:
            raise ProviderUnavailable(f"server at {base_url} reports no embed model")
        self.descriptor = ProviderDescriptor(
            kind="remote",
            dimension=dim,
            model=str(health.get("embed_model", "unknown")),
            max_input_tokens=384,
        )

    def embed_one(self, text: str) -> np.ndarray:
        return self.embed_batch([text])[0]

    def embed_batch(self, texts: list[str]) -> list[np.ndarray]:
        if not texts:
            return []
        body = self._post("/v1/embed", {"texts": texts})
        dim = int(body["dim"])
        if dim != self.descriptor.dimension:
            raise DimensionMismatch(self.descriptor.dimension, dim)
        vectors = [np.asarray(v, dtype=np.float64) for v in body["vectors"]]
        if len(vectors) != len(texts):
            raise ProviderUnavailable("response length does not match request")
        return vectors

    def _get(self, route: str) -> dict:
        return _request(self._session, "get", self.base_url + route, None, self.timeout)

    def _post(self, route: str, payload: dict) -> dict:
        return _request(self._session, "post", self.base_url + route, payload, self.timeout)


class RemoteSentimentProvider(SentimentProvider):
    """Client for the sidecar /v1/sentiment endpoint."""

    def __init__(self, base_url: str, threshold: float = DEFAULT_THRESHOLD,
                 timeout: float = 60.0, session=None):
        self.base_url = base_url.rstrip("/")
        self.threshold = threshold
        self.timeout = timeout
        self._session = session or requests.Session()
        health = _request(self._session, "get", self.base_url + "/v1/health", None, timeout)
        self.model = str(health.get("sentiment_model") or "unknown")

    def predict_one(self, text: str) -> SentimentPrediction:
        return self.predict_batch([text])[0]

    def predict_batch(self, texts: list[str]) -> list[SentimentPrediction]:
        if not texts:
            return []
        body = _request(
            self._session, "post", self.base_url + "/v1/sentiment", {"texts": texts}, self.timeout
        )
        preds = [
            SentimentPrediction(scores={str(l): float(s) for l, s in item.items()},
                                threshold=self.threshold)
            for item in body["scores"]
        ]
        if len(preds) != len(texts):
            raise ProviderUnavailable("response length does not match request")
        return preds


def _request(session, method: str, url: str, payload: dict | None, timeout: float) -> dict:
    try:
        if method == "get":
            resp = session.get(url, timeout=timeout)
        else:
            resp = session.post(url, json=payload, timeout=timeout)
    except requests.RequestException as exc:
        raise ProviderUnavailable(f"{url}: {exc}") from exc
    if resp.status_code != 200:
        raise ProviderUnavailable(f"{url}: HTTP {resp.status_code}")
    try:
        return resp.json()
    except ValueError as exc:
        raise ProviderUnavailable(f"{url}: invalid JSON response") from exc


def embed_batch(provider: EmbeddingProvider, texts: list[str]) -> list[np.ndarray]:
    """Module-level convenience wrapper over provider.embed_batch."""
    return provider.embed_batch(texts)


def predict_sentiments(provider: SentimentProvider, texts: list[str]) -> list[SentimentPrediction]:
    return provider.predict_batch(texts)


def _read_lines(source: IO[str] | Path | str) -> list[str]:
    if hasattr(source, "read"):
        return source.read().splitlines()
    return Path(source).read_text("utf-8").splitlines()


def _parse_jsonl(lines: list[str]) -> tuple[dict, list[dict]]:
    stripped = [l for l in (line.strip() for line in lines) if l]
    if not stripped:
        raise MalformedFile("empty precomputed file")
    try:
        parsed = [json.loads(l) for l in stripped]
    except json.JSONDecodeError as exc:
        raise MalformedFile(f"invalid JSON line: {exc}") from exc
    return parsed[0], parsed[1:]
