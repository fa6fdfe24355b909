"""Transformer inference sidecar: embeddings and sentiment over HTTP."""

__version__ = "0.1.0"

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

MAX_TOKENS = 384
