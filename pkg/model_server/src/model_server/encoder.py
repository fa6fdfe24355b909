"""Sentence encoder: transformer + masked mean pooling + L2 normalization."""

from __future__ import annotations

import torch
from transformers import AutoModel, AutoTokenizer

from . import MAX_TOKENS


def mean_pool(hidden: torch.Tensor, mask: torch.Tensor) -> torch.Tensor:
    """Average token states over real (non-padding) positions."""
    mask = mask.unsqueeze(-1).to(hidden.dtype)
    summed = (hidden * mask).sum(dim=1)
    counts = mask.sum(dim=1).clamp(min=1)
    return summed / counts


class Encoder:
    """Embeds sentences as unit vectors.

    Inputs longer than the token budget are truncated before encoding, so
    callers never need a tokenizer of their own.
    """

    def __init__(self, model_path: str, max_tokens: int = MAX_TOKENS):
        self.tokenizer = AutoTokenizer.from_pretrained(model_path)
        self.model = AutoModel.from_pretrained(model_path)
        self.model.eval()
        self.max_tokens = max_tokens
        self.model_name = getattr(self.model.config, "name_or_path", model_path) or model_path

    @property
    def dim(self) -> int:
        return self.model.config.hidden_size

    @torch.inference_mode()
    def encode(self, texts: list[str]) -> list[list[float]]:
        if not texts:
            return []
        batch = self.tokenizer(
            texts,
            padding=True,
            truncation=True,
            max_length=self.max_tokens,
            return_tensors="pt",
        )
        out = self.model(**batch)
        pooled = mean_pool(out.last_hidden_state, batch["attention_mask"])
        normed = torch.nn.functional.normalize(pooled, p=2, dim=1)
        return normed.tolist()
