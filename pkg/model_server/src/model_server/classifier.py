"""Multi-label sentiment classifier: transformer trunk + sigmoid head."""

from __future__ import annotations

import json
from pathlib import Path

import torch
from torch import nn
from transformers import AutoModel, AutoTokenizer

from . import MAX_TOKENS, SENTIMENT_LABELS

HEAD_FILE = "head.pt"
META_FILE = "classifier.json"


class SentimentClassifier(nn.Module):
    """Pooled transformer output -> dropout -> linear -> one logit per label."""

    def __init__(self, base_model, dropout: float = 0.3):
        super().__init__()
        self.base = base_model
        self.dropout = nn.Dropout(dropout)
        self.head = nn.Linear(base_model.config.hidden_size, len(SENTIMENT_LABELS))

    def forward(self, input_ids, attention_mask, **kwargs):
        out = self.base(input_ids=input_ids, attention_mask=attention_mask)
        # [CLS]-position state as the sequence summary
        pooled = out.last_hidden_state[:, 0]
        return self.head(self.dropout(pooled))


class SentimentScorer:
    """Inference wrapper producing per-label probabilities in [0, 1]."""

    def __init__(self, checkpoint_path: str, max_tokens: int = MAX_TOKENS):
        checkpoint = Path(checkpoint_path)
        meta = json.loads((checkpoint / META_FILE).read_text(encoding="utf-8"))
        base_path = meta.get("base_model", str(checkpoint))
        self.tokenizer = AutoTokenizer.from_pretrained(base_path)
        base = AutoModel.from_pretrained(base_path)
        self.model = SentimentClassifier(base, dropout=meta.get("dropout", 0.3))
        head_state = torch.load(checkpoint / HEAD_FILE, map_location="cpu")
        self.model.head.load_state_dict(head_state)
        self.model.eval()
        self.max_tokens = max_tokens
        self.model_name = meta.get("model_name", str(checkpoint))

    @torch.inference_mode()
    def score(self, texts: list[str]) -> list[dict[str, float]]:
        if not texts:
            return []
        batch = self.tokenizer(
            texts,
            padding=True,
            truncation=True,
            max_length=self.max_tokens,
            return_tensors="pt",
        )
        logits = self.model(batch["input_ids"], batch["attention_mask"])
        probs = torch.sigmoid(logits)
        return [
            {label: float(p) for label, p in zip(SENTIMENT_LABELS, row)}
            for row in probs
        ]


def save_checkpoint(path: str | Path, model: SentimentClassifier, base_model_path: str,
                    model_name: str, dropout: float) -> None:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    torch.save(model.head.state_dict(), out / HEAD_FILE)
    (out / META_FILE).write_text(json.dumps({
        "base_model": base_model_path,
        "model_name": model_name,
        "dropout": dropout,
        "labels": list(SENTIMENT_LABELS),
    }, indent=2) + "\n", encoding="utf-8")
