"""Fine-tune the multi-label sentiment classifier.

Training data is JSON Lines, one record per line:

    {"text": "...", "labels": [0, 1, 0, 0, 0, 0, 0, 0, 0, 0]}

with the 10-bit vector following the canonical label order. The script
saves a checkpoint directory plus a metrics log that echoes the effective
configuration and the eval-mode loss before and after training.
"""

from __future__ import annotations

import argparse
import json
import random
from dataclasses import asdict, dataclass
from pathlib import Path

import torch
from torch import nn
from transformers import AutoModel, AutoTokenizer

from . import MAX_TOKENS, SENTIMENT_LABELS
from .classifier import SentimentClassifier, save_checkpoint


class MalformedTrainingRecord(ValueError):
    def __init__(self, line_number: int, reason: str):
        super().__init__(f"line {line_number}: {reason}")
        self.line_number = line_number


@dataclass
class TrainingConfig:
    learning_rate: float = 1e-5
    epochs: int = 4
    batch_size: int = 1
    dropout: float = 0.3
    train_fraction: float = 0.9
    seed: int = 0

    def __post_init__(self):
        if self.learning_rate <= 0 or self.epochs <= 0 or self.batch_size <= 0:
            raise ValueError("learning_rate, epochs, and batch_size must be positive")
        if self.dropout < 0 or self.dropout >= 1:
            raise ValueError("dropout must be in [0, 1)")
        if not 0 < self.train_fraction < 1:
            raise ValueError("train_fraction must split the data two ways")


def load_training_records(path: str | Path) -> list[tuple[str, list[float]]]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedTrainingRecord(line_no, f"invalid JSON: {exc}") from exc
            if not isinstance(obj, dict) or "text" not in obj or "labels" not in obj:
                raise MalformedTrainingRecord(line_no, "record needs text and labels")
            labels = obj["labels"]
            if isinstance(labels, dict):
                unknown = set(labels) - set(SENTIMENT_LABELS)
                if unknown:
                    raise MalformedTrainingRecord(line_no, f"unknown labels {sorted(unknown)}")
                labels = [float(labels.get(l, 0)) for l in SENTIMENT_LABELS]
            elif isinstance(labels, list) and len(labels) == len(SENTIMENT_LABELS):
                labels = [float(x) for x in labels]
            else:
                raise MalformedTrainingRecord(
                    line_no, f"labels must be a {len(SENTIMENT_LABELS)}-bit vector or label map"
                )
            if any(x not in (0.0, 1.0) for x in labels):
                raise MalformedTrainingRecord(line_no, "label values must be 0 or 1")
            records.append((str(obj["text"]), labels))
    if not records:
        raise MalformedTrainingRecord(0, "training file is empty")
    return records


def _batches(items, size):
    for i in range(0, len(items), size):
        yield items[i:i + size]


def _eval_loss(model, tokenizer, records, loss_fn) -> float:
    model.eval()
    total, count = 0.0, 0
    with torch.inference_mode():
        for text, labels in records:
            batch = tokenizer(text, truncation=True, max_length=MAX_TOKENS,
                              return_tensors="pt")
            logits = model(batch["input_ids"], batch["attention_mask"])
            total += float(loss_fn(logits, torch.tensor([labels])))
            count += 1
    return total / count


def finetune(
    training_path: str | Path,
    base_model_path: str,
    out_dir: str | Path,
    config: TrainingConfig | None = None,
) -> dict:
    """Train and save a checkpoint; returns the metrics log (also written)."""
    config = config or TrainingConfig()
    records = load_training_records(training_path)

    rng = random.Random(config.seed)
    torch.manual_seed(config.seed)
    shuffled = records[:]
    rng.shuffle(shuffled)
    split = max(1, int(len(shuffled) * config.train_fraction))
    train_set, val_set = shuffled[:split], shuffled[split:]

    tokenizer = AutoTokenizer.from_pretrained(base_model_path)
    base = AutoModel.from_pretrained(base_model_path)
    model = SentimentClassifier(base, dropout=config.dropout)
    loss_fn = nn.BCEWithLogitsLoss()
    optimizer = torch.optim.Adam(model.parameters(), lr=config.learning_rate)

    initial_loss = _eval_loss(model, tokenizer, train_set, loss_fn)
    epoch_losses = []
    for _ in range(config.epochs):
        model.train()
        total, count = 0.0, 0
        for batch_records in _batches(train_set, config.batch_size):
            texts = [t for t, _ in batch_records]
            targets = torch.tensor([l for _, l in batch_records])
            batch = tokenizer(texts, padding=True, truncation=True,
                              max_length=MAX_TOKENS, return_tensors="pt")
            optimizer.zero_grad()
            logits = model(batch["input_ids"], batch["attention_mask"])
            loss = loss_fn(logits, targets)
            loss.backward()
            optimizer.step()
            total += float(loss.detach())
            count += 1
        epoch_losses.append(total / count)
    final_loss = _eval_loss(model, tokenizer, train_set, loss_fn)
    val_loss = _eval_loss(model, tokenizer, val_set, loss_fn) if val_set else None

    out = Path(out_dir)
    save_checkpoint(out, model, base_model_path,
                    model_name=f"finetuned:{Path(base_model_path).name}",
                    dropout=config.dropout)
    metrics = {
        "config": asdict(config),
        "n_records": len(records),
        "n_train": len(train_set),
        "n_val": len(val_set),
        "initial_loss": initial_loss,
        "epoch_losses": epoch_losses,
        "final_loss": final_loss,
        "val_loss": val_loss,
    }
    (out / "metrics.json").write_text(json.dumps(metrics, indent=2) + "\n",
                                      encoding="utf-8")
    return metrics


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--train", required=True, help="JSONL training file")
    parser.add_argument("--base-model", required=True, help="pretrained model path/name")
    parser.add_argument("--out", required=True, help="checkpoint output directory")
    parser.add_argument("--learning-rate", type=float, default=1e-5)
    parser.add_argument("--epochs", type=int, default=4)
    parser.add_argument("--batch-size", type=int, default=1)
    parser.add_argument("--dropout", type=float, default=0.3)
    parser.add_argument("--train-fraction", type=float, default=0.9)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()
    config = TrainingConfig(
        learning_rate=args.learning_rate,
        epochs=args.epochs,
        batch_size=args.batch_size,
        dropout=args.dropout,
        train_fraction=args.train_fraction,
        seed=args.seed,
    )
    metrics = finetune(args.train, args.base_model, args.out, config)
    print(json.dumps(metrics, indent=2))


if __name__ == "__main__":
    main()
