import json

import pytest
import torch
from transformers import AutoModel, BertConfig, BertModel, BertTokenizerFast

from model_server.classifier import SentimentClassifier, save_checkpoint

SPECIAL_TOKENS = ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"]
WORDS = [f"w{i}" for i in range(600)]


@pytest.fixture(scope="session")
def tiny_model_dir(tmp_path_factory):
    """A small random-weight encoder saved to disk, loadable offline.

    Whole words are vocabulary entries, so one input word == one token and
    token budgets translate directly to word counts in tests.
    """
    path = tmp_path_factory.mktemp("tiny-encoder")
    vocab = SPECIAL_TOKENS + WORDS
    (path / "vocab.txt").write_text("\n".join(vocab) + "\n", encoding="utf-8")
    tokenizer = BertTokenizerFast(vocab_file=str(path / "vocab.txt"), do_lower_case=True)
    tokenizer.save_pretrained(path)
    torch.manual_seed(0)
    config = BertConfig(
        vocab_size=len(vocab),
        hidden_size=32,
        num_hidden_layers=2,
        num_attention_heads=2,
        intermediate_size=64,
        max_position_embeddings=512,
    )
    BertModel(config).save_pretrained(path)
    return str(path)


@pytest.fixture(scope="session")
def zero_head_checkpoint(tmp_path_factory, tiny_model_dir):
    """Classifier checkpoint whose head weights are all zero (sigmoid -> 0.5)."""
    path = tmp_path_factory.mktemp("zero-checkpoint")
    base = AutoModel.from_pretrained(tiny_model_dir)
    model = SentimentClassifier(base, dropout=0.3)
    with torch.no_grad():
        model.head.weight.zero_()
        model.head.bias.zero_()
    save_checkpoint(path, model, tiny_model_dir, model_name="zero-head", dropout=0.3)
    return str(path)


def write_training_file(path, records):
    path.write_text(
        "\n".join(json.dumps(r) for r in records) + "\n", encoding="utf-8"
    )
    return path
