"""Tokenization, stop-word filtering, and n-gram frequency tables."""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass
from importlib import resources
from typing import IO, Iterable, Sequence

from .corpus import ParallelCorpus

_TOKEN_RE = re.compile(r"[a-z]+")

DEFAULT_STOPLIST_ID = "en-basic-v1"


def tokenize(text: str) -> list[str]:
    """Split on non-alphabetic characters and lowercase.

    Hyphenated or apostrophed words split into their alphabetic parts
    ("self-restrained" -> ["self", "restrained"]).
    """
    return _TOKEN_RE.findall(text.lower())


def remove_stopwords(tokens: Iterable[str], stoplist: set[str]) -> list[str]:
    """Order-preserving stop-word filter. The stoplist must be lowercase."""
    return [t for t in tokens if t not in stoplist]


def load_stopwords(source: IO[str] | str | None = None) -> set[str]:
    """Load a newline-delimited stop-word list; defaults to the shipped one."""
    if source is None:
        text = resources.files("parallelverse.data").joinpath("stopwords_en.txt").read_text("utf-8")
    else:
        text = source.read() if hasattr(source, "read") else source
    return {line.strip() for line in text.splitlines() if line.strip()}


@dataclass
class NgramTable:
    n: int
    counts: Counter
    total: int

    def __add__(self, other: "NgramTable") -> "NgramTable":
        if self.n != other.n:
            raise ValueError(f"cannot merge n={self.n} with n={other.n}")
        return NgramTable(self.n, self.counts + other.counts, self.total + other.total)


def ngrams(token_groups: Iterable[Sequence[str]], n: int) -> NgramTable:
    """Count n-grams with a sliding window inside each group.

    Groups are verse token lists; windows never cross group boundaries.
    A group shorter than n contributes nothing.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    counts: Counter = Counter()
    for tokens in token_groups:
        for i in range(len(tokens) - n + 1):
            counts[tuple(tokens[i:i + n])] += 1
    return NgramTable(n=n, counts=counts, total=sum(counts.values()))


def top_k(table: NgramTable, k: int) -> list[tuple[tuple[str, ...], int]]:
    """Top k entries by count descending, ties by tuple ascending."""
    if k < 0:
        raise ValueError("k must be >= 0")
    ordered = sorted(table.counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return ordered[:k]


def corpus_ngrams(
    corpus: ParallelCorpus,
    translation_id: str,
    n: int,
    stoplist: set[str] | None = None,
) -> NgramTable:
    """N-gram table over one translation, stop words removed per verse."""
    stoplist = stoplist if stoplist is not None else set()
    groups = [
        remove_stopwords(tokenize(v.text), stoplist)
        for v in corpus.verses_of(translation_id)
    ]
    return ngrams(groups, n)
