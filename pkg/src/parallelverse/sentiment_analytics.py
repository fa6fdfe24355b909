"""Label-set analytics: agreement, distributions, co-occurrence, polarity."""

from __future__ import annotations

from collections.abc import Set
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .corpus import ParallelCorpus, VerseKey, aligned_pairs, verses_by_speaker
from .errors import EmptyChapter, UnknownSpeaker
from .providers import SENTIMENT_LABELS

# Default polarity weights: positive labels +1, negative -1, ambiguous 0.
DEFAULT_POLARITY_WEIGHTS: dict[str, int] = {
    "optimistic": 1,
    "thankful": 1,
    "empathetic": 1,
    "pessimistic": -1,
    "anxious": -1,
    "sad": -1,
    "annoyed": -1,
    "denial": -1,
    "surprise": 0,
    "joking": 0,
}


def jaccard(a: Set, b: Set, empty_empty: float = 1.0) -> float:
    """|a & b| / |a | b|. Two empty sets agree perfectly by default;

    the convention is contested, so the empty/empty value is a knob.
    """
    a, b = set(a), set(b)
    union = a | b
    if not union:
        return empty_empty
    return len(a & b) / len(union)


@dataclass(frozen=True)
class ChapterJaccard:
    chapter: int
    pair: tuple[str, str]
    mean: float
    n: int


def chapter_jaccard(
    corpus: ParallelCorpus,
    pair: tuple[str, str],
    predictions: Mapping[VerseKey, Set],
    empty_empty: float = 1.0,
) -> tuple[list[ChapterJaccard], float]:
    """Per-chapter mean verse-level Jaccard plus the unweighted grand mean.

    Only aligned verses with predictions on both sides contribute; chapters
    with no such verses are omitted from the report.
    """
    id_a, id_b = pair
    chapters = sorted(set(corpus.chapters(id_a)) & set(corpus.chapters(id_b)))
    rows = []
    for ch in chapters:
        values = []
        for va, vb in aligned_pairs(corpus, pair, ch):
            if va.key in predictions and vb.key in predictions:
                values.append(jaccard(predictions[va.key], predictions[vb.key], empty_empty))
        if values:
            rows.append(ChapterJaccard(chapter=ch, pair=pair, mean=sum(values) / len(values),
                                       n=len(values)))
    if not rows:
        raise EmptyChapter()
    grand_mean = sum(r.mean for r in rows) / len(rows)
    return rows, grand_mean


def mean_of_chapter_means(values: Iterable[float]) -> float:
    """Unweighted mean over reported chapters (the published Average row)."""
    values = list(values)
    if not values:
        raise EmptyChapter()
    return sum(values) / len(values)


def sentiment_counts(label_sets: Iterable[Set]) -> dict[str, int]:
    """Number of verses whose label set contains each label."""
    counts = {label: 0 for label in SENTIMENT_LABELS}
    for labels in label_sets:
        for label in labels:
            counts[label] += 1
    return counts


def cooccurrence(label_sets: Iterable[Set]) -> np.ndarray:
    """10x10 symmetric matrix; M[i][j] counts verses containing both labels,
    M[i][i] counts verses containing label i. Row/column order follows
    SENTIMENT_LABELS."""
    index = {label: i for i, label in enumerate(SENTIMENT_LABELS)}
    matrix = np.zeros((len(SENTIMENT_LABELS), len(SENTIMENT_LABELS)), dtype=np.int64)
    for labels in label_sets:
        idxs = sorted(index[l] for l in labels)
        for a in idxs:
            for b in idxs:
                matrix[a][b] += 1
    return matrix


def polarity(labels: Set, weights: Mapping[str, float] | None = None) -> float:
    """Signed sum of label weights over a verse's label set."""
    weights = weights if weights is not None else DEFAULT_POLARITY_WEIGHTS
    missing = set(SENTIMENT_LABELS) - set(weights)
    if missing:
        raise ValueError(f"weights missing labels: {sorted(missing)}")
    return sum(weights[l] for l in labels)


@dataclass(frozen=True)
class ChapterPolarity:
    chapter: int
    speaker: str
    polarity_sum: float
    polarity_mean: float
    n_verses: int


def speaker_polarity_series(
    corpus: ParallelCorpus,
    translation_id: str,
    speaker: str,
    predictions: Mapping[VerseKey, Set],
    weights: Mapping[str, float] | None = None,
) -> list[ChapterPolarity]:
    """Per-chapter polarity for one speaker's verses.

    A chapter where the speaker never speaks scores 0 (sum and mean).
    """
    speaker_verses = verses_by_speaker(corpus, translation_id, speaker)
    by_chapter: dict[int, list[float]] = {}
    for v in speaker_verses:
        if v.key in predictions:
            by_chapter.setdefault(v.key.chapter, []).append(
                polarity(predictions[v.key], weights)
            )
    series = []
    for ch in corpus.chapters(translation_id):
        values = by_chapter.get(ch, [])
        total = sum(values)
        series.append(ChapterPolarity(
            chapter=ch,
            speaker=speaker,
            polarity_sum=total,
            polarity_mean=total / len(values) if values else 0.0,
            n_verses=len(values),
        ))
    return series
