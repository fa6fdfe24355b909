"""Cosine-similarity analytics over aligned verse pairs and 2-D projection."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .corpus import ParallelCorpus, aligned_pairs
from .errors import DimensionMismatch, EmptyChapter, ExternalUnavailable
from .providers import EmbeddingProvider


@dataclass(frozen=True)
class PairSimilarity:
    chapter: int
    verse: int
    pair: tuple[str, str]
    score: float


@dataclass(frozen=True)
class ChapterSimilarityStats:
    chapter: int
    pair: tuple[str, str]
    mean: float
    std: float
    n: int


@dataclass(frozen=True)
class Projection2D:
    points: tuple[tuple[str, float, float], ...]
    method: str


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine similarity; defined as 0.0 when either vector is zero."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise DimensionMismatch(a.shape[0], b.shape[0])
    norm_a = float(np.linalg.norm(a))
    norm_b = float(np.linalg.norm(b))
    if norm_a == 0.0 or norm_b == 0.0:
        return 0.0
    return float(np.dot(a, b) / (norm_a * norm_b))


def verse_pair_similarities(
    corpus: ParallelCorpus,
    pair: tuple[str, str],
    provider: EmbeddingProvider,
    overrides: dict | None = None,
) -> list[PairSimilarity]:
    """One cosine score per aligned verse, ordered by (chapter, verse)."""
    id_a, id_b = pair
    results = []
    chapters = sorted(set(corpus.chapters(id_a)) & set(corpus.chapters(id_b)))
    for ch in chapters:
        pairs = aligned_pairs(corpus, pair, ch, overrides)
        texts_a = [va.text for va, _ in pairs]
        texts_b = [vb.text for _, vb in pairs]
        vecs_a = provider.embed_batch(texts_a)
        vecs_b = provider.embed_batch(texts_b)
        for (va, _), ea, eb in zip(pairs, vecs_a, vecs_b):
            results.append(PairSimilarity(
                chapter=ch, verse=va.key.verse, pair=pair, score=cosine(ea, eb)
            ))
    return results


def chapter_stats(similarities: Sequence[PairSimilarity]) -> list[ChapterSimilarityStats]:
    """Mean and sample standard deviation (n-1) per chapter.

    A single-score chapter has std 0 by convention.
    """
    if not similarities:
        raise EmptyChapter()
    by_chapter: dict[tuple[int, tuple[str, str]], list[float]] = {}
    for s in similarities:
        by_chapter.setdefault((s.chapter, s.pair), []).append(s.score)
    stats = []
    for (ch, pair), scores in sorted(by_chapter.items()):
        n = len(scores)
        mean = sum(scores) / n
        std = math.sqrt(sum((x - mean) ** 2 for x in scores) / (n - 1)) if n > 1 else 0.0
        stats.append(ChapterSimilarityStats(chapter=ch, pair=pair, mean=mean, std=std, n=n))
    return stats


def extremal_verses(
    similarities: Sequence[PairSimilarity],
    k: int,
    direction: str = "lowest",
) -> list[PairSimilarity]:
    """k lowest (or highest) scores; ties broken by (chapter, verse)."""
    if k < 0:
        raise ValueError("k must be >= 0")
    if direction not in ("lowest", "highest"):
        raise ValueError(f"direction must be lowest|highest, got {direction!r}")
    sign = 1.0 if direction == "lowest" else -1.0
    ordered = sorted(similarities, key=lambda s: (sign * s.score, s.chapter, s.verse))
    return ordered[:k]


def project_2d(
    vectors: Sequence[np.ndarray],
    labels: Sequence[str] | None = None,
    method: str = "pca_reference",
    external=None,
) -> Projection2D:
    """Project embeddings to 2-D.

    pca_reference centers the data and projects onto the top-2 principal
    components with a fixed sign convention (first nonzero loading of each
    component is positive). ``external`` delegates to a callable sidecar
    hook when one is configured.
    """
    if len(vectors) == 0:
        raise ValueError("need at least one vector")
    if labels is None:
        labels = [str(i) for i in range(len(vectors))]
    if method == "external":
        if external is None:
            raise ExternalUnavailable("no external projection configured")
        coords = external(vectors)
        return Projection2D(
            points=tuple((l, float(x), float(y)) for l, (x, y) in zip(labels, coords)),
            method="external",
        )
    if method != "pca_reference":
        raise ValueError(f"unknown projection method {method!r}")

    X = np.asarray(vectors, dtype=np.float64)
    Xc = X - X.mean(axis=0, keepdims=True)
    # SVD of the centered matrix; right singular vectors are the components
    _, _, vt = np.linalg.svd(Xc, full_matrices=False)
    dim = X.shape[1]
    comps = np.zeros((2, dim))
    comps[: min(2, vt.shape[0])] = vt[:2]
    for i in range(2):
        nonzero = np.nonzero(np.abs(comps[i]) > 1e-12)[0]
        if len(nonzero) and comps[i][nonzero[0]] < 0:
            comps[i] = -comps[i]
    coords = Xc @ comps.T
    return Projection2D(
        points=tuple((l, float(x), float(y)) for l, (x, y) in zip(labels, coords)),
        method="pca_reference",
    )
