"""Chunked keyword extraction with MMR diversification.

Chapters are split into overlapping paragraphs so long texts fit the
encoder's input cap. Each paragraph yields diversity-filtered candidate
keywords; candidates are then re-scored across every paragraph of the
chapter and ranked by cumulative cosine similarity.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DimensionMismatch, EmptyChapter
from .providers import EmbeddingProvider
from .semantics import cosine
from .textstats import remove_stopwords, tokenize


@dataclass(frozen=True)
class ChunkingPolicy:
    paragraph_size: int = 15
    overlap: int = 3

    def __post_init__(self):
        if not (self.paragraph_size > self.overlap >= 0):
            raise ValueError(
                f"need paragraph_size > overlap >= 0, got ({self.paragraph_size}, {self.overlap})"
            )


@dataclass(frozen=True)
class Paragraph:
    chapter: int
    start: int  # 1-based inclusive verse index
    end: int
    text: str


@dataclass(frozen=True)
class MmrPolicy:
    diversity: float = 0.5
    candidates_per_paragraph: int = 20
    final_top_n: int = 10
    ngram_range: tuple[int, int] = (1, 1)

    def __post_init__(self):
        if not (0.0 <= self.diversity <= 1.0):
            raise ValueError(f"diversity must be in [0, 1], got {self.diversity}")


@dataclass(frozen=True)
class KeywordScore:
    phrase: str
    relevance: float  # cosine to the first paragraph that selected it
    cumulative: float


def chunk_chapter(
    verse_texts: Sequence[str],
    policy: ChunkingPolicy = ChunkingPolicy(),
    chapter: int = 1,
) -> list[Paragraph]:
    """Split a chapter into overlapping paragraphs.

    The first paragraph covers verses [1, size]; each subsequent one
    starts `overlap` verses before the previous end and runs for `size`
    verses, clamped to the last verse. 47 verses with (15, 3) yields
    [1-15], [13-27], [25-39], [37-47].
    """
    total = len(verse_texts)
    if total == 0:
        raise EmptyChapter(chapter)
    paragraphs = []
    start = 1
    while True:
        end = min(start + policy.paragraph_size - 1, total)
        text = " ".join(verse_texts[start - 1:end])
        paragraphs.append(Paragraph(chapter=chapter, start=start, end=end, text=text))
        if end >= total:
            break
        start = end - policy.overlap + 1
    return paragraphs


def extract_candidates(
    paragraph_text: str,
    stoplist: set[str],
    ngram_range: tuple[int, int] = (1, 1),
) -> list[str]:
    """Distinct candidate phrases from a paragraph, sorted lexicographically.

    Unigram candidates exclude stop words; longer phrases exclude those
    that start or end with a stop word.
    """
    tokens = tokenize(paragraph_text)
    candidates: set[str] = set()
    lo, hi = ngram_range
    for n in range(lo, hi + 1):
        if n == 1:
            candidates.update(remove_stopwords(tokens, stoplist))
            continue
        for i in range(len(tokens) - n + 1):
            gram = tokens[i:i + n]
            if gram[0] in stoplist or gram[-1] in stoplist:
                continue
            candidates.add(" ".join(gram))
    return sorted(candidates)


def mmr_select(
    doc_vec: np.ndarray,
    candidates: dict[str, np.ndarray],
    k: int,
    diversity: float,
) -> list[tuple[str, float]]:
    """Greedy maximal-marginal-relevance selection.

    The first pick maximizes cosine to the document; each later pick
    maximizes (1-d)*cos(c, doc) - d*max over selected of cos(c, s).
    Ties break lexicographically by phrase. Reported relevance is always
    the plain document cosine.
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    doc_vec = np.asarray(doc_vec, dtype=np.float64)
    for phrase, vec in candidates.items():
        if np.asarray(vec).shape != doc_vec.shape:
            raise DimensionMismatch(doc_vec.shape[0], np.asarray(vec).shape[0])
    relevance = {p: cosine(v, doc_vec) for p, v in candidates.items()}
    remaining = sorted(candidates)
    selected: list[tuple[str, float]] = []
    while remaining and len(selected) < k:
        if not selected:
            best = max(remaining, key=lambda p: (relevance[p], _lex(p)))
        else:
            def marginal(p: str) -> float:
                redundancy = max(cosine(candidates[p], candidates[s]) for s, _ in selected)
                return (1.0 - diversity) * relevance[p] - diversity * redundancy
            best = max(remaining, key=lambda p: (marginal(p), _lex(p)))
        selected.append((best, relevance[best]))
        remaining.remove(best)
    return selected


class _lex:
    """Reverses lexicographic order so max() prefers the smaller phrase on ties."""

    def __init__(self, phrase: str):
        self.phrase = phrase

    def __lt__(self, other: "_lex") -> bool:
        return self.phrase > other.phrase


def chapter_keywords(
    verse_texts: Sequence[str],
    provider: EmbeddingProvider,
    stoplist: set[str],
    chunking: ChunkingPolicy = ChunkingPolicy(),
    mmr: MmrPolicy = MmrPolicy(),
    chapter: int = 1,
    include_home_paragraph: bool = True,
) -> list[KeywordScore]:
    """Top keywords for one chapter by cumulative cross-paragraph score.

    Per paragraph: extract candidates, embed them alongside the paragraph,
    and keep the MMR-selected top candidates. The union of selections is
    then scored against every paragraph (optionally excluding each
    phrase's own selecting paragraphs) and ranked by the summed cosines.
    """
    paragraphs = chunk_chapter(verse_texts, chunking, chapter)
    para_vecs = provider.embed_batch([p.text for p in paragraphs])

    selected_in: dict[str, set[int]] = {}
    first_relevance: dict[str, float] = {}
    phrase_vecs: dict[str, np.ndarray] = {}
    for idx, (para, pvec) in enumerate(zip(paragraphs, para_vecs)):
        cands = extract_candidates(para.text, stoplist, mmr.ngram_range)
        if not cands:
            continue
        new = [c for c in cands if c not in phrase_vecs]
        for phrase, vec in zip(new, provider.embed_batch(new)):
            phrase_vecs[phrase] = vec
        cand_vecs = {c: phrase_vecs[c] for c in cands}
        for phrase, rel in mmr_select(pvec, cand_vecs, mmr.candidates_per_paragraph, mmr.diversity):
            selected_in.setdefault(phrase, set()).add(idx)
            first_relevance.setdefault(phrase, rel)

    scores = []
    for phrase in sorted(selected_in):
        cumulative = 0.0
        for idx, pvec in enumerate(para_vecs):
            if not include_home_paragraph and idx in selected_in[phrase]:
                continue
            cumulative += cosine(phrase_vecs[phrase], pvec)
        scores.append(KeywordScore(
            phrase=phrase, relevance=first_relevance[phrase], cumulative=cumulative
        ))
    scores.sort(key=lambda s: (-s.cumulative, s.phrase))
    return scores[:mmr.final_top_n]
