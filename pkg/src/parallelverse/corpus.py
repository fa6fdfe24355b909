"""Verse-aligned parallel corpus: parsing, validation, and alignment.

A corpus holds one or more translations of the same source text keyed by
(translation, chapter, verse). It is immutable after construction and is
the substrate every downstream analysis consumes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import IO, Iterable, Iterator

from .errors import DuplicateVerse, MalformedRecord, UnknownSpeaker, UnknownTranslation

SPEAKERS = ("arjuna", "krishna", "sanjaya", "dhritarashtra", "narrator")


@dataclass(frozen=True, order=True)
class VerseKey:
    translation_id: str
    chapter: int
    verse: int

    def __post_init__(self):
        if self.chapter < 1 or self.verse < 1:
            raise ValueError(f"chapter and verse must be >= 1, got {self}")


@dataclass(frozen=True)
class Verse:
    key: VerseKey
    text: str
    speaker: str | None = None

    def __post_init__(self):
        if "\n" in self.text or "\r" in self.text:
            raise ValueError(f"verse text must be single-line: {self.key}")
        if self.speaker is not None and self.speaker not in SPEAKERS:
            raise UnknownSpeaker(self.speaker)


@dataclass(frozen=True)
class TranslationInfo:
    id: str
    name: str = ""
    year: int | None = None


@dataclass(frozen=True)
class ChapterAlignment:
    chapter: int
    count_a: int
    count_b: int
    aligned_pairs: int
    unmatched: tuple[int, ...]


@dataclass(frozen=True)
class AlignmentReport:
    pair: tuple[str, str]
    chapters: tuple[ChapterAlignment, ...]

    @property
    def total_aligned(self) -> int:
        return sum(c.aligned_pairs for c in self.chapters)


class ParallelCorpus:
    """Immutable container of verses across translations."""

    def __init__(self, verses: Iterable[Verse], translations: Iterable[TranslationInfo] = ()):
        by_key: dict[VerseKey, Verse] = {}
        for v in verses:
            if v.key in by_key:
                raise DuplicateVerse(v.key)
            by_key[v.key] = v
        infos = {t.id: t for t in translations}
        for key in by_key:
            infos.setdefault(key.translation_id, TranslationInfo(id=key.translation_id))
        self._verses = dict(sorted(by_key.items()))
        self._translations = dict(sorted(infos.items()))
        self._chapter_counts: dict[str, dict[int, int]] = {}
        for key in self._verses:
            per = self._chapter_counts.setdefault(key.translation_id, {})
            per[key.chapter] = per.get(key.chapter, 0) + 1
        for tid, per in self._chapter_counts.items():
            chapters = sorted(per)
            # gap-free run; single-chapter extracts (e.g. one chapter of a
            # larger text) are valid corpora
            if chapters and chapters != list(range(chapters[0], chapters[-1] + 1)):
                raise MalformedRecord(0, f"chapters of {tid!r} have gaps: {chapters}")

    @property
    def translations(self) -> dict[str, TranslationInfo]:
        return dict(self._translations)

    @property
    def translation_ids(self) -> list[str]:
        return list(self._translations)

    def __len__(self) -> int:
        return len(self._verses)

    def __iter__(self) -> Iterator[Verse]:
        return iter(self._verses.values())

    def __contains__(self, key: VerseKey) -> bool:
        return key in self._verses

    def get(self, key: VerseKey) -> Verse | None:
        return self._verses.get(key)

    def chapters(self, translation_id: str) -> list[int]:
        self._require(translation_id)
        return sorted(self._chapter_counts.get(translation_id, {}))

    def verse_count(self, translation_id: str, chapter: int) -> int:
        self._require(translation_id)
        return self._chapter_counts.get(translation_id, {}).get(chapter, 0)

    def verses_of(self, translation_id: str, chapter: int | None = None) -> list[Verse]:
        self._require(translation_id)
        return [
            v for v in self._verses.values()
            if v.key.translation_id == translation_id
            and (chapter is None or v.key.chapter == chapter)
        ]

    def _require(self, translation_id: str) -> None:
        if translation_id not in self._translations:
            raise UnknownTranslation(translation_id)


def parse_corpus(
    source: IO[str] | Iterable[str],
    translations: Iterable[TranslationInfo] = (),
) -> ParallelCorpus:
    """Parse a JSON Lines verse stream into a corpus.

    Each line is an object with translation/chapter/verse/text and an
    optional speaker. Unknown fields are ignored. Records marked
    ``"kind": "commentary"`` are structural commentary and are dropped.
    """
    verses = []
    seen: set[VerseKey] = set()
    for line_no, line in enumerate(source, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise MalformedRecord(line_no, f"invalid JSON: {exc}") from exc
        if not isinstance(obj, dict):
            raise MalformedRecord(line_no, "record is not an object")
        if obj.get("kind") == "commentary":
            continue
        try:
            key = VerseKey(str(obj["translation"]), int(obj["chapter"]), int(obj["verse"]))
            verse = Verse(key=key, text=str(obj["text"]), speaker=obj.get("speaker"))
        except DuplicateVerse:
            raise
        except (KeyError, TypeError, ValueError, UnknownSpeaker) as exc:
            raise MalformedRecord(line_no, str(exc)) from exc
        if key in seen:
            raise DuplicateVerse(key)
        seen.add(key)
        verses.append(verse)
    return ParallelCorpus(verses, translations)


def serialize_corpus(corpus: ParallelCorpus) -> str:
    """Serialize to the same JSON Lines format `parse_corpus` accepts."""
    lines = []
    for v in corpus:
        obj = {
            "translation": v.key.translation_id,
            "chapter": v.key.chapter,
            "verse": v.key.verse,
            "text": v.text,
        }
        if v.speaker is not None:
            obj["speaker"] = v.speaker
        lines.append(json.dumps(obj, ensure_ascii=False))
    return "\n".join(lines) + ("\n" if lines else "")


def load_translation_descriptors(source: IO[str] | str) -> list[TranslationInfo]:
    """Load a JSON array of {id, name, year} descriptors."""
    data = json.loads(source.read() if hasattr(source, "read") else source)
    return [TranslationInfo(id=d["id"], name=d.get("name", ""), year=d.get("year")) for d in data]


def load_alignment_overrides(source: IO[str] | Iterable[str]) -> dict[tuple[str, str, int, int], int]:
    """Load explicit verse-index overrides for a translation pair.

    Returns a map (id_a, id_b, chapter, verse_a) -> verse_b. Overrides are
    stored directionally for the pair order given in the file.
    """
    overrides: dict[tuple[str, str, int, int], int] = {}
    for line_no, line in enumerate(source, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
            id_a, id_b = obj["pair"]
            overrides[(id_a, id_b, int(obj["chapter"]), int(obj["verse_a"]))] = int(obj["verse_b"])
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise MalformedRecord(line_no, str(exc)) from exc
    return overrides


def aligned_pairs(
    corpus: ParallelCorpus,
    pair: tuple[str, str],
    chapter: int,
    overrides: dict[tuple[str, str, int, int], int] | None = None,
) -> list[tuple[Verse, Verse]]:
    """Aligned (verse_a, verse_b) pairs for one chapter, index-based.

    Verses align when both translations have the same (chapter, verse)
    index, unless an explicit override remaps the index.
    """
    id_a, id_b = pair
    pairs = []
    count_a = corpus.verse_count(id_a, chapter)
    for verse_idx in range(1, count_a + 1):
        key_a = VerseKey(id_a, chapter, verse_idx)
        verse_a = corpus.get(key_a)
        if verse_a is None:
            continue
        verse_b_idx = verse_idx
        if overrides:
            verse_b_idx = overrides.get((id_a, id_b, chapter, verse_idx), verse_idx)
        verse_b = corpus.get(VerseKey(id_b, chapter, verse_b_idx))
        if verse_b is not None:
            pairs.append((verse_a, verse_b))
    return pairs


def validate_alignment(corpus: ParallelCorpus, pair: tuple[str, str]) -> AlignmentReport:
    """Per-chapter alignment report for a translation pair (index-based)."""
    id_a, id_b = pair
    corpus._require(id_a)
    corpus._require(id_b)
    chapters = sorted(set(corpus.chapters(id_a)) | set(corpus.chapters(id_b)))
    rows = []
    for ch in chapters:
        count_a = corpus.verse_count(id_a, ch)
        count_b = corpus.verse_count(id_b, ch)
        aligned = min(count_a, count_b)
        unmatched = tuple(range(aligned + 1, max(count_a, count_b) + 1))
        rows.append(ChapterAlignment(ch, count_a, count_b, aligned, unmatched))
    return AlignmentReport(pair=(id_a, id_b), chapters=tuple(rows))


def verses_by_speaker(corpus: ParallelCorpus, translation_id: str, speaker: str) -> list[Verse]:
    """Verses attributed to a speaker, in (chapter, verse) order."""
    if speaker not in SPEAKERS:
        raise UnknownSpeaker(speaker)
    return [v for v in corpus.verses_of(translation_id) if v.speaker == speaker]
