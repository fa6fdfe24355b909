import json

import pytest

from parallelverse.corpus import ParallelCorpus, Verse, VerseKey


def make_verse(t, c, v, text, speaker=None):
    return Verse(key=VerseKey(t, c, v), text=text, speaker=speaker)


@pytest.fixture
def small_corpus():
    verses = []
    texts = {
        "alpha": ["the lord spoke of duty", "arjuna asked about action",
                  "devotion and worship bring peace", "pleasure and pain are the same"],
        "beta": ["the lord talked of duty", "arjuna questioned action",
                 "devotion and worship grant peace", "pleasure and pain are alike"],
    }
    for tid, lines in texts.items():
        for i, line in enumerate(lines, 1):
            verses.append(make_verse(tid, 1, i, line))
    return ParallelCorpus(verses)


@pytest.fixture
def speaker_corpus():
    # Arjuna speaks in chapters 1-6, 8, 10-12, 14, 17, 18 but not {7,9,13,15,16}
    verses = []
    arjuna_chapters = {1, 2, 3, 4, 5, 6, 8, 10, 11, 12, 14, 17, 18}
    for ch in range(1, 19):
        verses.append(make_verse("alpha", ch, 1, f"krishna teaches in chapter {ch}", "krishna"))
        if ch in arjuna_chapters:
            verses.append(make_verse("alpha", ch, 2, f"arjuna asks in chapter {ch}", "arjuna"))
    return ParallelCorpus(verses)


def corpus_jsonl(corpus):
    lines = []
    for v in corpus:
        obj = {"translation": v.key.translation_id, "chapter": v.key.chapter,
               "verse": v.key.verse, "text": v.text}
        if v.speaker:
            obj["speaker"] = v.speaker
        lines.append(json.dumps(obj))
    return "\n".join(lines) + "\n"
