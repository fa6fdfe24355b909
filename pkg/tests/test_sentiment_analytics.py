import itertools
import random

import numpy as np
import pytest

from parallelverse.corpus import ParallelCorpus, Verse, VerseKey
from parallelverse.errors import EmptyChapter, UnknownSpeaker
from parallelverse.providers import SENTIMENT_LABELS
from parallelverse.sentiment_analytics import (
    DEFAULT_POLARITY_WEIGHTS,
    chapter_jaccard,
    cooccurrence,
    jaccard,
    mean_of_chapter_means,
    polarity,
    sentiment_counts,
    speaker_polarity_series,
)

# Published per-chapter agreement values for the three translation pairs
# (chapters 3, 5, 7, 8, 9, 10, 11, 12, 15, 16, 17).
JACCARD_COLUMNS = {
    "easwaran_gandhi": [0.604, 0.568, 0.559, 0.547, 0.501, 0.523, 0.507,
                        0.500, 0.494, 0.500, 0.510],
    "purohit_easwaran": [0.506, 0.520, 0.486, 0.503, 0.486, 0.507, 0.488,
                         0.483, 0.490, 0.495, 0.501],
    "gandhi_purohit": [0.684, 0.614, 0.574, 0.568, 0.565, 0.562, 0.527,
                       0.518, 0.516, 0.527, 0.536],
}


class TestJaccard:
    def test_identical_sets(self):
        assert jaccard({"optimistic", "sad"}, {"sad", "optimistic"}) == 1.0

    def test_disjoint_sets(self):
        assert jaccard({"optimistic"}, {"sad"}) == 0.0

    def test_partial_overlap(self):
        assert jaccard({"optimistic", "annoyed"}, {"annoyed", "surprise"}) == pytest.approx(1 / 3)

    def test_both_empty_defaults_to_one(self):
        assert jaccard(set(), set()) == 1.0

    def test_empty_empty_knob(self):
        assert jaccard(set(), set(), empty_empty=0.0) == 0.0

    def test_properties_randomized(self):
        rng = random.Random(1)
        for _ in range(1000):
            a = {l for l in SENTIMENT_LABELS if rng.random() < 0.4}
            b = {l for l in SENTIMENT_LABELS if rng.random() < 0.4}
            j = jaccard(a, b)
            assert 0.0 <= j <= 1.0
            assert j == jaccard(b, a)
            assert jaccard(a, a) == 1.0


class TestChapterJaccard:
    def test_published_averages(self):
        means = {k: mean_of_chapter_means(v) for k, v in JACCARD_COLUMNS.items()}
        assert means["gandhi_purohit"] == pytest.approx(0.563, abs=1e-3)
        assert means["purohit_easwaran"] == pytest.approx(0.497, abs=1e-3)
        # the published Average for this column is 0.526; recomputing from
        # the published chapter values gives 0.5285
        assert means["easwaran_gandhi"] == pytest.approx(0.5285, abs=1e-3)

    def test_identical_label_sets_mean_one(self):
        corpus = ParallelCorpus([
            Verse(VerseKey(t, 1, v), f"{t}{v}") for t in ("a", "b") for v in (1, 2)
        ])
        predictions = {VerseKey(t, 1, v): frozenset({"optimistic"})
                       for t in ("a", "b") for v in (1, 2)}
        rows, grand = chapter_jaccard(corpus, ("a", "b"), predictions)
        assert rows[0].mean == 1.0
        assert grand == 1.0

    def test_two_verse_mean(self):
        corpus = ParallelCorpus([
            Verse(VerseKey(t, 1, v), f"{t}{v}") for t in ("a", "b") for v in (1, 2)
        ])
        predictions = {
            VerseKey("a", 1, 1): frozenset({"sad"}), VerseKey("b", 1, 1): frozenset({"sad"}),
            VerseKey("a", 1, 2): frozenset({"sad"}), VerseKey("b", 1, 2): frozenset({"joking"}),
        }
        rows, grand = chapter_jaccard(corpus, ("a", "b"), predictions)
        assert rows[0].mean == pytest.approx(0.5)

    def test_grand_mean_unweighted(self):
        verses = []
        predictions = {}
        # chapter 1 has 1 aligned verse, chapter 2 has 3: the grand mean must
        # weight chapters equally, not by verse count
        for ch, n in ((1, 1), (2, 3)):
            for v in range(1, n + 1):
                for t in ("a", "b"):
                    verses.append(Verse(VerseKey(t, ch, v), f"{t}{ch}{v}"))
        corpus = ParallelCorpus(verses)
        for v in range(1, 2):
            predictions[VerseKey("a", 1, v)] = frozenset({"sad"})
            predictions[VerseKey("b", 1, v)] = frozenset({"sad"})
        for v in range(1, 4):
            predictions[VerseKey("a", 2, v)] = frozenset({"sad"})
            predictions[VerseKey("b", 2, v)] = frozenset({"joking"})
        rows, grand = chapter_jaccard(corpus, ("a", "b"), predictions)
        assert grand == pytest.approx((1.0 + 0.0) / 2)

    def test_no_predictions_raises(self):
        corpus = ParallelCorpus([Verse(VerseKey(t, 1, 1), t) for t in ("a", "b")])
        with pytest.raises(EmptyChapter):
            chapter_jaccard(corpus, ("a", "b"), {})


class TestCounts:
    def test_multilabel_verse(self):
        counts = sentiment_counts([{"optimistic", "annoyed"}])
        assert counts["optimistic"] == 1
        assert counts["annoyed"] == 1
        assert counts["sad"] == 0

    def test_empty_list(self):
        counts = sentiment_counts([])
        assert all(v == 0 for v in counts.values())

    def test_matches_naive_oracle(self):
        rng = random.Random(2)
        sets = [{l for l in SENTIMENT_LABELS if rng.random() < 0.3} for _ in range(10)]
        counts = sentiment_counts(sets)
        for label in SENTIMENT_LABELS:
            assert counts[label] == sum(1 for s in sets if label in s)


def idx(label):
    return SENTIMENT_LABELS.index(label)


class TestCooccurrence:
    def test_single_label_verse(self):
        m = cooccurrence([{"optimistic"}])
        assert m[idx("optimistic")][idx("optimistic")] == 1
        assert m.sum() == 1

    def test_hand_enumerated(self):
        m = cooccurrence([{"optimistic", "annoyed"}, {"optimistic"}])
        o, a = idx("optimistic"), idx("annoyed")
        assert m[o][o] == 2
        assert m[o][a] == m[a][o] == 1
        assert m[a][a] == 1

    def test_invariants_randomized(self):
        rng = random.Random(3)
        for _ in range(1000):
            sets = [{l for l in SENTIMENT_LABELS if rng.random() < 0.3}
                    for _ in range(rng.randint(0, 6))]
            m = cooccurrence(sets)
            assert np.array_equal(m, m.T)
            assert (m >= 0).all()
            assert np.trace(m) == sum(len(s) for s in sets)
            for i in range(10):
                for j in range(10):
                    assert m[i][j] <= min(m[i][i], m[j][j])


class TestPolarity:
    def test_mixed_labels_cancel(self):
        assert polarity({"optimistic", "annoyed"}) == 0

    def test_negative_with_neutral(self):
        assert polarity({"pessimistic", "sad", "surprise"}) == -2

    def test_exhaustive_bounds(self):
        for r in range(11):
            for subset in itertools.combinations(SENTIMENT_LABELS, r):
                p = polarity(set(subset))
                assert -5 <= p <= 3

    def test_custom_weights(self):
        weights = dict(DEFAULT_POLARITY_WEIGHTS, joking=0.5)
        assert polarity({"joking"}, weights) == 0.5

    def test_incomplete_weights_rejected(self):
        with pytest.raises(ValueError):
            polarity({"sad"}, {"sad": -1})


class TestSpeakerSeries:
    def test_absent_chapters_score_zero(self, speaker_corpus):
        predictions = {
            v.key: frozenset({"optimistic"})
            for v in speaker_corpus
        }
        series = speaker_polarity_series(speaker_corpus, "alpha", "arjuna", predictions)
        by_chapter = {row.chapter: row for row in series}
        for ch in (7, 9, 13, 15, 16):
            assert by_chapter[ch].polarity_sum == 0
            assert by_chapter[ch].polarity_mean == 0.0
            assert by_chapter[ch].n_verses == 0
        assert by_chapter[1].polarity_sum == 1

    def test_chapter_sum_is_raw_sum(self):
        corpus = ParallelCorpus([
            Verse(VerseKey("a", 1, 1), "x", speaker="arjuna"),
            Verse(VerseKey("a", 1, 2), "y", speaker="arjuna"),
        ])
        predictions = {
            VerseKey("a", 1, 1): frozenset({"optimistic", "thankful"}),
            VerseKey("a", 1, 2): frozenset({"sad"}),
        }
        series = speaker_polarity_series(corpus, "a", "arjuna", predictions)
        assert series[0].polarity_sum == 1  # +2 - 1
        assert series[0].polarity_mean == pytest.approx(0.5)

    def test_unknown_speaker(self, speaker_corpus):
        with pytest.raises(UnknownSpeaker):
            speaker_polarity_series(speaker_corpus, "alpha", "vader", {})
