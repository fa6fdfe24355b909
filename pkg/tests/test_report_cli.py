import json
import random
from pathlib import Path

import pytest
from click.testing import CliRunner

from parallelverse.cli import main
from parallelverse.corpus import parse_corpus
from parallelverse.errors import ConfigError
from parallelverse.normalize import default_rules, normalize_corpus
from parallelverse.providers import (
    SENTIMENT_LABELS,
    save_precomputed_sentiments,
    text_key,
)
from parallelverse.report import (
    PipelineConfig,
    emit,
    make_embedding_provider,
    run_pipeline,
)

SPEAKER_CYCLE = ("arjuna", "krishna", "sanjaya")
VOCAB = ("devotion", "action", "yoga", "battle", "spirit", "mind", "thou",
         "thy", "peace", "wisdom", "doubt", "faith", "art", "self", "world")


def build_corpus_file(path: Path, translations=("gold", "plain"), chapters=(1, 2),
                      verses_per_chapter=6, seed=42) -> Path:
    rng = random.Random(seed)
    lines = []
    for tid in translations:
        for ch in chapters:
            for v in range(1, verses_per_chapter + 1):
                words = [rng.choice(VOCAB) for _ in range(8)]
                lines.append(json.dumps({
                    "translation": tid,
                    "chapter": ch,
                    "verse": v,
                    "text": " ".join(words),
                    "speaker": SPEAKER_CYCLE[v % 3],
                }))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def build_sentiment_file(corpus_path: Path, out_path: Path, seed=7) -> Path:
    """Precomputed scores keyed by the normalized text of every verse."""
    rng = random.Random(seed)
    with open(corpus_path, encoding="utf-8") as fh:
        corpus = parse_corpus(fh)
    normalized, _ = normalize_corpus(corpus, default_rules())
    scores = {}
    for v in normalized:
        scores[text_key(v.text)] = {
            label: round(rng.random(), 4) for label in SENTIMENT_LABELS
        }
    save_precomputed_sentiments(out_path, scores, model="fixture-sentiment")
    return out_path


@pytest.fixture
def corpus_file(tmp_path):
    return build_corpus_file(tmp_path / "corpus.jsonl")


@pytest.fixture
def sentiment_file(tmp_path, corpus_file):
    return build_sentiment_file(corpus_file, tmp_path / "sentiments.jsonl")


def bundle_config(corpus_file, out_dir, sentiment_file=None, **overrides):
    kwargs = dict(
        corpus_path=str(corpus_file),
        provider="reference:64",
        out_dir=str(out_dir),
    )
    if sentiment_file is not None:
        kwargs["sentiment_provider"] = f"precomputed:{sentiment_file}"
    kwargs.update(overrides)
    return PipelineConfig(**kwargs)


def read_tree(out_dir: Path) -> dict[str, bytes]:
    return {p.name: p.read_bytes() for p in sorted(out_dir.iterdir())}


class TestPipeline:
    def test_bundle_covers_every_stage(self, tmp_path, corpus_file, sentiment_file):
        config = bundle_config(corpus_file, tmp_path / "out", sentiment_file)
        bundle = run_pipeline(config)
        assert bundle.manifest["verse_count"] == 24
        assert bundle.manifest["translations"] == ["gold", "plain"]
        assert "gold__plain" in bundle.verse_similarity
        assert len(bundle.verse_similarity["gold__plain"]) == 12
        assert "gold:1" in bundle.keyword_tables
        assert "gold__plain" in bundle.jaccard_tables
        assert set(bundle.sentiment_count_tables) == {"gold", "plain"}
        assert "gold:arjuna" in bundle.polarity_tables
        assert bundle.projection

    def test_emit_writes_csv_and_json(self, tmp_path, corpus_file, sentiment_file):
        out = tmp_path / "out"
        config = bundle_config(corpus_file, out, sentiment_file)
        written = emit(run_pipeline(config), out, config.formats)
        names = {p.name for p in written}
        assert "report.json" in names
        assert "manifest.json" in names
        assert "normalization.csv" in names
        assert "similarity_verses_gold__plain.csv" in names
        assert "jaccard_gold__plain.csv" in names
        assert "embeddings_cache.jsonl" in names
        assert "sentiments_cache.jsonl" in names
        report = json.loads((out / "report.json").read_text())
        assert "generated_at" not in report["manifest"]
        manifest = json.loads((out / "manifest.json").read_text())
        assert "generated_at" in manifest

    def test_two_runs_byte_identical_modulo_timestamp(self, tmp_path, corpus_file,
                                                      sentiment_file):
        trees = []
        for name in ("run_a", "run_b"):
            out = tmp_path / name
            config = bundle_config(corpus_file, out, sentiment_file)
            emit(run_pipeline(config), out, config.formats)
            tree = read_tree(out)
            manifest = json.loads(tree.pop("manifest.json"))
            manifest.pop("generated_at")
            tree["manifest.json"] = json.dumps(manifest, sort_keys=True).encode()
            trees.append(tree)
        assert trees[0] == trees[1]

    def test_reemitting_from_cached_embeddings_matches(self, tmp_path, corpus_file,
                                                       sentiment_file):
        out1 = tmp_path / "first"
        config1 = bundle_config(corpus_file, out1, sentiment_file)
        emit(run_pipeline(config1), out1, config1.formats)
        out2 = tmp_path / "second"
        config2 = bundle_config(
            corpus_file, out2, sentiment_file,
            provider=f"precomputed:{out1 / 'embeddings_cache.jsonl'}",
        )
        emit(run_pipeline(config2), out2, config2.formats)
        r1 = json.loads((out1 / "report.json").read_text())
        r2 = json.loads((out2 / "report.json").read_text())
        for section in ("verse_similarity", "chapter_similarity", "keyword_tables",
                        "jaccard_tables", "projection"):
            assert r1[section] == r2[section]

    def test_empty_corpus_produces_empty_bundle(self, tmp_path):
        corpus = tmp_path / "empty.jsonl"
        corpus.write_text("", encoding="utf-8")
        config = bundle_config(corpus, tmp_path / "out")
        bundle = run_pipeline(config)
        assert bundle.manifest["verse_count"] == 0
        assert bundle.verse_similarity == {}
        assert bundle.keyword_tables == {}

    def test_without_sentiment_provider(self, tmp_path, corpus_file):
        config = bundle_config(corpus_file, tmp_path / "out")
        bundle = run_pipeline(config)
        assert bundle.jaccard_tables == {}
        assert bundle.sentiment_cache == {}
        assert bundle.manifest["sentiment_model"] is None


class TestConfig:
    def test_from_json_roundtrip(self, corpus_file):
        cfg = PipelineConfig.from_json(json.dumps({
            "corpus_path": str(corpus_file),
            "ngram_sizes": [2],
            "diversity": 0.3,
        }))
        assert cfg.ngram_sizes == (2,)
        assert cfg.diversity == 0.3

    def test_unknown_field_rejected(self):
        with pytest.raises(ConfigError):
            PipelineConfig.from_json('{"corpus_path": "x", "bogus": 1}')

    def test_non_object_rejected(self):
        with pytest.raises(ConfigError):
            PipelineConfig.from_json("[1, 2]")

    def test_hash_stable_and_sensitive(self, corpus_file):
        a = bundle_config(corpus_file, "out")
        b = bundle_config(corpus_file, "out")
        assert a.config_hash() == b.config_hash()
        b.diversity = 0.9
        assert a.config_hash() != b.config_hash()

    def test_bad_provider_spec(self):
        with pytest.raises(ConfigError):
            make_embedding_provider("mystery:thing")

    def test_bad_reference_dim(self):
        with pytest.raises(ConfigError):
            make_embedding_provider("reference:soon")


class TestCli:
    def run(self, *args):
        return CliRunner().invoke(main, list(args))

    def test_ingest_summary(self, corpus_file):
        result = self.run("ingest", "--corpus", str(corpus_file))
        assert result.exit_code == 0
        summary = json.loads(result.output)
        assert summary["verses"] == 24
        assert summary["translations"] == ["gold", "plain"]

    def test_missing_corpus_exits_2(self, tmp_path):
        result = self.run("ingest", "--corpus", str(tmp_path / "nope.jsonl"))
        assert result.exit_code == 2

    def test_malformed_corpus_exits_4(self, tmp_path):
        bad = tmp_path / "bad.jsonl"
        bad.write_text('{"translation": "a"}\n', encoding="utf-8")
        result = self.run("ingest", "--corpus", str(bad))
        assert result.exit_code == 4

    def test_unreachable_remote_exits_3(self, corpus_file):
        result = self.run("similarity", "--corpus", str(corpus_file),
                          "--pair", "gold", "plain",
                          "--provider", "remote:http://127.0.0.1:1")
        assert result.exit_code == 3

    def test_bad_provider_spec_exits_2(self, corpus_file):
        result = self.run("similarity", "--corpus", str(corpus_file),
                          "--pair", "gold", "plain", "--provider", "psychic")
        assert result.exit_code == 2

    def test_normalize_reports_counts(self, corpus_file, tmp_path):
        out = tmp_path / "normalized.jsonl"
        result = self.run("normalize", "--corpus", str(corpus_file),
                          "--out", str(out))
        assert result.exit_code == 0
        payload = json.loads(result.output)
        assert payload["ruleset_id"]
        assert out.exists()
        # planted archaic forms are gone from the output corpus
        assert "thou " not in out.read_text()

    def test_ngrams_csv(self, corpus_file):
        result = self.run("ngrams", "--corpus", str(corpus_file),
                          "--translation", "gold", "-n", "2", "-k", "5")
        assert result.exit_code == 0
        lines = result.output.strip().splitlines()
        assert lines[0] == "ngram,count"
        assert len(lines) <= 6

    def test_similarity_output(self, corpus_file):
        result = self.run("similarity", "--corpus", str(corpus_file),
                          "--pair", "gold", "plain", "--provider", "reference:32")
        assert result.exit_code == 0
        assert result.output.startswith("chapter,verse,score")
        assert "chapter,pair,mean,std,n" in result.output

    def test_sentiment_compare(self, corpus_file, sentiment_file):
        result = self.run("sentiment", "compare", "--corpus", str(corpus_file),
                          "--pair", "gold", "plain",
                          "--provider", f"precomputed:{sentiment_file}")
        assert result.exit_code == 0
        assert result.output.startswith("chapter,pair,jaccard_mean")
        assert "average,gold__plain," in result.output

    def test_polarity_series(self, corpus_file, sentiment_file):
        result = self.run("polarity", "--corpus", str(corpus_file),
                          "--translation", "gold", "--speaker", "arjuna",
                          "--provider", f"precomputed:{sentiment_file}")
        assert result.exit_code == 0
        lines = result.output.strip().splitlines()
        assert lines[0] == "chapter,speaker,polarity_sum,polarity_mean"
        assert len(lines) == 3  # header + chapters 1 and 2

    def test_align_report(self, corpus_file):
        result = self.run("align", "--corpus", str(corpus_file),
                          "--pair", "gold", "plain")
        assert result.exit_code == 0
        assert "1,6,6,6," in result.output

    def test_report_run_with_config_file(self, tmp_path, corpus_file, sentiment_file):
        out = tmp_path / "bundle"
        config_path = tmp_path / "config.json"
        config_path.write_text(json.dumps({
            "corpus_path": str(corpus_file),
            "provider": "reference:64",
            "sentiment_provider": f"precomputed:{sentiment_file}",
            "out_dir": str(out),
        }), encoding="utf-8")
        result = self.run("report", "run", "--config", str(config_path))
        assert result.exit_code == 0
        assert (out / "report.json").exists()
        assert (out / "manifest.json").exists()

    def test_report_run_requires_input(self):
        result = self.run("report", "run")
        assert result.exit_code == 2
