"""Pipeline orchestration: configuration, stage sequencing, and emission.

A run ingests a corpus, normalizes it, and produces every table the
analytics modules define, plus a manifest that pins the inputs so the
bundle is reproducible byte-for-byte (timestamp aside).
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
from dataclasses import dataclass, field
from datetime import datetime, timezone
from itertools import combinations
from pathlib import Path
from typing import Any

from . import normalize as norm
from . import providers as prov
from . import semantics, sentiment_analytics, textstats
from .corpus import ParallelCorpus, load_translation_descriptors, parse_corpus
from .errors import ConfigError, EmptyChapter, MissingKey
from .keywords import ChunkingPolicy, MmrPolicy, chapter_keywords
from .providers import SENTIMENT_LABELS


@dataclass
class PipelineConfig:
    corpus_path: str
    descriptors_path: str | None = None
    rules_path: str | None = None  # None -> shipped default ruleset
    stopwords_path: str | None = None  # None -> shipped default list
    provider: str = "reference"  # reference[:dim] | precomputed:<file> | remote:<url>
    sentiment_provider: str | None = None  # precomputed:<file> | remote:<url>
    threshold: float = prov.DEFAULT_THRESHOLD
    paragraph_size: int = 15
    overlap: int = 3
    diversity: float = 0.5
    candidates_per_paragraph: int = 20
    final_top_n: int = 10
    include_home_paragraph: bool = True
    ngram_sizes: tuple[int, ...] = (2, 3)
    ngram_top_k: int = 10
    polarity_weights: dict[str, float] | None = None
    out_dir: str = "out"
    formats: tuple[str, ...] = ("csv", "json")

    @classmethod
    def from_json(cls, source) -> "PipelineConfig":
        data = json.loads(source.read() if hasattr(source, "read") else source)
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        try:
            cfg = cls(**{
                k: tuple(v) if isinstance(v, list) and k in ("ngram_sizes", "formats") else v
                for k, v in data.items()
            })
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc
        return cfg

    def canonical(self) -> dict[str, Any]:
        return {
            "corpus_path": self.corpus_path,
            "descriptors_path": self.descriptors_path,
            "rules_path": self.rules_path,
            "stopwords_path": self.stopwords_path,
            "provider": self.provider,
            "sentiment_provider": self.sentiment_provider,
            "threshold": self.threshold,
            "paragraph_size": self.paragraph_size,
            "overlap": self.overlap,
            "diversity": self.diversity,
            "candidates_per_paragraph": self.candidates_per_paragraph,
            "final_top_n": self.final_top_n,
            "include_home_paragraph": self.include_home_paragraph,
            "ngram_sizes": list(self.ngram_sizes),
            "ngram_top_k": self.ngram_top_k,
            "polarity_weights": self.polarity_weights,
            "formats": sorted(self.formats),
        }

    def config_hash(self) -> str:
        blob = json.dumps(self.canonical(), sort_keys=True).encode("utf-8")
        return hashlib.sha256(blob).hexdigest()


@dataclass
class ReportBundle:
    manifest: dict[str, Any]
    normalization: dict[str, dict[str, int]]
    ngram_tables: dict[str, list[tuple[str, int]]]  # "trans:n" -> [(ngram, count)]
    chapter_similarity: dict[str, list[dict[str, Any]]]  # "a__b" -> rows
    verse_similarity: dict[str, list[dict[str, Any]]]
    keyword_tables: dict[str, list[dict[str, Any]]]  # "trans:ch" -> rows
    jaccard_tables: dict[str, dict[str, Any]] = field(default_factory=dict)
    sentiment_count_tables: dict[str, dict[str, int]] = field(default_factory=dict)
    cooccurrence_tables: dict[str, list[list[int]]] = field(default_factory=dict)
    polarity_tables: dict[str, list[dict[str, Any]]] = field(default_factory=dict)
    projection: list[dict[str, Any]] = field(default_factory=list)
    embedding_cache: dict[str, list[float]] = field(default_factory=dict)
    sentiment_cache: dict[str, dict[str, float]] = field(default_factory=dict)


def make_embedding_provider(spec: str) -> prov.EmbeddingProvider:
    if spec == "reference":
        return prov.ReferenceEmbeddingProvider()
    if spec.startswith("reference:"):
        try:
            return prov.ReferenceEmbeddingProvider(int(spec.split(":", 1)[1]))
        except ValueError as exc:
            raise ConfigError(f"bad reference dimension in {spec!r}") from exc
    if spec.startswith("precomputed:"):
        return prov.load_precomputed_embeddings(spec.split(":", 1)[1])
    if spec.startswith("remote:"):
        return prov.RemoteEmbeddingProvider(spec.split(":", 1)[1])
    raise ConfigError(f"unknown provider spec {spec!r}")


def make_sentiment_provider(spec: str, threshold: float) -> prov.SentimentProvider:
    if spec.startswith("precomputed:"):
        return prov.load_precomputed_sentiments(spec.split(":", 1)[1], threshold)
    if spec.startswith("remote:"):
        return prov.RemoteSentimentProvider(spec.split(":", 1)[1], threshold)
    raise ConfigError(f"unknown sentiment provider spec {spec!r}")


def load_inputs(config: PipelineConfig) -> tuple[ParallelCorpus, norm.NormalizationRuleSet, set[str], str]:
    try:
        with open(config.corpus_path, encoding="utf-8") as fh:
            descriptors = ()
            if config.descriptors_path:
                with open(config.descriptors_path, encoding="utf-8") as dfh:
                    descriptors = load_translation_descriptors(dfh)
            corpus = parse_corpus(fh, descriptors)
    except OSError as exc:
        raise ConfigError(f"cannot read corpus: {exc}") from exc
    if config.rules_path:
        with open(config.rules_path, encoding="utf-8") as fh:
            rules = norm.load_rules(fh)
    else:
        rules = norm.default_rules()
    if config.stopwords_path:
        with open(config.stopwords_path, encoding="utf-8") as fh:
            stopwords = textstats.load_stopwords(fh)
        stoplist_id = Path(config.stopwords_path).name
    else:
        stopwords = textstats.load_stopwords()
        stoplist_id = textstats.DEFAULT_STOPLIST_ID
    return corpus, rules, stopwords, stoplist_id


def run_pipeline(config: PipelineConfig) -> ReportBundle:
    """Execute ingest -> normalize -> stats/semantics/keywords/sentiment."""
    corpus, rules, stopwords, stoplist_id = load_inputs(config)
    embedder = make_embedding_provider(config.provider)
    sentiment = (
        make_sentiment_provider(config.sentiment_provider, config.threshold)
        if config.sentiment_provider else None
    )

    normalized, norm_report = norm.normalize_corpus(corpus, rules)
    translations = normalized.translation_ids

    ngram_tables = {}
    for tid in translations:
        for n in config.ngram_sizes:
            table = textstats.corpus_ngrams(normalized, tid, n, stopwords)
            ngram_tables[f"{tid}:{n}"] = [
                (" ".join(gram), count) for gram, count in textstats.top_k(table, config.ngram_top_k)
            ]

    embedding_cache: dict[str, list[float]] = {}

    def embed_and_cache(texts: list[str]):
        vecs = embedder.embed_batch(texts)
        for text, vec in zip(texts, vecs):
            embedding_cache[prov.text_key(text)] = [float(x) for x in vec]
        return vecs

    caching_provider = _CachingEmbedder(embedder, embedding_cache)

    chapter_similarity = {}
    verse_similarity = {}
    for id_a, id_b in combinations(translations, 2):
        sims = semantics.verse_pair_similarities(normalized, (id_a, id_b), caching_provider)
        key = f"{id_a}__{id_b}"
        verse_similarity[key] = [
            {"chapter": s.chapter, "verse": s.verse, "score": round(s.score, 6)} for s in sims
        ]
        if sims:
            chapter_similarity[key] = [
                {"chapter": st.chapter, "pair": key, "mean": round(st.mean, 6),
                 "std": round(st.std, 6), "n": st.n}
                for st in semantics.chapter_stats(sims)
            ]
        else:
            chapter_similarity[key] = []

    chunking = ChunkingPolicy(config.paragraph_size, config.overlap)
    mmr = MmrPolicy(config.diversity, config.candidates_per_paragraph, config.final_top_n)
    keyword_tables = {}
    for tid in translations:
        for ch in normalized.chapters(tid):
            texts = [v.text for v in normalized.verses_of(tid, ch)]
            if not any(texts):
                continue
            kws = chapter_keywords(
                texts, caching_provider, stopwords, chunking, mmr,
                chapter=ch, include_home_paragraph=config.include_home_paragraph,
            )
            keyword_tables[f"{tid}:{ch}"] = [
                {"rank": i + 1, "phrase": k.phrase, "cumulative": round(k.cumulative, 6),
                 "relevance_home": round(k.relevance, 6)}
                for i, k in enumerate(kws)
            ]

    all_labels = []
    all_vectors = []
    for v in normalized:
        key = prov.text_key(v.text)
        if key in embedding_cache:
            all_labels.append(f"{v.key.translation_id}:{v.key.chapter}:{v.key.verse}")
            all_vectors.append(embedding_cache[key])
    projection_rows = []
    if all_vectors:
        proj = semantics.project_2d(all_vectors, all_labels, method="pca_reference")
        projection_rows = [
            {"label": l, "x": round(x, 6), "y": round(y, 6), "method": proj.method}
            for l, x, y in proj.points
        ]

    jaccard_tables: dict[str, dict[str, Any]] = {}
    sentiment_count_tables: dict[str, dict[str, int]] = {}
    cooccurrence_tables: dict[str, list[list[int]]] = {}
    polarity_tables: dict[str, list[dict[str, Any]]] = {}
    sentiment_cache: dict[str, dict[str, float]] = {}
    if sentiment is not None:
        # sentiment consumes normalized text WITH stop words
        predictions = {}
        for v in normalized:
            pred = sentiment.predict_one(v.text)
            predictions[v.key] = pred.labels
            sentiment_cache[prov.text_key(v.text)] = dict(pred.scores)
        for id_a, id_b in combinations(translations, 2):
            try:
                rows, grand = sentiment_analytics.chapter_jaccard(
                    normalized, (id_a, id_b), predictions
                )
            except EmptyChapter:
                continue
            jaccard_tables[f"{id_a}__{id_b}"] = {
                "rows": [{"chapter": r.chapter, "pair": f"{id_a}__{id_b}",
                          "jaccard_mean": round(r.mean, 6), "n": r.n} for r in rows],
                "grand_mean": round(grand, 6),
            }
        for tid in translations:
            sets = [predictions[v.key] for v in normalized.verses_of(tid)]
            sentiment_count_tables[tid] = sentiment_analytics.sentiment_counts(sets)
            cooccurrence_tables[tid] = sentiment_analytics.cooccurrence(sets).tolist()
            speakers = sorted({v.speaker for v in normalized.verses_of(tid) if v.speaker})
            for sp in speakers:
                series = sentiment_analytics.speaker_polarity_series(
                    normalized, tid, sp, predictions, config.polarity_weights
                )
                polarity_tables[f"{tid}:{sp}"] = [
                    {"chapter": row.chapter, "speaker": row.speaker,
                     "polarity_sum": row.polarity_sum, "polarity_mean": round(row.polarity_mean, 6)}
                    for row in series
                ]

    manifest = {
        "config_hash": config.config_hash(),
        "provider_model": embedder.descriptor.model,
        "provider_kind": embedder.descriptor.kind,
        "dimension": embedder.descriptor.dimension,
        "sentiment_model": getattr(sentiment, "model", None),
        "ruleset_id": rules.ruleset_id,
        "stoplist_id": stoplist_id,
        "translations": translations,
        "verse_count": len(normalized),
        "generated_at": datetime.now(timezone.utc).isoformat(),
    }
    return ReportBundle(
        manifest=manifest,
        normalization=norm_report.counts,
        ngram_tables=ngram_tables,
        chapter_similarity=chapter_similarity,
        verse_similarity=verse_similarity,
        keyword_tables=keyword_tables,
        jaccard_tables=jaccard_tables,
        sentiment_count_tables=sentiment_count_tables,
        cooccurrence_tables=cooccurrence_tables,
        polarity_tables=polarity_tables,
        projection=projection_rows,
        embedding_cache=embedding_cache,
        sentiment_cache=sentiment_cache,
    )


class _CachingEmbedder(prov.EmbeddingProvider):
    """Wraps a provider, recording every vector by text hash."""

    def __init__(self, inner: prov.EmbeddingProvider, cache: dict):
        self.inner = inner
        self.cache = cache
        self.descriptor = inner.descriptor

    def embed_one(self, text: str):
        return self.embed_batch([text])[0]

    def embed_batch(self, texts: list[str]):
        vecs = self.inner.embed_batch(texts)
        for text, vec in zip(texts, vecs):
            self.cache[prov.text_key(text)] = [float(x) for x in vec]
        return vecs


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    path.write_text(buf.getvalue(), encoding="utf-8")


def emit(bundle: ReportBundle, out_dir: str | Path, formats: tuple[str, ...] = ("csv", "json")) -> list[Path]:
    """Write the bundle to disk; returns the list of files written.

    All computation happened before this point, so a failure never leaves
    a torn partial bundle beyond ordinary filesystem semantics.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    def emit_csv(name: str, header: list[str], rows: list[list]):
        path = out / name
        _write_csv(path, header, rows)
        written.append(path)

    if "csv" in formats:
        emit_csv("normalization.csv", ["translation", "rule", "count"], [
            [tid, rule, count]
            for tid in sorted(bundle.normalization)
            for rule, count in sorted(bundle.normalization[tid].items())
        ])
        for key in sorted(bundle.ngram_tables):
            tid, n = key.rsplit(":", 1)
            emit_csv(f"ngrams_{tid}_{n}.csv", ["ngram", "count"],
                     [[g, c] for g, c in bundle.ngram_tables[key]])
        for key in sorted(bundle.chapter_similarity):
            emit_csv(f"similarity_chapters_{key}.csv", ["chapter", "pair", "mean", "std", "n"],
                     [[r["chapter"], r["pair"], r["mean"], r["std"], r["n"]]
                      for r in bundle.chapter_similarity[key]])
        for key in sorted(bundle.verse_similarity):
            emit_csv(f"similarity_verses_{key}.csv", ["chapter", "verse", "score"],
                     [[r["chapter"], r["verse"], r["score"]] for r in bundle.verse_similarity[key]])
        for key in sorted(bundle.keyword_tables):
            tid, ch = key.rsplit(":", 1)
            emit_csv(f"keywords_{tid}_ch{ch}.csv",
                     ["rank", "phrase", "cumulative", "relevance_home"],
                     [[r["rank"], r["phrase"], r["cumulative"], r["relevance_home"]]
                      for r in bundle.keyword_tables[key]])
        for key in sorted(bundle.jaccard_tables):
            emit_csv(f"jaccard_{key}.csv", ["chapter", "pair", "jaccard_mean", "n"],
                     [[r["chapter"], r["pair"], r["jaccard_mean"], r["n"]]
                      for r in bundle.jaccard_tables[key]["rows"]])
        for tid in sorted(bundle.sentiment_count_tables):
            emit_csv(f"sentiment_counts_{tid}.csv", ["label", "count", "group"],
                     [[label, bundle.sentiment_count_tables[tid][label], tid]
                      for label in SENTIMENT_LABELS])
        for tid in sorted(bundle.cooccurrence_tables):
            matrix = bundle.cooccurrence_tables[tid]
            emit_csv(f"cooccurrence_{tid}.csv", ["label", *SENTIMENT_LABELS],
                     [[label, *matrix[i]] for i, label in enumerate(SENTIMENT_LABELS)])
        for key in sorted(bundle.polarity_tables):
            tid, sp = key.rsplit(":", 1)
            emit_csv(f"polarity_{tid}_{sp}.csv",
                     ["chapter", "speaker", "polarity_sum", "polarity_mean"],
                     [[r["chapter"], r["speaker"], r["polarity_sum"], r["polarity_mean"]]
                      for r in bundle.polarity_tables[key]])
        if bundle.projection:
            emit_csv("projection.csv", ["label", "x", "y", "method"],
                     [[r["label"], r["x"], r["y"], r["method"]] for r in bundle.projection])

    if "json" in formats:
        report = {
            # timestamp lives only in manifest.json so report.json is reproducible
            "manifest": {k: v for k, v in bundle.manifest.items() if k != "generated_at"},
            "normalization": bundle.normalization,
            "ngram_tables": {k: [[g, c] for g, c in v] for k, v in bundle.ngram_tables.items()},
            "chapter_similarity": bundle.chapter_similarity,
            "verse_similarity": bundle.verse_similarity,
            "keyword_tables": bundle.keyword_tables,
            "jaccard_tables": bundle.jaccard_tables,
            "sentiment_counts": bundle.sentiment_count_tables,
            "cooccurrence": bundle.cooccurrence_tables,
            "polarity": bundle.polarity_tables,
            "projection": bundle.projection,
        }
        path = out / "report.json"
        path.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        written.append(path)

    manifest_path = out / "manifest.json"
    manifest_path.write_text(
        json.dumps(bundle.manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    written.append(manifest_path)

    if bundle.embedding_cache:
        cache_path = out / "embeddings_cache.jsonl"
        prov.save_precomputed_embeddings(
            cache_path, {k: v for k, v in bundle.embedding_cache.items()},
            dim=bundle.manifest["dimension"], model=bundle.manifest["provider_model"],
        )
        written.append(cache_path)
    if bundle.sentiment_cache:
        cache_path = out / "sentiments_cache.jsonl"
        prov.save_precomputed_sentiments(
            cache_path, bundle.sentiment_cache, model=bundle.manifest["sentiment_model"] or "unknown"
        )
        written.append(cache_path)
    return written
