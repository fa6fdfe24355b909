"""Command-line interface.

Exit codes: 0 success, 2 config error, 3 provider error, 4 data error.
"""

from __future__ import annotations

import functools
import json
import sys
from pathlib import Path

import click

from . import normalize as norm
from . import providers as prov
from . import report as rpt
from . import semantics, sentiment_analytics, textstats
from .corpus import parse_corpus, serialize_corpus, validate_alignment
from .errors import ConfigError, DataError, ProviderError

EXIT_CONFIG = 2
EXIT_PROVIDER = 3
EXIT_DATA = 4


def handle_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except ConfigError as exc:
            click.echo(f"config error: {exc}", err=True)
            sys.exit(EXIT_CONFIG)
        except ProviderError as exc:
            click.echo(f"provider error: {exc}", err=True)
            sys.exit(EXIT_PROVIDER)
        except DataError as exc:
            click.echo(f"data error: {exc}", err=True)
            sys.exit(EXIT_DATA)
        except OSError as exc:
            click.echo(f"config error: {exc}", err=True)
            sys.exit(EXIT_CONFIG)
    return wrapper


def _load_corpus(path: str):
    with open(path, encoding="utf-8") as fh:
        return parse_corpus(fh)


def _stopwords(path: str | None):
    if path is None:
        return textstats.load_stopwords()
    with open(path, encoding="utf-8") as fh:
        return textstats.load_stopwords(fh)


def _rules(path: str | None):
    if path is None:
        return norm.default_rules()
    with open(path, encoding="utf-8") as fh:
        return norm.load_rules(fh)


@click.group()
def main():
    """Compare verse-aligned parallel translations."""


@main.command()
@click.option("--corpus", "corpus_path", required=True, type=click.Path())
@handle_errors
def ingest(corpus_path):
    """Parse and validate a corpus file; print a summary."""
    corpus = _load_corpus(corpus_path)
    summary = {
        "translations": corpus.translation_ids,
        "verses": len(corpus),
        "chapters": {t: len(corpus.chapters(t)) for t in corpus.translation_ids},
    }
    click.echo(json.dumps(summary, indent=2))


@main.command("normalize")
@click.option("--corpus", "corpus_path", required=True, type=click.Path())
@click.option("--rules", "rules_path", default=None, type=click.Path())
@click.option("--out", "out_path", default=None, type=click.Path())
@handle_errors
def normalize_cmd(corpus_path, rules_path, out_path):
    """Clean and normalize a corpus; print the replacement report."""
    corpus = _load_corpus(corpus_path)
    ruleset = _rules(rules_path)
    normalized, report = norm.normalize_corpus(corpus, ruleset)
    if out_path:
        Path(out_path).write_text(serialize_corpus(normalized), encoding="utf-8")
    click.echo(json.dumps({
        "ruleset_id": report.ruleset_id,
        "verses_touched": report.verses_touched,
        "counts": report.counts,
    }, indent=2))


@main.command("ngrams")
@click.option("--corpus", "corpus_path", required=True, type=click.Path())
@click.option("--translation", required=True)
@click.option("-n", "size", default=2, show_default=True)
@click.option("-k", "top", default=10, show_default=True)
@click.option("--stopwords", "stopwords_path", default=None, type=click.Path())
@click.option("--format", "fmt", default="csv", type=click.Choice(["csv", "json"]))
@handle_errors
def ngrams_cmd(corpus_path, translation, size, top, stopwords_path, fmt):
    """Top n-grams for one translation (stop words removed)."""
    corpus = _load_corpus(corpus_path)
    table = textstats.corpus_ngrams(corpus, translation, size, _stopwords(stopwords_path))
    rows = [(" ".join(g), c) for g, c in textstats.top_k(table, top)]
    if fmt == "json":
        click.echo(json.dumps([{"ngram": g, "count": c} for g, c in rows], indent=2))
    else:
        click.echo("ngram,count")
        for g, c in rows:
            click.echo(f"{g},{c}")


@main.command("similarity")
@click.option("--corpus", "corpus_path", required=True, type=click.Path())
@click.option("--pair", nargs=2, required=True)
@click.option("--provider", default="reference", show_default=True)
@click.option("--rules", "rules_path", default=None, type=click.Path())
@handle_errors
def similarity_cmd(corpus_path, pair, provider, rules_path):
    """Per-verse cosine similarity and per-chapter stats for a pair."""
    corpus = _load_corpus(corpus_path)
    normalized, _ = norm.normalize_corpus(corpus, _rules(rules_path))
    embedder = rpt.make_embedding_provider(provider)
    sims = semantics.verse_pair_similarities(normalized, tuple(pair), embedder)
    click.echo("chapter,verse,score")
    for s in sims:
        click.echo(f"{s.chapter},{s.verse},{s.score:.6f}")
    if sims:
        click.echo("chapter,pair,mean,std,n")
        for st in semantics.chapter_stats(sims):
            click.echo(f"{st.chapter},{pair[0]}__{pair[1]},{st.mean:.6f},{st.std:.6f},{st.n}")


@main.command("keywords")
@click.option("--corpus", "corpus_path", required=True, type=click.Path())
@click.option("--translation", required=True)
@click.option("--chapter", type=int, required=True)
@click.option("--provider", default="reference", show_default=True)
@click.option("--rules", "rules_path", default=None, type=click.Path())
@click.option("--stopwords", "stopwords_path", default=None, type=click.Path())
@handle_errors
def keywords_cmd(corpus_path, translation, chapter, provider, rules_path, stopwords_path):
    """Top chapter keywords by cumulative cross-paragraph score."""
    from .keywords import chapter_keywords

    corpus = _load_corpus(corpus_path)
    normalized, _ = norm.normalize_corpus(corpus, _rules(rules_path))
    embedder = rpt.make_embedding_provider(provider)
    texts = [v.text for v in normalized.verses_of(translation, chapter)]
    kws = chapter_keywords(texts, embedder, _stopwords(stopwords_path), chapter=chapter)
    click.echo("rank,phrase,cumulative,relevance_home")
    for i, k in enumerate(kws, 1):
        click.echo(f"{i},{k.phrase},{k.cumulative:.6f},{k.relevance:.6f}")


@main.group()
def sentiment():
    """Sentiment prediction and cross-translation comparison."""


@sentiment.command("predict")
@click.option("--corpus", "corpus_path", required=True, type=click.Path())
@click.option("--provider", "provider_spec", required=True)
@click.option("--rules", "rules_path", default=None, type=click.Path())
@click.option("--threshold", default=prov.DEFAULT_THRESHOLD, show_default=True)
@handle_errors
def sentiment_predict(corpus_path, provider_spec, rules_path, threshold):
    """Predict label sets for every verse."""
    corpus = _load_corpus(corpus_path)
    normalized, _ = norm.normalize_corpus(corpus, _rules(rules_path))
    sp = rpt.make_sentiment_provider(provider_spec, threshold)
    click.echo("translation,chapter,verse,labels")
    for v in normalized:
        pred = sp.predict_one(v.text)
        labels = "|".join(sorted(pred.labels))
        click.echo(f"{v.key.translation_id},{v.key.chapter},{v.key.verse},{labels}")


@sentiment.command("compare")
@click.option("--corpus", "corpus_path", required=True, type=click.Path())
@click.option("--pair", nargs=2, required=True)
@click.option("--provider", "provider_spec", required=True)
@click.option("--rules", "rules_path", default=None, type=click.Path())
@click.option("--threshold", default=prov.DEFAULT_THRESHOLD, show_default=True)
@handle_errors
def sentiment_compare(corpus_path, pair, provider_spec, rules_path, threshold):
    """Per-chapter Jaccard agreement of predicted label sets."""
    corpus = _load_corpus(corpus_path)
    normalized, _ = norm.normalize_corpus(corpus, _rules(rules_path))
    sp = rpt.make_sentiment_provider(provider_spec, threshold)
    predictions = {v.key: sp.predict_one(v.text).labels for v in normalized}
    rows, grand = sentiment_analytics.chapter_jaccard(normalized, tuple(pair), predictions)
    click.echo("chapter,pair,jaccard_mean")
    for r in rows:
        click.echo(f"{r.chapter},{pair[0]}__{pair[1]},{r.mean:.6f}")
    click.echo(f"average,{pair[0]}__{pair[1]},{grand:.6f}")


@main.command("polarity")
@click.option("--corpus", "corpus_path", required=True, type=click.Path())
@click.option("--translation", required=True)
@click.option("--speaker", required=True)
@click.option("--provider", "provider_spec", required=True)
@click.option("--rules", "rules_path", default=None, type=click.Path())
@click.option("--threshold", default=prov.DEFAULT_THRESHOLD, show_default=True)
@handle_errors
def polarity_cmd(corpus_path, translation, speaker, provider_spec, rules_path, threshold):
    """Per-chapter polarity series for one speaker."""
    corpus = _load_corpus(corpus_path)
    normalized, _ = norm.normalize_corpus(corpus, _rules(rules_path))
    sp = rpt.make_sentiment_provider(provider_spec, threshold)
    predictions = {v.key: sp.predict_one(v.text).labels for v in normalized}
    series = sentiment_analytics.speaker_polarity_series(
        normalized, translation, speaker, predictions
    )
    click.echo("chapter,speaker,polarity_sum,polarity_mean")
    for row in series:
        click.echo(f"{row.chapter},{row.speaker},{row.polarity_sum},{row.polarity_mean:.6f}")


@main.group("report")
def report_group():
    """Full pipeline runs."""


@report_group.command("run")
@click.option("--config", "config_path", default=None, type=click.Path())
@click.option("--corpus", "corpus_path", default=None, type=click.Path())
@click.option("--provider", default=None)
@click.option("--out", "out_dir", default=None, type=click.Path())
@click.option("--format", "fmt", default=None, type=click.Choice(["csv", "json"]))
@handle_errors
def report_run(config_path, corpus_path, provider, out_dir, fmt):
    """Run the whole pipeline and emit the report bundle."""
    if config_path:
        with open(config_path, encoding="utf-8") as fh:
            config = rpt.PipelineConfig.from_json(fh)
    elif corpus_path:
        config = rpt.PipelineConfig(corpus_path=corpus_path)
    else:
        raise ConfigError("need --config or --corpus")
    if corpus_path:
        config.corpus_path = corpus_path
    if provider:
        config.provider = provider
    if out_dir:
        config.out_dir = out_dir
    if fmt:
        config.formats = (fmt,)
    bundle = rpt.run_pipeline(config)
    written = rpt.emit(bundle, config.out_dir, config.formats)
    for path in written:
        click.echo(str(path))


@main.command("align")
@click.option("--corpus", "corpus_path", required=True, type=click.Path())
@click.option("--pair", nargs=2, required=True)
@handle_errors
def align_cmd(corpus_path, pair):
    """Alignment report for a translation pair."""
    corpus = _load_corpus(corpus_path)
    report = validate_alignment(corpus, tuple(pair))
    click.echo("chapter,count_a,count_b,aligned,unmatched")
    for ch in report.chapters:
        unmatched = "|".join(str(i) for i in ch.unmatched)
        click.echo(f"{ch.chapter},{ch.count_a},{ch.count_b},{ch.aligned_pairs},{unmatched}")


if __name__ == "__main__":
    main()
