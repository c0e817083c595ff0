"""Command-line interface.

Subcommands wire the pipeline end to end: preprocess -> fit -> keywords ->
compare / select-k. Options may come from a TOML config file; command-line
flags override config values. Exit codes: 0 success, 2 config error,
3 data error, 4 state mismatch, 5 numerical failure.
"""

import argparse
import hashlib
import math
import sys
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from . import assets, corpus, evaluation, gaussian, lda, serialize, topics, vectorizer
from .errors import ConfigError, DataError, NumericalError, StateMismatchError


def _load_config(path) -> dict:
    if path is None:
        return {}
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid config file {path}: {exc}") from exc


def _get(config: dict, section: str, key: str, cli_value, default):
    if cli_value is not None:
        return cli_value
    return config.get(section, {}).get(key, default)


def _out_dir(args, config) -> Path:
    out = _get(config, "output", "dir", args.out, None)
    if out is None:
        raise ConfigError("an output directory is required (--out or [output].dir)")
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def corpus_fingerprint(docs, vocab) -> str:
    """Stable identity of a processed corpus + vocabulary."""
    h = hashlib.sha256()
    for doc in docs:
        h.update(doc.id.encode("utf-8"))
        h.update(b"\x1f")
        h.update(" ".join(doc.tokens).encode("utf-8"))
        h.update(b"\x1e")
    h.update("\x1f".join(vocab.terms).encode("utf-8"))
    return h.hexdigest()


def _read_processed(corpus_dir) -> tuple[list, corpus.Vocabulary, str]:
    root = Path(corpus_dir)
    docs_path = root / "corpus.jsonl"
    vocab_path = root / "vocab.txt"
    if not docs_path.is_file() or not vocab_path.is_file():
        raise DataError(f"{root}: expected corpus.jsonl and vocab.txt (run preprocess first)")
    docs = corpus.load_processed(docs_path)
    vocab = corpus.load_vocabulary(vocab_path)
    return docs, vocab, corpus_fingerprint(docs, vocab)


def _write_lines(path: Path, lines) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for line in lines:
            fh.write(line)
            fh.write("\n")


def _fmt(value: float) -> str:
    return format(value, ".17g")


def _jsonable(value):
    if value is None or isinstance(value, (int, str, bool)):
        return value
    return value if math.isfinite(value) else repr(value)


# ---------------------------------------------------------------------------
# preprocess


def _pipeline_config(args, config) -> corpus.PipelineConfig:
    return corpus.PipelineConfig.default(
        stopword_file=_get(config, "pipeline", "stopword_file", args.stopwords, None),
        lemma_file=_get(config, "pipeline", "lemma_file", args.lemmas, None),
        min_token_length=int(
            _get(config, "pipeline", "min_token_length", args.min_token_length, 1)
        ),
        min_document_frequency=int(
            _get(config, "pipeline", "min_document_frequency", args.min_df, 1)
        ),
        allow_empty=bool(_get(config, "pipeline", "allow_empty", args.allow_empty, False)),
    )


def cmd_preprocess(args) -> int:
    config = _load_config(args.config)
    out = _out_dir(args, config)
    cfg = _pipeline_config(args, config)

    if _get(config, "input", "bundled", args.bundled or None, False):
        raw_docs = assets.bundled_corpus()
    else:
        source = _get(config, "input", "path", args.input, None)
        fmt = _get(config, "input", "format", args.format, None)
        if source is None or fmt is None:
            raise ConfigError("preprocess needs --input and --format (or --bundled)")
        raw_docs = corpus.load_corpus(source, fmt, allow_empty=cfg.allow_empty)
    if not raw_docs:
        raise DataError("empty corpus")

    processed = [corpus.preprocess(doc, cfg) for doc in raw_docs]
    vocab = corpus.build_vocabulary(processed, cfg)
    corpus.save_processed(processed, out / "corpus.jsonl")
    corpus.save_vocabulary(vocab, out / "vocab.txt")
    print(f"documents={len(processed)} vocabulary={len(vocab)}")
    return 0


# ---------------------------------------------------------------------------
# fit


def _em_config(args, config, n_topics: int, seed: int) -> gaussian.EmConfig:
    ridge = _get(config, "em", "ridge", getattr(args, "ridge", None), None)
    return gaussian.EmConfig(
        n_components=n_topics,
        max_iterations=int(_get(config, "em", "max_iterations", args.max_iterations, 500)),
        tolerance=float(_get(config, "em", "tolerance", args.tolerance, 1e-6)),
        init=_get(config, "em", "init", args.init, "kmeans-like"),
        covariance=_get(config, "em", "covariance", args.covariance, "diagonal"),
        shrinkage=float(_get(config, "em", "shrinkage", args.shrinkage, 0.1)),
        ridge=float(ridge) if ridge is not None else None,
        seed=seed,
        empty_cluster=_get(config, "em", "empty_cluster", args.empty_cluster, "reinit-farthest"),
    )


def _lda_config(args, config, n_topics: int, seed: int) -> lda.LdaConfig:
    eta = _get(config, "lda", "eta", args.eta, None)
    return lda.LdaConfig(
        n_topics=n_topics,
        doc_topic_prior=float(eta) if eta is not None else None,
        topic_word_prior=float(_get(config, "lda", "rho", args.rho, 0.01)),
        iterations=int(_get(config, "lda", "iterations", args.iterations, 200)),
        burn_in=int(_get(config, "lda", "burn_in", args.burn_in, 100)),
        seed=seed,
        average_samples=bool(
            _get(config, "lda", "average_samples", args.average_samples or None, False)
        ),
    )


def _fit_mgd(docs, vocab, fingerprint, em_cfg, top_n, out: Path) -> topics.MgdTopicModel:
    dtm = vectorizer.tfidf(docs, vocab, allow_empty=True)
    model = topics.fit_topics(dtm, em_cfg)
    payload = gaussian.model_to_dict(model.gmm)
    payload["config"]["tfidf_log_base"] = dtm.log_base
    payload["corpus_hash"] = fingerprint
    serialize.dump(payload, out / "model-mgd.json")
    _write_lines(out / "keywords-mgd.csv", topics.keywords_csv_lines(model, top_n))
    serialize.dump(topics.keywords_report(model, top_n), out / "keywords-mgd.json")
    return model


def _lda_keyword_csv(model: lda.LdaModel, top_n: int) -> list[str]:
    lines = ["topic,rank,term,probability"]
    for topic in range(model.n_topics):
        for rank, (term, prob) in enumerate(lda.lda_top_words(model, topic, top_n), start=1):
            lines.append(f"{topic},{rank},{term},{_fmt(prob)}")
    return lines


def _fit_lda(docs, vocab, fingerprint, lda_cfg, top_n, out: Path) -> lda.LdaModel:
    model = lda.fit_lda(docs, vocab, lda_cfg)
    serialize.dump(lda.model_to_dict(model, corpus_hash=fingerprint), out / "model-lda.json")
    _write_lines(out / "keywords-lda.csv", _lda_keyword_csv(model, top_n))
    return model


def cmd_fit(args) -> int:
    config = _load_config(args.config)
    out = _out_dir(args, config)
    docs, vocab, fingerprint = _read_processed(
        _get(config, "input", "corpus", args.corpus, None) or _missing("--corpus")
    )
    selector = _get(config, "model", "selector", args.model, "both")
    if selector not in ("mgd", "lda", "both"):
        raise ConfigError(f"unknown model selector {selector!r}")
    n_topics = int(_get(config, "model", "k", args.k, 3))
    seed = int(_get(config, "model", "seed", args.seed, 0))
    top_n = int(_get(config, "model", "top_n", args.top_n, 10))

    written = []
    if selector in ("mgd", "both"):
        _fit_mgd(docs, vocab, fingerprint, _em_config(args, config, n_topics, seed), top_n, out)
        written += ["model-mgd.json", "keywords-mgd.csv"]
    if selector in ("lda", "both"):
        _fit_lda(docs, vocab, fingerprint, _lda_config(args, config, n_topics, seed), top_n, out)
        written += ["model-lda.json", "keywords-lda.csv"]
    print(f"fitted {selector} with k={n_topics}: " + ", ".join(written))
    return 0


def _missing(flag: str):
    raise ConfigError(f"{flag} is required")


# ---------------------------------------------------------------------------
# keywords


def _rebuild_mgd(payload, docs, vocab) -> topics.MgdTopicModel:
    gmm = gaussian.model_from_dict(payload)
    dtm = vectorizer.tfidf(docs, vocab, allow_empty=True)
    resp, _ = gaussian.e_step(dtm.values, gmm)
    if gmm.mode == "diagonal":
        covs = topics._posthoc_full_covariances(dtm.values, gmm, resp)
    else:
        covs = np.stack([c.cov.full for c in gmm.components])
    return topics.MgdTopicModel(
        gmm=gmm,
        vocab=vocab,
        topic_covariances=covs,
        assignments=np.argmax(resp.matrix, axis=1),
        responsibilities=resp,
    )


def _check_hash(payload, fingerprint, what: str) -> None:
    stored = payload.get("corpus_hash")
    if stored is not None and stored != fingerprint:
        raise StateMismatchError(f"{what} was fitted on a different corpus")


def cmd_keywords(args) -> int:
    config = _load_config(args.config)
    out = _out_dir(args, config)
    docs, vocab, fingerprint = _read_processed(args.corpus or _missing("--corpus"))
    payload = serialize.load(args.model or _missing("--model"))
    top_n = int(_get(config, "model", "top_n", args.top_n, 10))

    if "gamma" in payload:  # LDA model file
        _check_hash(payload, fingerprint, "LDA model")
        model = lda.model_from_dict(payload, vocab)
        _write_lines(out / "keywords-lda.csv", _lda_keyword_csv(model, top_n))
        print(f"wrote keywords-lda.csv ({model.n_topics} topics)")
    else:
        _check_hash(payload, fingerprint, "mixture model")
        model = _rebuild_mgd(payload, docs, vocab)
        _write_lines(out / "keywords-mgd.csv", topics.keywords_csv_lines(model, top_n))
        serialize.dump(topics.keywords_report(model, top_n), out / "keywords-mgd.json")
        print(f"wrote keywords-mgd.csv ({model.n_topics} topics)")
    return 0


# ---------------------------------------------------------------------------
# compare


def _ttest_payload(result: evaluation.TTestResult) -> dict:
    return {
        "t_estimated": _jsonable(result.t_estimated),
        "df": result.df,
        "t_critical": _jsonable(result.t_critical),
        "p_value": _jsonable(result.p_value),
        "reject_null": result.reject_null,
        "alpha": result.alpha,
        "undefined": result.undefined,
        "note": result.note,
    }


def cmd_compare(args) -> int:
    config = _load_config(args.config)
    out = _out_dir(args, config)
    alpha = float(_get(config, "ttest", "alpha", args.alpha, 0.05))

    if args.stats_only:
        m1, s1, n1, m2, s2, n2 = args.stats_only
        result = evaluation.pooled_t_test(m1, s1, int(n1), m2, s2, int(n2), alpha=alpha)
        serialize.dump(_ttest_payload(result), out / "ttest.json")
        if result.undefined:
            print(f"t undefined: {result.note}")
        else:
            print(
                f"t={result.t_estimated:.4f} df={result.df} "
                f"t_critical={result.t_critical:.4f} p={result.p_value:.4f} "
                f"reject_null={result.reject_null}"
            )
        return 0

    docs, vocab, fingerprint = _read_processed(args.corpus or _missing("--corpus"))
    mgd_payload = serialize.load(args.mgd or _missing("--mgd"))
    lda_payload = serialize.load(args.lda or _missing("--lda"))
    _check_hash(mgd_payload, fingerprint, "mixture model")
    _check_hash(lda_payload, fingerprint, "LDA model")

    coh_cfg = evaluation.CoherenceConfig(
        top_n=int(_get(config, "coherence", "top_n", args.top_n, 10)),
        window_size=int(_get(config, "coherence", "window_size", args.window_size, 110)),
    )
    mgd_model = _rebuild_mgd(mgd_payload, docs, vocab)
    lda_model = lda.model_from_dict(lda_payload, vocab)
    mgd_report = evaluation.cv_coherence(
        topics.keyword_lists(mgd_model, coh_cfg.top_n), docs, coh_cfg
    )
    lda_report = evaluation.cv_coherence(
        lda.lda_keyword_lists(lda_model, coh_cfg.top_n), docs, coh_cfg
    )

    lines = ["model,topic,cv"]
    for name, report in (("mgd", mgd_report), ("lda", lda_report)):
        for idx, value in enumerate(report.per_topic):
            lines.append(f"{name},{idx},{_fmt(value)}")
    _write_lines(out / "coherence.csv", lines)

    mean1, sd1, n1 = evaluation.coherence_stats(mgd_report.per_topic)
    mean2, sd2, n2 = evaluation.coherence_stats(lda_report.per_topic)
    print(f"mean_cv mgd={mean1:.4f} lda={mean2:.4f}")
    if n1 < 2 or n2 < 2:
        payload = {
            "refused": "t-test needs at least 2 topics per model "
            f"(got {n1} and {n2}); fit with a larger k",
            "mgd": {"mean_cv": mean1, "n": n1},
            "lda": {"mean_cv": mean2, "n": n2},
        }
        serialize.dump(payload, out / "ttest.json")
        print(payload["refused"])
        return 0
    result = evaluation.pooled_t_test(mean1, sd1, n1, mean2, sd2, n2, alpha=alpha)
    payload = _ttest_payload(result)
    payload["mgd"] = {"mean_cv": mean1, "sd_cv": sd1, "n": n1}
    payload["lda"] = {"mean_cv": mean2, "sd_cv": sd2, "n": n2}
    serialize.dump(payload, out / "ttest.json")
    if result.undefined:
        print(f"t undefined: {result.note}")
    else:
        print(
            f"t={result.t_estimated:.4f} df={result.df} "
            f"t_critical={result.t_critical:.4f} p={result.p_value:.4f} "
            f"reject_null={result.reject_null}"
        )
    return 0


# ---------------------------------------------------------------------------
# select-k


def cmd_select_k(args) -> int:
    config = _load_config(args.config)
    out = _out_dir(args, config)
    docs, vocab, _fingerprint = _read_processed(args.corpus or _missing("--corpus"))

    k_min = int(_get(config, "sweep", "k_min", args.k_min, 2))
    k_max = int(_get(config, "sweep", "k_max", args.k_max, 5))
    if k_min < 2:
        raise ConfigError("k-min must be >= 2")
    if k_max > len(docs):
        raise ConfigError(f"k-max={k_max} exceeds the {len(docs)} documents")
    if k_max < k_min:
        raise ConfigError("k-max must be >= k-min")
    normalization = _get(config, "sweep", "normalization", args.normalization, "minmax")
    seed = int(_get(config, "model", "seed", args.seed, 0))
    top_n = int(_get(config, "model", "top_n", args.top_n, 10))
    coh_cfg = evaluation.CoherenceConfig(
        top_n=top_n,
        window_size=int(_get(config, "coherence", "window_size", args.window_size, 110)),
    )
    dtm = vectorizer.tfidf(docs, vocab, allow_empty=True)

    def fit_mgd(k: int) -> tuple[float, float]:
        model = topics.fit_topics(dtm, _em_config(args, config, k, seed))
        report = evaluation.cv_coherence(topics.keyword_lists(model, top_n), docs, coh_cfg)
        avg_nll = -model.gmm.loglik_trace[-1] / len(docs)
        return report.mean, avg_nll

    def fit_lda_k(k: int) -> tuple[float, float]:
        model = lda.fit_lda(docs, vocab, _lda_config(args, config, k, seed))
        report = evaluation.cv_coherence(lda.lda_keyword_lists(model, top_n), docs, coh_cfg)
        return report.mean, lda.log_perplexity(model, docs)

    result = evaluation.select_topic_count(
        range(k_min, k_max + 1),
        {"mgd": fit_mgd, "lda": fit_lda_k},
        normalization=normalization,
    )

    lines = ["k,mgd_mean_cv,mgd_avg_neg_loglik,lda_mean_cv,lda_log_perplexity,difference,status"]
    for row in result.rows:
        if row.failed:
            lines.append(f"{row.k},,,,,,failed: {row.error}")
            continue
        m = row.metrics
        lines.append(
            ",".join(
                [
                    str(row.k),
                    _fmt(m["mgd"]["mean_cv"]),
                    _fmt(m["mgd"]["log_perplexity"]),
                    _fmt(m["lda"]["mean_cv"]),
                    _fmt(m["lda"]["log_perplexity"]),
                    _fmt(row.difference),
                    "ok",
                ]
            )
        )
    selected = result.selected_k
    lines.append(f"selected,{'' if selected is None else selected},,,,,{result.normalization}")
    _write_lines(out / "ksweep.csv", lines)
    print(f"selected k={selected}")
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mgtopics",
        description="Gaussian-mixture topic modelling over TF-IDF vectors, "
        "with an LDA baseline and coherence evaluation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="TOML config file; flags override its values")
        p.add_argument("--out", help="output directory")

    p = sub.add_parser("preprocess", help="clean a corpus and build its vocabulary")
    common(p)
    p.add_argument("--input", help="corpus path (directory, JSONL, or CSV)")
    p.add_argument("--format", choices=corpus.CORPUS_FORMATS, help="corpus format")
    p.add_argument("--bundled", action="store_true", help="use the packaged 18-document corpus")
    p.add_argument("--stopwords", help="stopword file (one word per line)")
    p.add_argument("--lemmas", help="lemma dictionary (TSV surface<TAB>lemma)")
    p.add_argument("--min-token-length", type=int, dest="min_token_length")
    p.add_argument("--min-df", type=int, dest="min_df")
    p.add_argument("--allow-empty", action="store_true", dest="allow_empty", default=None)
    p.set_defaults(func=cmd_preprocess)

    p = sub.add_parser("fit", help="fit topic model(s) on a preprocessed corpus")
    common(p)
    p.add_argument("--corpus", help="directory produced by preprocess")
    p.add_argument("--model", choices=("mgd", "lda", "both"))
    p.add_argument("--k", type=int, help="number of topics")
    p.add_argument("--seed", type=int)
    p.add_argument("--top-n", type=int, dest="top_n")
    _em_flags(p)
    _lda_flags(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("keywords", help="emit ranked keywords from a fitted model")
    common(p)
    p.add_argument("--corpus", help="directory produced by preprocess")
    p.add_argument("--model", help="model JSON file")
    p.add_argument("--top-n", type=int, dest="top_n")
    p.set_defaults(func=cmd_keywords)

    p = sub.add_parser("compare", help="coherence comparison and pooled t-test")
    common(p)
    p.add_argument("--corpus", help="directory produced by preprocess")
    p.add_argument("--mgd", help="model-mgd.json path")
    p.add_argument("--lda", help="model-lda.json path")
    p.add_argument("--alpha", type=float)
    p.add_argument("--top-n", type=int, dest="top_n")
    p.add_argument("--window-size", type=int, dest="window_size")
    p.add_argument(
        "--stats-only",
        type=float,
        nargs=6,
        metavar=("MEAN1", "SD1", "N1", "MEAN2", "SD2", "N2"),
        help="skip fitting; run the t-test on the given summary statistics",
    )
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("select-k", help="sweep topic counts and pick one")
    common(p)
    p.add_argument("--corpus", help="directory produced by preprocess")
    p.add_argument("--k-min", type=int, dest="k_min")
    p.add_argument("--k-max", type=int, dest="k_max")
    p.add_argument("--seed", type=int)
    p.add_argument("--top-n", type=int, dest="top_n")
    p.add_argument("--window-size", type=int, dest="window_size")
    p.add_argument("--normalization", choices=("minmax", "none"))
    _em_flags(p)
    _lda_flags(p)
    p.set_defaults(func=cmd_select_k)

    return parser


def _em_flags(p) -> None:
    p.add_argument("--covariance", choices=gaussian.COVARIANCE_MODES)
    p.add_argument("--shrinkage", type=float)
    p.add_argument("--ridge", type=float)
    p.add_argument("--tolerance", type=float)
    p.add_argument("--max-iterations", type=int, dest="max_iterations")
    p.add_argument("--init", choices=gaussian.INIT_MODES)
    p.add_argument("--empty-cluster", choices=gaussian.EMPTY_CLUSTER_POLICIES, dest="empty_cluster")


def _lda_flags(p) -> None:
    p.add_argument("--eta", type=float, help="document-topic Dirichlet prior")
    p.add_argument("--rho", type=float, help="topic-word Dirichlet prior")
    p.add_argument("--iterations", type=int)
    p.add_argument("--burn-in", type=int, dest="burn_in")
    p.add_argument("--average-samples", action="store_true", dest="average_samples", default=None)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except StateMismatchError as exc:
        print(f"state mismatch: {exc}", file=sys.stderr)
        return 4
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 5


if __name__ == "__main__":
    sys.exit(main())
