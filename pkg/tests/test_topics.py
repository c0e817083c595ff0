import numpy as np
import pytest
from numpy.testing import assert_allclose

from mgtopics.corpus import ProcessedDocument, Vocabulary
from mgtopics.errors import ConfigError
from mgtopics.gaussian import (
    CovarianceRep,
    EmConfig,
    GaussianComponent,
    GmmModel,
    Responsibilities,
)
from mgtopics.topics import (
    MgdTopicModel,
    assign_topic,
    fit_topics,
    keyword_lists,
    keywords_csv_lines,
    keywords_report,
    smcc,
    top_keywords,
)
from mgtopics.vectorizer import tfidf

import oracles


def _manual_model(means, covs, weights, terms):
    means = [np.asarray(m, dtype=float) for m in means]
    covs = np.asarray(covs, dtype=float)
    comps = [
        GaussianComponent(
            mean=m,
            cov=CovarianceRep("diagonal", diag=np.diag(c).copy(), ridge=1e-12),
        )
        for m, c in zip(means, covs)
    ]
    gmm = GmmModel(
        components=comps,
        weights=np.asarray(weights, dtype=float),
        loglik_trace=[0.0],
        iterations=0,
        seed=0,
    )
    vocab = Vocabulary.from_terms(terms)
    n = len(terms)
    return MgdTopicModel(
        gmm=gmm,
        vocab=vocab,
        topic_covariances=covs,
        assignments=np.zeros(1, dtype=int),
        responsibilities=Responsibilities(matrix=np.ones((1, len(comps)))),
    )


def test_smcc_direct_evaluation():
    model = _manual_model(
        means=[[0.5, 0.1]],
        covs=[[[0.04, 0.01], [0.01, 0.09]]],
        weights=[1.0],
        terms=["a", "b"],
    )
    scores = smcc(model, 0)
    # 0.5 * (0.04^2 + 0.01^2) and 0.1 * (0.01^2 + 0.09^2)
    assert_allclose(scores, [0.00085, 0.00082], atol=1e-15)


def test_smcc_zero_mean_zero_score():
    model = _manual_model(
        means=[[0.0, 0.3]],
        covs=[[[0.5, 0.2], [0.2, 0.4]]],
        weights=[1.0],
        terms=["a", "b"],
    )
    assert smcc(model, 0)[0] == 0.0


def test_smcc_matches_double_loop_oracle():
    rng = np.random.default_rng(30)
    for _ in range(10):
        dim = 6
        a = rng.normal(size=(dim, dim))
        cov = a @ a.T
        mean = rng.uniform(0, 1, size=dim)
        model = _manual_model([mean], [cov], [1.0], [f"t{i}" for i in range(dim)])
        assert_allclose(
            smcc(model, 0), oracles.smcc_double_loop(mean, cov), atol=1e-12
        )


def test_smcc_nonnegative(bundled_dtm):
    model = fit_topics(bundled_dtm, EmConfig(n_components=3, seed=0))
    for t in range(3):
        assert np.all(smcc(model, t) >= 0.0)


def test_smcc_monotone_in_covariance_magnitude():
    base = np.array([[0.2, 0.05], [0.05, 0.3]])
    mean = [0.4, 0.4]
    lo = _manual_model([mean], [base], [1.0], ["a", "b"])
    hi_cov = base.copy()
    hi_cov[0, 1] = hi_cov[1, 0] = -0.2  # larger magnitude, opposite sign
    hi = _manual_model([mean], [hi_cov], [1.0], ["a", "b"])
    assert smcc(hi, 0)[0] > smcc(lo, 0)[0]


def test_keyword_rank_stable_under_vocabulary_permutation():
    rng = np.random.default_rng(31)
    dim = 8
    a = rng.normal(size=(dim, dim))
    cov = a @ a.T
    mean = rng.uniform(0.01, 1, size=dim)
    terms = [f"w{i}" for i in range(dim)]
    model = _manual_model([mean], [cov], [1.0], terms)
    ranked = [t for t, _s, _m in top_keywords(model, 0, dim).entries]

    perm = rng.permutation(dim)
    # Vocabulary stays sorted, so permute the data columns consistently
    perm_terms = [terms[i] for i in perm]
    order = np.argsort(perm_terms)
    cols = perm[order]
    model2 = _manual_model([mean[cols]], [cov[np.ix_(cols, cols)]], [1.0],
                           [terms[i] for i in cols])
    ranked2 = [t for t, _s, _m in top_keywords(model2, 0, dim).entries]
    assert ranked == ranked2


def test_top_keywords_full_ranking_and_ties():
    model = _manual_model(
        means=[[0.5, 0.5, 0.5]],
        covs=[np.eye(3) * 0.1],
        weights=[1.0],
        terms=["zeta", "alpha", "mid"],
    )
    ranked = top_keywords(model, 0, 3)
    # identical scores: lexicographic fallback
    assert [t for t, _s, _m in ranked.entries] == ["alpha", "mid", "zeta"]
    scores = [s for _t, s, _m in ranked.entries]
    assert scores == sorted(scores, reverse=True)
    with pytest.raises(ConfigError):
        top_keywords(model, 0, 4)


def _block_corpus():
    left = [ProcessedDocument(f"L{i}", ("alpha", "bravo", "alpha", "bravo", "civet")) for i in range(4)]
    right = [ProcessedDocument(f"R{i}", ("xray", "yankee", "xray", "zulu", "zulu")) for i in range(4)]
    docs = left + right
    vocab = Vocabulary.from_terms({t for d in docs for t in d.tokens})
    return docs, tfidf(docs, vocab)


def test_fit_topics_separates_disjoint_blocks():
    docs, dtm = _block_corpus()
    model = fit_topics(dtm, EmConfig(n_components=2, seed=1))
    left_assign = set(model.assignments[:4].tolist())
    right_assign = set(model.assignments[4:].tolist())
    assert len(left_assign) == 1 and len(right_assign) == 1
    assert left_assign != right_assign


def test_fit_topics_k1_assigns_all_zero(bundled_dtm):
    model = fit_topics(bundled_dtm, EmConfig(n_components=1, seed=0))
    assert np.all(model.assignments == 0)


def test_fit_topics_deterministic(bundled_dtm):
    a = fit_topics(bundled_dtm, EmConfig(n_components=3, seed=11))
    b = fit_topics(bundled_dtm, EmConfig(n_components=3, seed=11))
    assert np.array_equal(a.assignments, b.assignments)
    assert np.array_equal(a.topic_covariances, b.topic_covariances)


def test_diagonal_fit_derives_full_covariance_from_responsibilities(bundled_dtm):
    model = fit_topics(bundled_dtm, EmConfig(n_components=3, seed=2))
    r = model.responsibilities.matrix
    for j in range(3):
        mean, cov = oracles.weighted_moments(bundled_dtm.values, r[:, j])
        # the stored mean comes from the M step with the same responsibilities
        assert_allclose(model.gmm.components[j].mean, mean, atol=1e-8)
        assert_allclose(model.topic_covariances[j], cov, atol=1e-8)


def test_full_mode_reuses_component_covariance():
    docs, dtm = _block_corpus()
    cfg = EmConfig(n_components=2, covariance="full-shrinkage", shrinkage=0.2, seed=3)
    model = fit_topics(dtm, cfg)
    for j in range(2):
        assert_allclose(
            model.topic_covariances[j], model.gmm.components[j].cov.full, atol=0
        )


def test_responsibility_mass_sums_to_document_count(bundled_dtm):
    model = fit_topics(bundled_dtm, EmConfig(n_components=3, seed=4))
    assert_allclose(model.responsibilities.matrix.sum(), bundled_dtm.n_docs, atol=1e-9)


def test_assign_topic_prototype_document():
    docs, dtm = _block_corpus()
    model = fit_topics(dtm, EmConfig(n_components=2, seed=5))
    for j in range(2):
        res = assign_topic(model, model.gmm.components[j].mean)
        assert res.topic == j
        assert res.responsibility > 0.99
        assert not res.low_confidence


def test_assign_topic_k1():
    docs, dtm = _block_corpus()
    model = fit_topics(dtm, EmConfig(n_components=1, seed=6))
    res = assign_topic(model, dtm.values[0])
    assert (res.topic, res.responsibility) == (0, 1.0)


def test_assign_topic_zero_row_defined():
    docs, dtm = _block_corpus()
    model = fit_topics(dtm, EmConfig(n_components=2, seed=7))
    res = assign_topic(model, np.zeros(dtm.n_terms))
    assert 0 <= res.topic < 2
    if res.responsibility < 0.5 + 0.1:
        assert res.low_confidence


def test_assign_topic_invariant_to_weight_rescaling(bundled_dtm):
    model = fit_topics(bundled_dtm, EmConfig(n_components=3, seed=8))
    before = [assign_topic(model, row).topic for row in bundled_dtm.values]
    model.gmm.weights = model.gmm.weights * 5.0 / (model.gmm.weights * 5.0).sum()
    after = [assign_topic(model, row).topic for row in bundled_dtm.values]
    assert before == after


def test_assign_topic_rejects_bad_input(bundled_dtm):
    model = fit_topics(bundled_dtm, EmConfig(n_components=2, seed=9))
    with pytest.raises(ConfigError):
        assign_topic(model, np.zeros(3))
    bad = np.zeros(bundled_dtm.n_terms)
    bad[0] = np.inf
    from mgtopics.errors import NumericalError

    with pytest.raises(NumericalError):
        assign_topic(model, bad)


def test_keyword_report_shapes(bundled_dtm):
    model = fit_topics(bundled_dtm, EmConfig(n_components=3, seed=10))
    report = keywords_report(model, 10)
    assert [t["topic"] for t in report["topics"]] == [0, 1, 2]
    for entry in report["topics"]:
        assert len(entry["keywords"]) == 10
        for kw in entry["keywords"]:
            assert set(kw) == {"term", "smcc", "mean_tfidf"}
    lines = keywords_csv_lines(model, 10)
    assert lines[0] == "topic,rank,term,smcc"
    assert len(lines) == 1 + 3 * 10
    assert lines[1].startswith("0,1,")
    lists = keyword_lists(model, 10)
    assert len(lists) == 3 and all(len(x) == 10 for x in lists)


def test_bundled_statistics_topic_leads_with_statistics_terms(bundled_raw, bundled_dtm):
    # topic containing the statistics documents should surface the
    # characteristic distribution vocabulary at the top of its ranking
    model = fit_topics(bundled_dtm, EmConfig(n_components=3, seed=0))
    labels = [d.label for d in bundled_raw]
    stat_rows = [i for i, lab in enumerate(labels) if lab == "Statistics"]
    stat_topic = np.bincount(model.assignments[stat_rows]).argmax()
    top10 = {t for t, _s, _m in top_keywords(model, int(stat_topic), 10).entries}
    hits = top10 & {"probability", "distribution", "variable", "random"}
    assert len(hits) >= 3
