"""Gaussian topic model over the TF-IDF matrix.

Documents form a Gaussian mixture; each mixture component is one topic over
the vocabulary. Keywords are ranked by the mean-covariance contribution
score: the topic-mean TF-IDF of a term times the sum of its squared
covariances with every term (squaring keeps opposite-signed covariances
from cancelling).
"""

from collections.abc import Sequence
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import gaussian
from .corpus import Vocabulary
from .errors import ConfigError, NumericalError
from .gaussian import EmConfig, GmmModel, Responsibilities
from .vectorizer import DocTermMatrix


@dataclass
class MgdTopicModel:
    gmm: GmmModel
    vocab: Vocabulary
    # Full V x V weighted sample covariance per topic, used only for keyword
    # scoring (EM itself may have run diagonal).
    topic_covariances: np.ndarray
    assignments: np.ndarray
    responsibilities: Responsibilities

    @property
    def n_topics(self) -> int:
        return self.gmm.n_components

    def topic_mean(self, topic: int) -> np.ndarray:
        return self.gmm.components[topic].mean


@dataclass
class TopicKeywords:
    topic: int
    entries: list[tuple[str, float, float]]  # (term, smcc score, mean tfidf)


class TopicAssignment(NamedTuple):
    topic: int
    responsibility: float
    low_confidence: bool


def _posthoc_full_covariances(
    data: np.ndarray, model: GmmModel, resp: Responsibilities
) -> np.ndarray:
    """Weighted sample covariance of every topic from final responsibilities."""
    r = resp.matrix
    k = model.n_components
    n_dims = data.shape[1]
    covs = np.zeros((k, n_dims, n_dims))
    masses = r.sum(axis=0)
    for j in range(k):
        if masses[j] <= 0:
            continue
        diff = data - model.components[j].mean
        covs[j] = (r[:, j, None] * diff).T @ diff / masses[j]
        covs[j] = 0.5 * (covs[j] + covs[j].T)
    return covs


def fit_topics(dtm: DocTermMatrix, cfg: EmConfig) -> MgdTopicModel:
    """Fit the document mixture and derive per-topic keyword covariances.

    Each document gets exactly one topic: the argmax of its responsibility
    row. When EM ran with diagonal covariance, the full covariance needed by
    the keyword score is computed afterwards from the final responsibilities.
    """
    model, resp = gaussian.fit_em(dtm.values, cfg)
    if cfg.covariance == "diagonal":
        covs = _posthoc_full_covariances(dtm.values, model, resp)
    else:
        covs = np.stack([comp.cov.full for comp in model.components])
    assignments = np.argmax(resp.matrix, axis=1)
    return MgdTopicModel(
        gmm=model,
        vocab=dtm.vocab,
        topic_covariances=covs,
        assignments=assignments,
        responsibilities=resp,
    )


def smcc(model: MgdTopicModel, topic: int) -> np.ndarray:
    """Mean-covariance contribution score of every term for one topic.

    score_i = mean_tfidf_i * sum_j cov(i, j)^2, the sum running over the
    full covariance row including the diagonal variance.
    """
    if not 0 <= topic < model.n_topics:
        raise ConfigError(f"topic {topic} out of range [0, {model.n_topics})")
    mean = model.gmm.components[topic].mean
    cov = model.topic_covariances[topic]
    return mean * np.sum(cov * cov, axis=1)


def top_keywords(model: MgdTopicModel, topic: int, n: int = 10) -> TopicKeywords:
    """Top-n terms by score, descending, ties broken lexicographically."""
    n_terms = len(model.vocab)
    if not 1 <= n <= n_terms:
        raise ConfigError(f"n={n} must lie in [1, {n_terms}]")
    scores = smcc(model, topic)
    mean = model.gmm.components[topic].mean
    order = sorted(range(n_terms), key=lambda i: (-scores[i], model.vocab.terms[i]))
    entries = [
        (model.vocab.terms[i], float(scores[i]), float(mean[i])) for i in order[:n]
    ]
    return TopicKeywords(topic=topic, entries=entries)


def assign_topic(model: MgdTopicModel, doc_row: np.ndarray) -> TopicAssignment:
    """Assign a (possibly unseen) TF-IDF row to its posterior-argmax topic.

    Flagged low-confidence when the winning posterior is within 0.1 of the
    uniform level 1/K.
    """
    doc_row = np.asarray(doc_row, dtype=float)
    if doc_row.shape != (len(model.vocab),):
        raise ConfigError(
            f"document row has shape {doc_row.shape}, expected ({len(model.vocab)},)"
        )
    if not np.all(np.isfinite(doc_row)):
        raise NumericalError("document row contains non-finite values")
    resp, _ = gaussian.e_step(doc_row[None, :], model.gmm)
    row = resp.matrix[0]
    topic = int(np.argmax(row))
    best = float(row[topic])
    threshold = 1.0 / model.n_topics + 0.1
    return TopicAssignment(topic=topic, responsibility=best, low_confidence=best < threshold)


def keywords_report(model: MgdTopicModel, n: int = 10) -> dict:
    """JSON-ready keyword report for every topic."""
    topics = []
    for topic in range(model.n_topics):
        ranked = top_keywords(model, topic, n)
        topics.append(
            {
                "topic": topic,
                "keywords": [
                    {"term": term, "smcc": score, "mean_tfidf": mean}
                    for term, score, mean in ranked.entries
                ],
            }
        )
    return {"topics": topics}


def keywords_csv_lines(model: MgdTopicModel, n: int = 10) -> list[str]:
    """CSV rows (topic, rank, term, smcc) for every topic."""
    lines = ["topic,rank,term,smcc"]
    for topic in range(model.n_topics):
        ranked = top_keywords(model, topic, n)
        for rank, (term, score, _mean) in enumerate(ranked.entries, start=1):
            lines.append(f"{topic},{rank},{term},{format(score, '.17g')}")
    return lines


def keyword_lists(model: MgdTopicModel, n: int = 10) -> list[list[str]]:
    """Plain top-n term lists per topic (coherence evaluation input)."""
    return [
        [term for term, _s, _m in top_keywords(model, topic, n).entries]
        for topic in range(model.n_topics)
    ]
