"""LDA baseline fitted by collapsed Gibbs sampling.

Documents are multinomial mixtures of topics and topics multinomial
distributions over the vocabulary, with symmetric Dirichlet priors
(document-topic strength eta, topic-word strength rho). The multinomial
parameters are integrated out and per-token topic assignments resampled
from their collapsed conditionals. Document length is conditioned on, not
modeled.
"""

from collections.abc import Sequence
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .corpus import ProcessedDocument, Vocabulary
from .errors import ConfigError, DataError

DEFAULT_TOPIC_WORD_PRIOR = 0.01


@dataclass
class LdaConfig:
    n_topics: int
    doc_topic_prior: Optional[float] = None  # eta; default 50 / n_topics
    topic_word_prior: float = DEFAULT_TOPIC_WORD_PRIOR  # rho
    iterations: int = 200
    burn_in: int = 100
    seed: int = 0
    average_samples: bool = False  # average post-burn-in estimates instead of
    # taking the final sample (final sample is the reproducible default)

    def __post_init__(self):
        if self.n_topics < 1:
            raise ConfigError("n_topics must be >= 1")
        if self.doc_topic_prior is not None and self.doc_topic_prior <= 0:
            raise ConfigError("doc_topic_prior (eta) must be positive")
        if self.topic_word_prior <= 0:
            raise ConfigError("topic_word_prior (rho) must be positive")
        if not 0 <= self.burn_in < self.iterations:
            raise ConfigError("burn-in must satisfy 0 <= burn_in < iterations")

    @property
    def eta(self) -> float:
        return self.doc_topic_prior if self.doc_topic_prior is not None else 50.0 / self.n_topics

    @property
    def rho(self) -> float:
        return self.topic_word_prior


class GibbsSampler:
    """Collapsed Gibbs chain over token-topic assignments.

    Shared count tables mutate during a sweep, so a sweep is sequential;
    independent chains (distinct seeds) can run in parallel.
    """

    def __init__(
        self,
        doc_tokens: list[list[int]],
        n_terms: int,
        n_topics: int,
        eta: float,
        rho: float,
        rng: np.random.Generator,
    ):
        self.doc_tokens = doc_tokens
        self.n_terms = n_terms
        self.n_topics = n_topics
        self.eta = eta
        self.rho = rho
        self.rng = rng
        n_docs = len(doc_tokens)
        self.doc_topic_counts = np.zeros((n_docs, n_topics), dtype=np.int64)
        self.topic_word_counts = np.zeros((n_topics, n_terms), dtype=np.int64)
        self.topic_counts = np.zeros(n_topics, dtype=np.int64)
        self.assignments: list[list[int]] = []
        for d, tokens in enumerate(doc_tokens):
            zs = []
            for w in tokens:
                z = int(rng.integers(n_topics))
                zs.append(z)
                self.doc_topic_counts[d, z] += 1
                self.topic_word_counts[z, w] += 1
                self.topic_counts[z] += 1
            self.assignments.append(zs)

    def sweep(self) -> None:
        """One full pass resampling every token's topic."""
        eta, rho = self.eta, self.rho
        smooth = self.n_terms * rho
        for d, tokens in enumerate(self.doc_tokens):
            zs = self.assignments[d]
            dk = self.doc_topic_counts[d]
            for pos, w in enumerate(tokens):
                z = zs[pos]
                dk[z] -= 1
                self.topic_word_counts[z, w] -= 1
                self.topic_counts[z] -= 1
                probs = (dk + eta) * (self.topic_word_counts[:, w] + rho)
                probs /= self.topic_counts + smooth
                cum = np.cumsum(probs)
                z = int(np.searchsorted(cum, self.rng.random() * cum[-1], side="right"))
                if z >= self.n_topics:
                    z = self.n_topics - 1
                zs[pos] = z
                dk[z] += 1
                self.topic_word_counts[z, w] += 1
                self.topic_counts[z] += 1

    def state(self) -> tuple[int, ...]:
        return tuple(z for zs in self.assignments for z in zs)

    def recount(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Rebuild all count tables from the assignments (consistency oracle)."""
        dk = np.zeros_like(self.doc_topic_counts)
        kw = np.zeros_like(self.topic_word_counts)
        k = np.zeros_like(self.topic_counts)
        for d, tokens in enumerate(self.doc_tokens):
            for pos, w in enumerate(tokens):
                z = self.assignments[d][pos]
                dk[d, z] += 1
                kw[z, w] += 1
                k[z] += 1
        return dk, kw, k

    def topic_word_estimate(self) -> np.ndarray:
        num = self.topic_word_counts + self.rho
        return num / num.sum(axis=1, keepdims=True)

    def doc_topic_estimate(self) -> np.ndarray:
        num = self.doc_topic_counts + self.eta
        return num / num.sum(axis=1, keepdims=True)


@dataclass
class LdaModel:
    topic_word: np.ndarray  # K x V, rows on the simplex
    doc_topic: np.ndarray  # N x K, rows on the simplex
    assignments: list[list[int]]
    doc_topic_counts: np.ndarray
    topic_word_counts: np.ndarray
    vocab: Vocabulary
    doc_ids: tuple[str, ...]
    eta: float
    rho: float
    seed: int

    @property
    def n_topics(self) -> int:
        return self.topic_word.shape[0]

    @property
    def n_terms(self) -> int:
        return self.topic_word.shape[1]


def _token_ids(docs: Sequence[ProcessedDocument], vocab: Vocabulary) -> list[list[int]]:
    ids = []
    for doc in docs:
        ids.append([vocab.index[t] for t in doc.tokens if t in vocab.index])
    return ids


def fit_lda(docs: Sequence[ProcessedDocument], vocab: Vocabulary, cfg: LdaConfig) -> LdaModel:
    """Run the collapsed Gibbs chain and read off smoothed point estimates.

    Deterministic per seed. Out-of-vocabulary tokens are skipped.
    """
    if not docs:
        raise DataError("cannot fit LDA on an empty corpus")
    doc_tokens = _token_ids(docs, vocab)
    if all(len(t) == 0 for t in doc_tokens):
        raise DataError("cannot fit LDA: no in-vocabulary tokens in any document")

    rng = np.random.default_rng(cfg.seed)
    sampler = GibbsSampler(doc_tokens, len(vocab), cfg.n_topics, cfg.eta, cfg.rho, rng)

    if cfg.average_samples:
        acc_tw = np.zeros_like(sampler.topic_word_counts, dtype=float)
        acc_dt = np.zeros_like(sampler.doc_topic_counts, dtype=float)
        kept = 0
        for it in range(cfg.iterations):
            sampler.sweep()
            if it >= cfg.burn_in:
                acc_tw += sampler.topic_word_estimate()
                acc_dt += sampler.doc_topic_estimate()
                kept += 1
        topic_word = acc_tw / kept
        doc_topic = acc_dt / kept
    else:
        for _ in range(cfg.iterations):
            sampler.sweep()
        topic_word = sampler.topic_word_estimate()
        doc_topic = sampler.doc_topic_estimate()

    return LdaModel(
        topic_word=topic_word,
        doc_topic=doc_topic,
        assignments=sampler.assignments,
        doc_topic_counts=sampler.doc_topic_counts.copy(),
        topic_word_counts=sampler.topic_word_counts.copy(),
        vocab=vocab,
        doc_ids=tuple(d.id for d in docs),
        eta=cfg.eta,
        rho=cfg.rho,
        seed=cfg.seed,
    )


def lda_top_words(model: LdaModel, topic: int, n: int) -> list[tuple[str, float]]:
    """Top-n vocabulary terms of one topic, descending probability."""
    if not 0 <= topic < model.n_topics:
        raise ConfigError(f"topic {topic} out of range [0, {model.n_topics})")
    if n > model.n_terms:
        raise ConfigError(f"n={n} exceeds vocabulary size {model.n_terms}")
    row = model.topic_word[topic]
    order = sorted(range(model.n_terms), key=lambda i: (-row[i], model.vocab.terms[i]))
    return [(model.vocab.terms[i], float(row[i])) for i in order[:n]]


def lda_keyword_lists(model: LdaModel, n: int = 10) -> list[list[str]]:
    return [
        [term for term, _p in lda_top_words(model, topic, n)]
        for topic in range(model.n_topics)
    ]


def log_perplexity(model: LdaModel, docs: Sequence[ProcessedDocument]) -> float:
    """Average negative log-likelihood per in-vocabulary token.

    Token likelihood mixes topics through the document's topic distribution:
    sum_j doc_topic[d, j] * topic_word[j, w]. Lower is better.
    """
    total_loglik = 0.0
    total_tokens = 0
    for row, doc in enumerate(docs):
        mix = model.doc_topic[row] @ model.topic_word  # length-V token probs
        for token in doc.tokens:
            col = model.vocab.index.get(token)
            if col is None:
                continue
            total_loglik += float(np.log(mix[col]))
            total_tokens += 1
    if total_tokens == 0:
        raise DataError("no in-vocabulary tokens to evaluate")
    return -total_loglik / total_tokens


def model_to_dict(model: LdaModel, corpus_hash: Optional[str] = None) -> dict:
    payload = {
        "K": model.n_topics,
        "V": model.n_terms,
        "eta": model.eta,
        "rho": model.rho,
        "gamma": model.topic_word.tolist(),
        "beta": model.doc_topic.tolist(),
        "seed": model.seed,
        "doc_ids": list(model.doc_ids),
    }
    if corpus_hash is not None:
        payload["corpus_hash"] = corpus_hash
    return payload


def model_from_dict(payload: dict, vocab: Vocabulary) -> LdaModel:
    topic_word = np.asarray(payload["gamma"], dtype=float)
    doc_topic = np.asarray(payload["beta"], dtype=float)
    return LdaModel(
        topic_word=topic_word,
        doc_topic=doc_topic,
        assignments=[],
        doc_topic_counts=np.zeros_like(doc_topic, dtype=np.int64),
        topic_word_counts=np.zeros_like(topic_word, dtype=np.int64),
        vocab=vocab,
        doc_ids=tuple(payload.get("doc_ids", [])),
        eta=float(payload["eta"]),
        rho=float(payload["rho"]),
        seed=int(payload["seed"]),
    )
