"""Multivariate Gaussian topic modelling over TF-IDF document vectors.

Documents become rows of a TF-IDF matrix and are modelled as a Gaussian
mixture; each mixture component is a topic over the vocabulary. Keywords
are ranked by a mean-covariance contribution score. An LDA baseline
(collapsed Gibbs sampling), Cv coherence, and a pooled-variance t-test
support model comparison.
"""

from .corpus import (
    PipelineConfig,
    ProcessedDocument,
    RawDocument,
    Vocabulary,
    build_vocabulary,
    load_corpus,
    preprocess,
)
from .errors import (
    ConfigError,
    DataError,
    NumericalError,
    StateMismatchError,
    TopicModelError,
)
from .evaluation import (
    CoherenceConfig,
    CoherenceReport,
    TTestResult,
    cv_coherence,
    pooled_t_test,
    select_topic_count,
)
from .gaussian import EmConfig, GmmModel, Responsibilities, e_step, fit_em, log_density, m_step
from .lda import LdaConfig, LdaModel, fit_lda, lda_top_words, log_perplexity
from .topics import MgdTopicModel, TopicKeywords, assign_topic, fit_topics, smcc, top_keywords
from .vectorizer import DocTermMatrix, tfidf

__version__ = "0.1.0"

__all__ = [
    "PipelineConfig",
    "ProcessedDocument",
    "RawDocument",
    "Vocabulary",
    "build_vocabulary",
    "load_corpus",
    "preprocess",
    "ConfigError",
    "DataError",
    "NumericalError",
    "StateMismatchError",
    "TopicModelError",
    "CoherenceConfig",
    "CoherenceReport",
    "TTestResult",
    "cv_coherence",
    "pooled_t_test",
    "select_topic_count",
    "EmConfig",
    "GmmModel",
    "Responsibilities",
    "e_step",
    "fit_em",
    "log_density",
    "m_step",
    "LdaConfig",
    "LdaModel",
    "fit_lda",
    "lda_top_words",
    "log_perplexity",
    "MgdTopicModel",
    "TopicKeywords",
    "assign_topic",
    "fit_topics",
    "smcc",
    "top_keywords",
    "DocTermMatrix",
    "tfidf",
    "__version__",
]
