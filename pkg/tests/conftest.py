import pytest

from mgtopics import assets, corpus, vectorizer


@pytest.fixture(scope="session")
def pipeline_cfg():
    return corpus.PipelineConfig.default()


@pytest.fixture(scope="session")
def bundled_raw():
    return assets.bundled_corpus()


@pytest.fixture(scope="session")
def bundled_docs(bundled_raw, pipeline_cfg):
    return [corpus.preprocess(d, pipeline_cfg) for d in bundled_raw]


@pytest.fixture(scope="session")
def bundled_vocab(bundled_docs, pipeline_cfg):
    return corpus.build_vocabulary(bundled_docs, pipeline_cfg)


@pytest.fixture(scope="session")
def bundled_dtm(bundled_docs, bundled_vocab):
    return vectorizer.tfidf(bundled_docs, bundled_vocab)
