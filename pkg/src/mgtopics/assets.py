"""Access to bundled data files: stopwords, lemma dictionary, demo corpus."""

from functools import lru_cache
from importlib import resources

from . import corpus as corpus_mod


def _data(name: str):
    return resources.files("mgtopics") / "data" / name


@lru_cache(maxsize=None)
def bundled_stopwords() -> frozenset[str]:
    with resources.as_file(_data("stopwords.txt")) as path:
        return corpus_mod.load_stopwords(path)


@lru_cache(maxsize=None)
def bundled_lemmas() -> dict[str, str]:
    with resources.as_file(_data("lemmas.tsv")) as path:
        return dict(corpus_mod.load_lemma_dictionary(path))


def bundled_corpus() -> list:
    """The packaged 18-document corpus (6 docs each on statistics, cricket,
    and military topics), labeled for tests and demos."""
    with resources.as_file(_data("corpus18.jsonl")) as path:
        return corpus_mod.load_corpus(path, "jsonl")
