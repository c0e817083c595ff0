"""TF-IDF document-term matrix.

Each entry is (count/doc_length) * log(n_docs/doc_freq) with the natural
logarithm. The log base uniformly rescales columns, so it is recorded in
the matrix metadata for reproducibility.
"""

import math
import struct
from collections import Counter
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from .corpus import ProcessedDocument, Vocabulary
from .errors import DataError

DTMX_MAGIC = b"DTMX"


@dataclass
class DocTermMatrix:
    values: np.ndarray  # N x V, non-negative float64
    doc_ids: tuple[str, ...]
    vocab: Vocabulary
    log_base: str = field(default="e")

    @property
    def n_docs(self) -> int:
        return self.values.shape[0]

    @property
    def n_terms(self) -> int:
        return self.values.shape[1]


def tfidf(
    docs: Sequence[ProcessedDocument],
    vocab: Vocabulary,
    allow_empty: bool = False,
) -> DocTermMatrix:
    """Build the N x V TF-IDF matrix over ``vocab``.

    Out-of-vocabulary tokens are skipped but still count toward document
    length, keeping relative frequencies consistent with what was observed.
    Zero-length documents are an error unless ``allow_empty`` is set, in
    which case they yield all-zero rows.
    """
    n_docs = len(docs)
    n_terms = len(vocab)
    if n_docs < 1 or n_terms < 1:
        raise DataError("tfidf requires at least one document and one vocabulary term")

    # Single sequential document-frequency pass; rows are then independent.
    doc_freq = np.zeros(n_terms, dtype=np.int64)
    for doc in docs:
        for term in set(doc.tokens):
            col = vocab.index.get(term)
            if col is not None:
                doc_freq[col] += 1

    idf = np.zeros(n_terms)
    present = doc_freq > 0
    idf[present] = np.log(n_docs / doc_freq[present])

    values = np.zeros((n_docs, n_terms))
    for row, doc in enumerate(docs):
        total = len(doc.tokens)
        if total == 0:
            if not allow_empty:
                raise DataError(f"document {doc.id!r} has no tokens")
            continue
        counts = Counter(doc.tokens)
        for term, count in counts.items():
            col = vocab.index.get(term)
            if col is not None:
                values[row, col] = (count / total) * idf[col]
    return DocTermMatrix(values=values, doc_ids=tuple(d.id for d in docs), vocab=vocab)


def save_csv(dtm: DocTermMatrix, path) -> None:
    """Dump the matrix as CSV with a vocabulary header row."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("doc_id," + ",".join(dtm.vocab.terms) + "\n")
        for doc_id, row in zip(dtm.doc_ids, dtm.values):
            fh.write(doc_id + "," + ",".join(format(v, ".17g") for v in row) + "\n")


def save_dtmx(dtm: DocTermMatrix, path) -> None:
    """Binary dump: 16-byte header (magic 'DTMX', u32 N, u32 V, u32 flags)
    followed by column-major float64 values."""
    n, v = dtm.values.shape
    with open(path, "wb") as fh:
        fh.write(DTMX_MAGIC)
        fh.write(struct.pack("<III", n, v, 0))
        fh.write(np.asfortranarray(dtm.values).tobytes(order="F"))


def load_dtmx(path) -> np.ndarray:
    with open(path, "rb") as fh:
        header = fh.read(16)
        if len(header) != 16 or header[:4] != DTMX_MAGIC:
            raise DataError(f"{path}: not a DTMX file")
        n, v, _flags = struct.unpack("<III", header[4:])
        data = np.frombuffer(fh.read(), dtype=np.float64)
    if data.size != n * v:
        raise DataError(f"{path}: truncated DTMX payload")
    return data.reshape((n, v), order="F").copy()


def tfidf_entry(count: int, doc_len: int, n_docs: int, doc_freq: int) -> float:
    """Direct single-entry evaluation: (count/doc_len) * ln(n_docs/doc_freq)."""
    return (count / doc_len) * math.log(n_docs / doc_freq)
