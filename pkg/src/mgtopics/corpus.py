"""Corpus ingestion and text preprocessing.

The pipeline normalizes raw documents into lemma token sequences:
lower-case, punctuation stripping, whitespace tokenization, stopword and
minimum-length filtering, dictionary+suffix-rule lemmatization, and an
optional part-of-speech filter (no-op unless a tagger is plugged in).
"""

import csv
import io
import json
import string
from collections import Counter
from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError, DataError

CORPUS_FORMATS = ("txt-dir", "jsonl", "csv")


@dataclass
class RawDocument:
    id: str
    text: str
    label: str | None = None


@dataclass(frozen=True)
class ProcessedDocument:
    id: str
    tokens: tuple[str, ...]
    label: str | None = None


@dataclass(frozen=True)
class Vocabulary:
    """Lexicographically ordered distinct terms with a term -> column map."""

    terms: tuple[str, ...]
    index: dict[str, int] = field(compare=False)

    def __post_init__(self):
        if len(set(self.terms)) != len(self.terms):
            raise ValueError("vocabulary terms must be distinct")

    @classmethod
    def from_terms(cls, terms: Iterable[str]) -> "Vocabulary":
        ordered = tuple(sorted(set(terms)))
        return cls(terms=ordered, index={t: i for i, t in enumerate(ordered)})

    def __len__(self) -> int:
        return len(self.terms)

    def __contains__(self, term: str) -> bool:
        return term in self.index


def load_stopwords(path) -> frozenset[str]:
    """Read a stopword file: UTF-8, one word per line, '#' comments."""
    words = set()
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            word = line.split("#", 1)[0].strip().lower()
            if word:
                words.add(word)
    return frozenset(words)


def load_lemma_dictionary(path) -> dict[str, str]:
    """Read a lemma dictionary: UTF-8 TSV, surface-form TAB lemma."""
    table = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2 or not parts[0] or not parts[1]:
                raise DataError(f"{path}: line {lineno}: expected 'surface<TAB>lemma'")
            table[parts[0].strip().lower()] = parts[1].strip().lower()
    return table


@dataclass
class PipelineConfig:
    stopwords: frozenset[str]
    lemma_overrides: dict[str, str]
    punctuation: str = string.punctuation
    min_token_length: int = 1
    min_document_frequency: int = 1
    pos_filter: frozenset[str] | None = None
    pos_tagger: Callable[[Sequence[str]], Sequence[str]] | None = None
    allow_empty: bool = False

    def __post_init__(self):
        if self.min_token_length < 1:
            raise ConfigError("min-token-length must be >= 1")
        if self.min_document_frequency < 1:
            raise ConfigError("min-document-frequency must be >= 1")
        if self.pos_filter is not None and self.pos_tagger is None:
            raise ConfigError("pos-filter requires a pos-tagger to be plugged in")

    @classmethod
    def default(cls, stopword_file=None, lemma_file=None, **kwargs) -> "PipelineConfig":
        """Build a config from bundled assets, overridable by files."""
        from . import assets

        stops = load_stopwords(stopword_file) if stopword_file else assets.bundled_stopwords()
        lemmas = load_lemma_dictionary(lemma_file) if lemma_file else assets.bundled_lemmas()
        return cls(stopwords=stops, lemma_overrides=lemmas, **kwargs)


# Consonants eligible for undoubling after stripping -ing/-ed; 'l' and 's'
# are excluded ("falling" -> "fall", "passed" -> "pass").
_UNDOUBLE = set("bdgmnprt")


def _undouble(stem: str) -> str:
    if len(stem) >= 3 and stem[-1] == stem[-2] and stem[-1] in _UNDOUBLE:
        return stem[:-1]
    return stem


def lemmatize(token: str, overrides: dict[str, str]) -> str:
    """Map a token to its lemma via dictionary lookup, then suffix rules."""
    hit = overrides.get(token)
    if hit is not None:
        return hit
    if token.endswith("ies") and len(token) >= 5:
        return token[:-3] + "y"
    if token.endswith("sses"):
        return token[:-2]
    if token.endswith("es") and len(token) >= 4:
        stem = token[:-2]
        if stem.endswith(("x", "z", "s", "ch", "sh")):
            return stem
        return token[:-1]
    if token.endswith("s") and len(token) >= 4 and not token.endswith(("ss", "us", "is")):
        return token[:-1]
    if token.endswith("ing") and len(token) >= 6:
        return _undouble(token[:-3])
    if token.endswith("eed"):
        return token[:-1] if len(token) >= 6 else token
    if token.endswith("ed") and len(token) >= 5:
        return _undouble(token[:-2])
    return token


def preprocess(doc: RawDocument, cfg: PipelineConfig) -> ProcessedDocument:
    """Run the preprocessing pipeline on one document.

    Pure per-document function; safe to call concurrently. Output tokens are
    a fixed point of the pipeline: stopword and length filters are re-applied
    after lemmatization so re-processing the rendered output is a no-op.
    """
    text = doc.text.lower()
    text = text.translate(str.maketrans(cfg.punctuation, " " * len(cfg.punctuation)))
    tokens = text.split()
    tokens = [t for t in tokens if t not in cfg.stopwords]
    tokens = [t for t in tokens if len(t) >= cfg.min_token_length]
    tokens = [lemmatize(t, cfg.lemma_overrides) for t in tokens]
    tokens = [t for t in tokens if t not in cfg.stopwords and len(t) >= cfg.min_token_length]
    if cfg.pos_tagger is not None and cfg.pos_filter is not None:
        tags = cfg.pos_tagger(tokens)
        tokens = [t for t, tag in zip(tokens, tags) if tag in cfg.pos_filter]
    return ProcessedDocument(id=doc.id, tokens=tuple(tokens), label=doc.label)


def render_tokens(doc: ProcessedDocument) -> str:
    """Render a processed document back to text (used for idempotence checks)."""
    return " ".join(doc.tokens)


def build_vocabulary(docs: Sequence[ProcessedDocument], cfg: PipelineConfig) -> Vocabulary:
    """Collect distinct terms occurring in at least min-document-frequency docs."""
    df: Counter[str] = Counter()
    for doc in docs:
        df.update(set(doc.tokens))
    if not df:
        raise DataError("empty vocabulary: preprocessing removed every token")
    kept = [t for t, n in df.items() if n >= cfg.min_document_frequency]
    if not kept:
        raise DataError(
            f"empty vocabulary: min-document-frequency={cfg.min_document_frequency} "
            "removed every term"
        )
    return Vocabulary.from_terms(kept)


def _check_unique_ids(docs: list[RawDocument]) -> None:
    seen = set()
    for doc in docs:
        if doc.id in seen:
            raise DataError(f"duplicate document id {doc.id!r}")
        seen.add(doc.id)


def _check_text(doc: RawDocument, allow_empty: bool, where: str) -> None:
    if not doc.text and not allow_empty:
        raise DataError(f"{where}: empty text (pass allow_empty to accept)")


def load_corpus(source, format: str, allow_empty: bool = False) -> list[RawDocument]:
    """Load raw documents from a directory of .txt files, JSONL, or CSV.

    Ids come from filenames (txt-dir), the record's own id field, or the
    1-based record position when absent.
    """
    if format not in CORPUS_FORMATS:
        raise ConfigError(f"unknown corpus format {format!r}; expected one of {CORPUS_FORMATS}")
    if format == "txt-dir":
        root = Path(source)
        if not root.is_dir():
            raise DataError(f"{source}: not a readable directory")
        docs = []
        for path in sorted(root.glob("*.txt")):
            text = path.read_text(encoding="utf-8")
            doc = RawDocument(id=path.stem, text=text)
            _check_text(doc, allow_empty, str(path))
            docs.append(doc)
        _check_unique_ids(docs)
        return docs

    if hasattr(source, "read"):
        stream = source
        close = False
    else:
        try:
            stream = open(source, encoding="utf-8", newline="")
        except OSError as exc:
            raise DataError(f"{source}: {exc}") from exc
        close = True
    try:
        if format == "jsonl":
            return _load_jsonl(stream, allow_empty)
        return _load_csv(stream, allow_empty)
    finally:
        if close:
            stream.close()


def _load_jsonl(stream: io.TextIOBase, allow_empty: bool) -> list[RawDocument]:
    docs = []
    explicit_ids = False
    for lineno, line in enumerate(stream, start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DataError(f"line {lineno}: invalid JSON ({exc.msg})") from exc
        if not isinstance(record, dict) or "text" not in record:
            raise DataError(f"line {lineno}: expected an object with a 'text' field")
        if "id" in record:
            explicit_ids = True
        doc = RawDocument(
            id=str(record.get("id", lineno)),
            text=str(record["text"]),
            label=record.get("label"),
        )
        _check_text(doc, allow_empty, f"line {lineno}")
        docs.append(doc)
    if explicit_ids:
        _check_unique_ids(docs)
    return docs


def _load_csv(stream: io.TextIOBase, allow_empty: bool) -> list[RawDocument]:
    reader = csv.reader(stream)
    try:
        header = next(reader)
    except StopIteration:
        return []
    header = [h.strip().lower() for h in header]
    if header[:2] != ["id", "text"]:
        raise DataError("csv header must start with 'id,text'")
    has_label = len(header) > 2 and header[2] == "label"
    docs = []
    for rowno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) < 2:
            raise DataError(f"row {rowno}: expected at least id and text columns")
        label = row[2] if has_label and len(row) > 2 and row[2] else None
        doc = RawDocument(id=row[0], text=row[1], label=label)
        _check_text(doc, allow_empty, f"row {rowno}")
        docs.append(doc)
    _check_unique_ids(docs)
    return docs


def save_processed(docs: Sequence[ProcessedDocument], path) -> None:
    """Write processed documents as JSONL ({id, tokens[, label]} per line)."""
    with open(path, "w", encoding="utf-8") as fh:
        for doc in docs:
            record: dict = {"id": doc.id, "tokens": list(doc.tokens)}
            if doc.label is not None:
                record["label"] = doc.label
            fh.write(json.dumps(record, ensure_ascii=False))
            fh.write("\n")


def load_processed(path) -> list[ProcessedDocument]:
    docs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"{path}: line {lineno}: invalid JSON") from exc
            docs.append(
                ProcessedDocument(
                    id=str(record["id"]),
                    tokens=tuple(record["tokens"]),
                    label=record.get("label"),
                )
            )
    return docs


def save_vocabulary(vocab: Vocabulary, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for term in vocab.terms:
            fh.write(term)
            fh.write("\n")


def load_vocabulary(path) -> Vocabulary:
    with open(path, encoding="utf-8") as fh:
        terms = [line.strip() for line in fh if line.strip()]
    return Vocabulary.from_terms(terms)
