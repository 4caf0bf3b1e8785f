"""Manuscript ingestion: text normalization, manifests and corpus splits."""

from __future__ import annotations

import math
import re
from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass
from types import MappingProxyType
from typing import IO

import numpy as np

from .errors import DataError, EmptyDocumentError, ManifestError

# Roman numerals are stored between exclamation marks, e.g. "!xv!".
_NUMBER = re.compile(r"![^!]*!")
NUMBER_TOKEN = "#"


def _keep(ch: str) -> bool:
    return ch.isalpha() or ch.isdigit() or ch == NUMBER_TOKEN or ch.isspace()


def normalize_text(raw: str) -> list[str]:
    """Turn raw manuscript text into its word tokens.

    Each paired ``!...!`` number becomes the token ``#``; every remaining
    character that is not a letter, digit, ``#`` or whitespace is deleted
    (so ``est,`` becomes ``est`` and an unpaired ``!`` vanishes).  Case is
    preserved and repeated words are kept.

    Raises
    ------
    EmptyDocumentError
        If nothing is left after normalization.
    """
    text = _NUMBER.sub(f" {NUMBER_TOKEN} ", raw)
    text = "".join(ch for ch in text if _keep(ch))
    tokens = text.split()
    if not tokens:
        raise EmptyDocumentError("document is empty after normalization")
    return tokens


def _is_clean_token(tok: str) -> bool:
    return bool(tok) and all(ch.isalpha() or ch.isdigit() or ch == NUMBER_TOKEN for ch in tok)


@dataclass(frozen=True)
class Document:
    id: str
    tokens: tuple[str, ...]
    date: int | None = None

    def __post_init__(self):
        if not isinstance(self.tokens, tuple):
            object.__setattr__(self, "tokens", tuple(self.tokens))
        if not self.tokens:
            raise EmptyDocumentError(f"document {self.id!r} has no tokens")
        if self.date is not None and (not isinstance(self.date, (int, np.integer)) or self.date <= 0):
            raise DataError(f"document {self.id!r}: date must be a positive integer year, got {self.date!r}")
        if self.date is not None:
            object.__setattr__(self, "date", int(self.date))

    @classmethod
    def from_text(cls, id: str, raw: str, date: int | None = None) -> Document:
        return cls(id=id, tokens=tuple(normalize_text(raw)), date=date)

    @property
    def dated(self) -> bool:
        return self.date is not None

    def validate_tokens(self) -> None:
        """Check the no-whitespace/no-punctuation token invariant (O(n), so not run on construction)."""
        bad = [t for t in self.tokens if not _is_clean_token(t)]
        if bad:
            raise DataError(f"document {self.id!r} has unnormalized tokens: {bad[:3]!r}")


class Corpus(Mapping[str, Document]):
    """An immutable, insertion-ordered collection of documents keyed by id."""

    def __init__(self, documents: Iterable[Document] = ()):
        docs: dict[str, Document] = {}
        for doc in documents:
            if doc.id in docs:
                raise DataError(f"duplicate document id {doc.id!r}")
            docs[doc.id] = doc
        self._docs = MappingProxyType(docs)

    def __getitem__(self, key: str) -> Document:
        return self._docs[key]

    def __iter__(self) -> Iterator[str]:
        return iter(self._docs)

    def __len__(self) -> int:
        return len(self._docs)

    def __repr__(self) -> str:
        return f"Corpus({len(self)} documents, {len(self.dated())} dated)"

    def documents(self) -> list[Document]:
        return list(self._docs.values())

    def dated(self) -> Corpus:
        return Corpus(d for d in self._docs.values() if d.dated)

    def undated(self) -> Corpus:
        return Corpus(d for d in self._docs.values() if not d.dated)

    def dates(self) -> dict[str, int]:
        return {d.id: d.date for d in self._docs.values() if d.dated}

    def subset(self, ids: Iterable[str]) -> Corpus:
        return Corpus(self._docs[i] for i in ids)

    def sorted_by_date(self) -> list[Document]:
        """Dated documents from earliest to latest, ties broken by id."""
        return sorted((d for d in self._docs.values() if d.dated), key=lambda d: (d.date, d.id))

    def mean_date(self) -> float:
        dates = [d.date for d in self._docs.values() if d.dated]
        if not dates:
            raise DataError("corpus has no dated documents")
        return math.fsum(dates) / len(dates)


# -- manifests ----------------------------------------------------------------


def parse_manifest(stream: IO[str] | Iterable[str]) -> Corpus:
    """Read a ``id TAB date TAB raw-text`` manifest.

    An empty date field marks an undated document.  Lines starting with
    ``#`` in column 0 and blank lines are skipped.
    """
    docs: dict[str, Document] = {}
    for lineno, line in enumerate(stream, start=1):
        line = line.rstrip("\r\n")
        if not line.strip() or line.startswith("#"):
            continue
        fields = line.split("\t", 2)
        if len(fields) != 3:
            raise ManifestError(f"expected 3 TAB-separated fields, got {len(fields)}", lineno)
        doc_id, date_field, raw = fields
        doc_id = doc_id.strip()
        if not doc_id:
            raise ManifestError("empty document id", lineno)
        if doc_id in docs:
            raise ManifestError(f"duplicate document id {doc_id!r}", lineno)
        date_field = date_field.strip()
        date = None
        if date_field:
            try:
                date = int(date_field)
            except ValueError:
                raise ManifestError(f"date {date_field!r} is not a decimal year", lineno) from None
            if date <= 0:
                raise ManifestError(f"date {date} is not a positive year", lineno)
        try:
            docs[doc_id] = Document.from_text(doc_id, raw, date)
        except EmptyDocumentError:
            raise ManifestError(f"document {doc_id!r} is empty after normalization", lineno) from None
    return Corpus(docs.values())


def read_manifest(path) -> Corpus:
    with open(path, encoding="utf-8") as fh:
        return parse_manifest(fh)


def write_manifest(corpus: Iterable[Document] | Corpus, stream: IO[str]) -> None:
    docs = corpus.documents() if isinstance(corpus, Corpus) else corpus
    for doc in docs:
        date = "" if doc.date is None else str(doc.date)
        stream.write(f"{doc.id}\t{date}\t{' '.join(doc.tokens)}\n")


# -- splits -------------------------------------------------------------------


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 1.0
    validation_fraction: float = 0.0
    test_fraction: float = 0.0
    seed: int = 0

    def __post_init__(self):
        fracs = (self.train_fraction, self.validation_fraction, self.test_fraction)
        if any(not 0.0 <= f <= 1.0 for f in fracs):
            raise ValueError(f"split fractions must lie in [0, 1], got {fracs}")
        if abs(math.fsum(fracs) - 1.0) > 1e-9:
            raise ValueError(f"split fractions must sum to 1, got {math.fsum(fracs)!r}")

    def sizes(self, n: int) -> tuple[int, int, int]:
        n_val = math.floor(n * self.validation_fraction + 0.5)
        n_test = math.floor(n * self.test_fraction + 0.5)
        n_val = min(n_val, n)
        n_test = min(n_test, n - n_val)
        return n - n_val - n_test, n_val, n_test


def split_corpus(corpus: Corpus, spec: SplitSpec) -> tuple[Corpus, Corpus, Corpus]:
    """Randomly partition a dated corpus into train/validation/test.

    Ids are put in canonical (sorted) order, shuffled with ``spec.seed`` and
    sliced; rounding remainders go to the training set.
    """
    undated = [d.id for d in corpus.values() if not d.dated]
    if undated:
        raise DataError(f"cannot split: {len(undated)} undated documents, e.g. {undated[0]!r}")
    ids = sorted(corpus)
    n_train, n_val, n_test = spec.sizes(len(ids))
    order = np.random.default_rng(spec.seed).permutation(len(ids))
    shuffled = [ids[i] for i in order]
    val = sorted(shuffled[:n_val])
    test = sorted(shuffled[n_val:n_val + n_test])
    train = sorted(shuffled[n_val + n_test:])
    return corpus.subset(train), corpus.subset(val), corpus.subset(test)
