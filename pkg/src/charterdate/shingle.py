"""Shingle sets, fingerprints and resemblance distances.

A shingle of order k is a run of k consecutive tokens.  Each document's
distinct shingles are fingerprinted to 64-bit integers and kept as a sorted
array, so the size of an intersection is a linear merge.  ``ExactShingleSet``
keeps the literal word tuples instead and serves as the collision-free oracle.
"""

from __future__ import annotations

import hashlib
import logging
from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass
from typing import IO

import numpy as np

from . import kernels
from .corpus import Document
from .errors import DataError, DocumentTooShortError

log = logging.getLogger(__name__)

# NUL is deleted by normalization, so it never occurs inside a token.
SEPARATOR = "\x00"
_SEP = SEPARATOR.encode()


def _digest(data: bytes) -> int:
    return int.from_bytes(hashlib.blake2b(data, digest_size=8).digest(), "little")


def fingerprint(shingle: Sequence[str]) -> int:
    """Stable 64-bit fingerprint of a shingle (a sequence of words)."""
    if not shingle:
        raise ValueError("cannot fingerprint an empty shingle")
    return _digest(SEPARATOR.join(shingle).encode("utf-8"))


def _fingerprint_array(tokens: Sequence[str], k: int) -> np.ndarray:
    encoded = [t.encode("utf-8") for t in tokens]
    fps = {_digest(_SEP.join(encoded[i:i + k])) for i in range(len(encoded) - k + 1)}
    arr = np.fromiter(fps, dtype=np.uint64, count=len(fps))
    arr.sort()
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class ShingleSet:
    """Distinct order-``k`` shingles of one document, as sorted fingerprints."""

    order: int
    fingerprints: np.ndarray

    @property
    def count(self) -> int:
        return int(self.fingerprints.size)

    def __len__(self) -> int:
        return self.count


@dataclass(frozen=True)
class ExactShingleSet:
    """Distinct order-``k`` shingles kept as literal word tuples (oracle path)."""

    order: int
    shingles: frozenset

    @property
    def count(self) -> int:
        return len(self.shingles)

    def __len__(self) -> int:
        return self.count


def _check_length(tokens: Sequence[str], k: int) -> None:
    if k < 1:
        raise ValueError(f"shingle order must be >= 1, got {k}")
    if len(tokens) < k:
        raise DocumentTooShortError(f"{len(tokens)} tokens is too short for shingles of order {k}")


def extract_shingles(tokens: Sequence[str], k: int, exact: bool = False) -> ShingleSet | ExactShingleSet:
    """Distinct shingles of order ``k``; ``exact=True`` returns word tuples."""
    _check_length(tokens, k)
    if exact:
        toks = tuple(tokens)
        return ExactShingleSet(k, frozenset(toks[i:i + k] for i in range(len(toks) - k + 1)))
    return ShingleSet(k, _fingerprint_array(tokens, k))


def resemblance_distance(a, b) -> float:
    """``1 - |A & B| / |A | B|`` for two shingle sets of the same order."""
    if a.order != b.order:
        raise ValueError(f"shingle orders differ: {a.order} vs {b.order}")
    if isinstance(a, ExactShingleSet) and isinstance(b, ExactShingleSet):
        inter = len(a.shingles & b.shingles)
        union = len(a.shingles | b.shingles)
    elif isinstance(a, ShingleSet) and isinstance(b, ShingleSet):
        inter = kernels.intersect_count(a.fingerprints, b.fingerprints)
        union = a.count + b.count - inter
    else:
        raise TypeError("cannot mix fingerprinted and exact shingle sets")
    if union == 0:
        raise ValueError("resemblance of two empty shingle sets is undefined")
    return 1.0 - inter / union


@dataclass(frozen=True)
class DistanceVector:
    orders: tuple[int, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "orders", tuple(int(k) for k in self.orders))
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if len(self.orders) != len(self.values):
            raise ValueError("orders and values differ in length")
        if any(not 0.0 <= v <= 1.0 for v in self.values):
            raise ValueError(f"distances must lie in [0, 1]: {self.values}")

    def __len__(self) -> int:
        return len(self.values)

    def __iter__(self):
        return iter(self.values)


def distance_vector(doc_i: Document, doc_j: Document, orders: Iterable[int], exact: bool = False) -> DistanceVector:
    orders = tuple(orders)
    values = [
        resemblance_distance(extract_shingles(doc_i.tokens, k, exact), extract_shingles(doc_j.tokens, k, exact))
        for k in orders
    ]
    return DistanceVector(orders, values)


# -- corpus-wide (packed) shingle storage --------------------------------------


class ShingleIndex:
    """Fingerprint sets for a list of documents, packed per order in CSR form.

    Documents shorter than an order get an empty row for it: they have zero
    resemblance to everything at that order.  Their ids are listed in
    ``too_short[k]``.
    """

    def __init__(self, documents: Sequence[Document], orders: Iterable[int]):
        self.documents = list(documents)
        self.ids = [d.id for d in self.documents]
        self.orders = tuple(sorted(set(int(k) for k in orders)))
        if not self.orders or self.orders[0] < 1:
            raise ValueError(f"invalid shingle orders {self.orders}")
        self.too_short: dict[int, list[str]] = {}
        self._data: dict[int, np.ndarray] = {}
        self._ptr: dict[int, np.ndarray] = {}
        self._spaces: dict[int, kernels.TermSpace] = {}
        for k in self.orders:
            rows, short = [], []
            for doc in self.documents:
                if len(doc.tokens) < k:
                    short.append(doc.id)
                    rows.append(np.empty(0, dtype=np.uint64))
                else:
                    rows.append(_fingerprint_array(doc.tokens, k))
            if short:
                log.warning("%d documents too short for order %d are excluded at that order", len(short), k)
            self.too_short[k] = short
            sizes = np.fromiter((r.size for r in rows), dtype=np.int64, count=len(rows))
            ptr = np.zeros(len(rows) + 1, dtype=np.int64)
            np.cumsum(sizes, out=ptr[1:])
            self._ptr[k] = ptr
            self._data[k] = np.concatenate(rows) if rows else np.empty(0, dtype=np.uint64)

    def __len__(self) -> int:
        return len(self.documents)

    def packed(self, k: int) -> tuple[np.ndarray, np.ndarray]:
        return self._data[k], self._ptr[k]

    def term_space(self, k: int) -> kernels.TermSpace:
        """Cached dense term ids of this index's order-``k`` fingerprints."""
        space = self._spaces.get(k)
        if space is None:
            space = self._spaces[k] = kernels.TermSpace(self._data[k])
        return space

    def sizes(self, k: int) -> np.ndarray:
        return np.diff(self._ptr[k])

    def shingle_set(self, i: int, k: int) -> ShingleSet:
        ptr = self._ptr[k]
        return ShingleSet(k, self._data[k][ptr[i]:ptr[i + 1]])

    def rows(self, start: int, stop: int, k: int) -> tuple[np.ndarray, np.ndarray]:
        """Packed arrays for documents ``start:stop`` at order ``k``."""
        ptr = self._ptr[k]
        sub = ptr[start:stop + 1]
        return self._data[k][sub[0]:sub[-1]], sub - sub[0]


def cross_distances(a: ShingleIndex, b: ShingleIndex, k: int, rows: slice | None = None, threads: int | None = None):
    """Dense matrix of order-``k`` resemblance distances, rows of ``a`` x all of ``b``.

    Entries with an empty union (both documents too short) are 1.
    """
    start, stop, _ = (rows or slice(0, len(a))).indices(len(a))
    a_data, a_ptr = a.rows(start, stop, k)
    b_data, b_ptr = b.packed(k)
    inter = kernels.cross_intersections(a_data, a_ptr, b_data, b_ptr, threads=threads, space=b.term_space(k))
    union = np.diff(a_ptr)[:, None] + b.sizes(k)[None, :] - inter
    with np.errstate(invalid="ignore", divide="ignore"):
        dist = 1.0 - inter / union
    dist[union == 0] = 1.0
    return dist


def mean_resemblance(a: ShingleIndex, b: ShingleIndex, k: int, threads: int | None = None, block: int = 256) -> float:
    """Mean order-``k`` resemblance over all pairs of ``a`` x ``b`` (self pairs by id excluded)."""
    total, count = 0.0, 0
    b_ids = np.asarray(b.ids, dtype=object)
    for start in range(0, len(a), block):
        stop = min(start + block, len(a))
        res = 1.0 - cross_distances(a, b, k, slice(start, stop), threads)
        self_mask = np.asarray(a.ids[start:stop], dtype=object)[:, None] == b_ids[None, :]
        res[self_mask] = 0.0
        # per-block sums in fixed order keep the result independent of threading
        total += float(res.sum())
        count += res.size - int(self_mask.sum())
    return total / count if count else 0.0


# -- sparse resemblance dump ------------------------------------------------------


def write_resemblance_dump(stream: IO[str], a: ShingleIndex, b: ShingleIndex, threads: int | None = None, block: int = 256) -> int:
    """Write ``id_i TAB id_j TAB k TAB resemblance`` for every nonzero ordered pair.

    Self pairs (same id) are skipped.  Returns the number of lines written.
    """
    written = 0
    for start in range(0, len(a), block):
        stop = min(start + block, len(a))
        blocks = {k: 1.0 - cross_distances(a, b, k, slice(start, stop), threads) for k in a.orders}
        for r in range(stop - start):
            id_i = a.ids[start + r]
            for k in a.orders:
                row = blocks[k][r]
                for j in np.flatnonzero(row > 0.0):
                    id_j = b.ids[j]
                    if id_j == id_i:
                        continue
                    stream.write(f"{id_i}\t{id_j}\t{k}\t{row[j]:.6g}\n")
                    written += 1
    return written


def read_resemblance_dump(stream: IO[str] | Iterable[str]) -> Iterator[tuple[str, str, int, float]]:
    for lineno, line in enumerate(stream, start=1):
        line = line.rstrip("\r\n")
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 4:
            raise DataError(f"resemblance dump line {lineno}: expected 4 fields, got {len(parts)}")
        try:
            k, res = int(parts[2]), float(parts[3])
        except ValueError:
            raise DataError(f"resemblance dump line {lineno}: bad order or value") from None
        if not 0.0 <= res <= 1.0:
            raise DataError(f"resemblance dump line {lineno}: resemblance {res} outside [0, 1]")
        yield parts[0], parts[1], k, res
