"""Sparse distance store and nearest-m candidate pools.

For every target document and shingle order the store keeps the dated
candidates with nonzero resemblance, sorted by distance with ties broken by
candidate id.  A candidate pool is the union over orders of the first ``m``
entries of those lists.
"""

from __future__ import annotations

import logging
from collections import defaultdict
from collections.abc import Iterable, Sequence
from dataclasses import dataclass

import numpy as np

from .corpus import Corpus, Document
from .shingle import DistanceVector, ShingleIndex, cross_distances

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class _Row:
    # candidate indices, ascending (candidate ids are stored sorted, so this is id order)
    members: np.ndarray
    # distances of each member at every store order, shape (len(members), n_orders)
    dist: np.ndarray
    # per order: positions into ``members`` sorted by (distance, id), nonzero resemblance only
    ranked: tuple[np.ndarray, ...]


@dataclass(frozen=True)
class CandidatePool:
    target: str
    members: tuple[str, ...]
    nominal_m: int

    @property
    def effective_m(self) -> int:
        return len(self.members)

    def __contains__(self, item) -> bool:
        return item in self.members

    def __len__(self) -> int:
        return len(self.members)


class DistanceStore:
    """Read-only map from (target, order) to ranked nonzero-resemblance candidates.

    ``keep`` records a truncation: when set, only the ``keep`` nearest
    candidates per order were retained (plus their distances at the other
    orders), which is enough for any pool with ``m <= keep``.
    """

    def __init__(self, orders: Sequence[int], candidate_ids: Sequence[str], rows: dict[str, _Row], keep: int | None = None):
        self.orders = tuple(int(k) for k in orders)
        self.candidate_ids = tuple(candidate_ids)
        if list(self.candidate_ids) != sorted(self.candidate_ids):
            raise ValueError("candidate ids must be sorted")
        self._rows = rows
        self.keep = keep
        self._index = {cid: i for i, cid in enumerate(self.candidate_ids)}

    def __contains__(self, target) -> bool:
        return target in self._rows

    def __len__(self) -> int:
        return len(self._rows)

    def targets(self) -> list[str]:
        return list(self._rows)

    def row(self, target: str) -> _Row:
        try:
            return self._rows[target]
        except KeyError:
            raise KeyError(f"unknown target {target!r}") from None

    def column(self, order: int) -> int:
        try:
            return self.orders.index(order)
        except ValueError:
            raise KeyError(f"order {order} is not in this store (orders {self.orders})") from None

    def neighbors(self, target: str, order: int) -> list[tuple[str, float]]:
        """The full stored list for ``(target, order)``, nearest first."""
        row, col = self.row(target), self.column(order)
        return [(self.candidate_ids[row.members[p]], float(row.dist[p, col])) for p in row.ranked[col]]

    def distance(self, target: str, candidate: str, order: int) -> float:
        return self.distance_vector(target, candidate, (order,)).values[0]

    def distance_vector(self, target: str, candidate: str, orders: Iterable[int] | None = None) -> DistanceVector:
        orders = self.orders if orders is None else tuple(orders)
        cols = [self.column(k) for k in orders]
        row = self.row(target)
        idx = self._index.get(candidate)
        pos = -1
        if idx is not None:
            pos = int(np.searchsorted(row.members, idx))
            if pos >= row.members.size or row.members[pos] != idx:
                pos = -1
        if pos < 0:
            if self.keep is not None:
                raise KeyError(f"distance {target!r}->{candidate!r} was not retained (store truncated to {self.keep})")
            return DistanceVector(orders, [1.0] * len(orders))
        return DistanceVector(orders, [float(row.dist[pos, c]) for c in cols])

    def pool_positions(self, target: str, orders: Iterable[int], m: int) -> np.ndarray:
        """Sorted positions (into the target's member list) of the nearest-m union."""
        if m < 1:
            raise ValueError(f"m must be >= 1, got {m}")
        if self.keep is not None and m > self.keep:
            raise ValueError(f"m={m} exceeds the store truncation keep={self.keep}")
        row = self.row(target)
        parts = [row.ranked[self.column(k)][:m] for k in orders]
        if not parts:
            raise ValueError("at least one order is required")
        return np.unique(np.concatenate(parts))

    def resemblances(self, target: str, order: int, candidates: Sequence[str]) -> np.ndarray:
        """Resemblance of ``target`` to each of ``candidates`` (0 where nothing is stored)."""
        out = np.zeros(len(candidates))
        stored = dict(self.neighbors(target, order))
        for i, cid in enumerate(candidates):
            d = stored.get(cid)
            if d is not None:
                out[i] = 1.0 - d
        return out

    # -- construction -------------------------------------------------------------

    @classmethod
    def from_entries(cls, orders: Sequence[int], entries: Iterable[tuple[str, str, int, float]], targets: Iterable[str] = ()) -> DistanceStore:
        """Build from ``(target, candidate, order, distance)`` tuples.

        Missing pairs are taken to have distance 1 (zero resemblance).  Self
        pairs and distance-1 entries are dropped.  ``targets`` adds targets
        that have no entries at all.
        """
        orders = tuple(int(k) for k in orders)
        col = {k: c for c, k in enumerate(orders)}
        table: dict[str, dict[str, np.ndarray]] = defaultdict(dict)
        for t in targets:
            table.setdefault(t, {})
        for target, cand, k, dist in entries:
            if k not in col:
                continue
            if target == cand or not dist < 1.0:
                table.setdefault(target, {})
                continue
            vec = table[target].get(cand)
            if vec is None:
                vec = table[target][cand] = np.ones(len(orders))
            vec[col[k]] = dist
        candidate_ids = sorted({c for cands in table.values() for c in cands})
        index = {c: i for i, c in enumerate(candidate_ids)}
        rows = {}
        for target in sorted(table):
            cands = sorted(table[target])
            members = np.array([index[c] for c in cands], dtype=np.int64)
            dist = np.array([table[target][c] for c in cands], dtype=np.float64).reshape(len(cands), len(orders))
            rows[target] = _Row(members, dist, tuple(_rank(dist[:, c], members) for c in range(len(orders))))
        return cls(orders, candidate_ids, rows)

    @classmethod
    def from_dump(cls, stream, orders: Sequence[int] | None = None) -> DistanceStore:
        """Ingest a sparse resemblance dump (see ``shingle.write_resemblance_dump``)."""
        from .shingle import read_resemblance_dump

        entries = [(i, j, k, 1.0 - res) for i, j, k, res in read_resemblance_dump(stream)]
        if orders is None:
            orders = sorted({k for _, _, k, _ in entries})
        return cls.from_entries(orders, entries)


def _rank(dist_col: np.ndarray, members: np.ndarray) -> np.ndarray:
    nz = np.flatnonzero(dist_col < 1.0)
    return nz[np.lexsort((members[nz], dist_col[nz]))]


def _as_documents(docs):
    return docs.documents() if isinstance(docs, Corpus) else list(docs)


def build_store(
    targets: Sequence[Document] | Corpus,
    candidates: Sequence[Document] | Corpus,
    orders: Iterable[int],
    keep: int | None = None,
    threads: int | None = None,
    block: int = 256,
    target_index: ShingleIndex | None = None,
    candidate_index: ShingleIndex | None = None,
) -> DistanceStore:
    """Compute all target x candidate distances and keep the nonzero ones.

    A candidate sharing the target's id is never stored.  With ``keep``,
    each order's list is cut to its ``keep`` nearest entries.
    """
    orders = tuple(sorted(set(int(k) for k in orders)))
    targets = _as_documents(targets)
    candidates = sorted(_as_documents(candidates), key=lambda d: d.id)
    cand_ids = [d.id for d in candidates]
    if len(set(cand_ids)) != len(cand_ids):
        raise ValueError("duplicate candidate ids")
    b = candidate_index if candidate_index is not None else ShingleIndex(candidates, orders)
    if target_index is not None:
        a = target_index
    elif [d.id for d in targets] == cand_ids:
        a = b
    else:
        a = ShingleIndex(targets, orders)
    if b.ids != cand_ids:
        raise ValueError("candidate_index must cover the candidates sorted by id")
    position = {cid: i for i, cid in enumerate(cand_ids)}
    all_members = np.arange(len(cand_ids), dtype=np.int64)
    rows: dict[str, _Row] = {}
    for start in range(0, len(a), block):
        stop = min(start + block, len(a))
        blocks = [cross_distances(a, b, k, slice(start, stop), threads) for k in orders]
        for r in range(stop - start):
            target = a.ids[start + r]
            if target in rows:
                raise ValueError(f"duplicate target id {target!r}")
            self_pos = position.get(target)
            cols = []
            for dist in blocks:
                d = dist[r]
                if self_pos is not None:
                    d[self_pos] = 1.0
                cols.append(d)
            ranked_full = [_rank(d, all_members) for d in cols]
            if keep is not None:
                ranked_full = [rk[:keep] for rk in ranked_full]
            members = np.unique(np.concatenate(ranked_full)) if ranked_full else np.empty(0, dtype=np.int64)
            dist = np.stack([d[members] for d in cols], axis=1) if members.size else np.empty((0, len(orders)))
            ranked = tuple(np.searchsorted(members, rk) for rk in ranked_full)
            rows[target] = _Row(members, np.ascontiguousarray(dist), ranked)
    return DistanceStore(orders, cand_ids, rows, keep=keep)


def nearest_m(target: str, order: int, m: int, store: DistanceStore) -> list[tuple[str, float]]:
    """Up to ``m`` nonzero-resemblance candidates nearest to ``target`` at ``order``.

    Ties at the cut are resolved by candidate id; fewer than ``m`` are
    returned when fewer have nonzero resemblance.
    """
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    if store.keep is not None and m > store.keep:
        raise ValueError(f"m={m} exceeds the store truncation keep={store.keep}")
    return store.neighbors(target, order)[:m]


def candidate_pool(target: str, orders: Iterable[int], m: int, store: DistanceStore) -> CandidatePool:
    orders = tuple(orders)
    row = store.row(target)
    positions = store.pool_positions(target, orders, m)
    members = tuple(store.candidate_ids[i] for i in row.members[positions])
    return CandidatePool(target, members, m)
