"""Bandwidth and m selection by leave-one-out predictive cross-validation.

Every training document is predicted from its nearest-m pool among the other
training documents; the loss is the sum of squared prediction errors.  The
search is exhaustive over a grid, which copes with infinite bandwidths and the
broad, flat minima these losses tend to have.
"""

from __future__ import annotations

import itertools
import math
from collections.abc import Iterator, Mapping, Sequence
from dataclasses import dataclass, field
from typing import IO

import numpy as np

from .corpus import Corpus
from .errors import DataError
from .estimator import INF, pack_pools, predict_packed
from .neighbors import DistanceStore

DEFAULT_M = (5, 10, 20, 50)


def _check_increasing(values, what):
    if not values:
        raise ValueError(f"{what} must not be empty")
    if any(not b > a for a, b in zip(values, values[1:])):
        raise ValueError(f"{what} must be strictly increasing: {values}")


@dataclass(frozen=True)
class BandwidthGrid:
    """Candidate bandwidths per shingle order (``inf`` allowed) and candidate m values."""

    bandwidths: tuple[tuple[float, ...], ...]
    m_candidates: tuple[int, ...] = DEFAULT_M

    def __post_init__(self):
        bw = tuple(tuple(float(h) for h in hs) for hs in self.bandwidths)
        object.__setattr__(self, "bandwidths", bw)
        object.__setattr__(self, "m_candidates", tuple(int(m) for m in self.m_candidates))
        if not bw:
            raise ValueError("grid needs at least one order")
        for hs in bw:
            _check_increasing(hs, "bandwidth candidates")
            if hs[0] <= 0:
                raise ValueError(f"bandwidths must be positive: {hs}")
        _check_increasing(self.m_candidates, "m candidates")
        if self.m_candidates[0] < 1:
            raise ValueError("m candidates must be >= 1")

    @classmethod
    def log_spaced(cls, r: int, n: int = 25, low: float = 1e-4, high: float = 1.0,
                   include_inf: bool = True, m_candidates: Sequence[int] = DEFAULT_M) -> BandwidthGrid:
        hs = [float(h) for h in np.logspace(math.log10(low), math.log10(high), n)]
        if include_inf:
            hs.append(INF)
        return cls(tuple(tuple(hs) for _ in range(r)), tuple(m_candidates))

    def points(self) -> Iterator[tuple[float, ...]]:
        """Bandwidth vectors in lexicographic order."""
        return itertools.product(*self.bandwidths)

    def __len__(self) -> int:
        return len(self.m_candidates) * math.prod(len(hs) for hs in self.bandwidths)


@dataclass(frozen=True)
class TuneResult:
    best_m: int
    best_bandwidths: tuple[float, ...]
    cv_loss: float
    orders: tuple[int, ...]
    loss_surface: Mapping[tuple[int, tuple[float, ...]], float] = field(repr=False)


def _training_dates(train: Corpus) -> dict[str, int]:
    dates = train.dates()
    if len(dates) < 2:
        raise DataError("cross-validation needs at least 2 dated training documents")
    return dates


def _packed(train, store, orders, m):
    dates = _training_dates(train)
    targets = sorted(dates)
    missing = [t for t in targets if t not in store]
    if missing:
        raise DataError(f"{len(missing)} training documents missing from the distance store, e.g. {missing[0]!r}")
    packed = pack_pools(targets, store, dates, orders, m)
    if not packed.effective_m.any():
        raise DataError("no training document has any nonzero-resemblance neighbour")
    truth = np.array([float(dates[t]) for t in targets])
    return packed, truth


def _sse(truth: np.ndarray, pred: np.ndarray) -> float:
    return math.fsum(((truth - pred) ** 2).tolist())


def cv_loss(
    bandwidths: Sequence[float],
    m: int,
    train: Corpus,
    store: DistanceStore,
    orders: Sequence[int] | None = None,
    kernel: str = "exponential",
    cutoff: float = 1.0,
    threads: int | None = None,
) -> float:
    """Sum over training documents of the squared leave-one-out prediction error."""
    orders = tuple(store.orders if orders is None else orders)
    if len(bandwidths) != len(orders):
        raise ValueError(f"{len(bandwidths)} bandwidths for {len(orders)} orders")
    packed, truth = _packed(train, store, orders, m)
    pred, _ = predict_packed(packed, bandwidths, kernel, cutoff, threads)
    return _sse(truth, pred)


def tune(
    train: Corpus,
    grid: BandwidthGrid,
    store: DistanceStore,
    orders: Sequence[int] | None = None,
    kernel: str = "exponential",
    cutoff: float = 1.0,
    threads: int | None = None,
) -> TuneResult:
    """Exhaustive grid search for the (m, bandwidths) minimizing ``cv_loss``.

    Ties go to the smaller m, then the lexicographically smaller bandwidths.
    """
    orders = tuple(store.orders if orders is None else orders)
    if len(grid.bandwidths) != len(orders):
        raise ValueError(f"grid has {len(grid.bandwidths)} orders, expected {len(orders)}")
    surface: dict[tuple[int, tuple[float, ...]], float] = {}
    best = None
    for m in grid.m_candidates:
        packed, truth = _packed(train, store, orders, m)
        for hs in grid.points():
            pred, _ = predict_packed(packed, hs, kernel, cutoff, threads)
            loss = _sse(truth, pred)
            surface[(m, hs)] = loss
            if best is None or loss < best[0]:
                best = (loss, m, hs)
    loss, m, hs = best
    return TuneResult(m, hs, loss, orders, surface)


def _fmt(h: float) -> str:
    return "inf" if math.isinf(h) else repr(h)


def write_loss_surface(stream: IO[str], result: TuneResult) -> None:
    """TSV ``m TAB h_1 ... h_r TAB loss``; ``inf`` marks an infinite bandwidth."""
    for (m, hs), loss in sorted(result.loss_surface.items()):
        stream.write("\t".join([str(m), *(_fmt(h) for h in hs), repr(loss)]) + "\n")


def read_loss_surface(stream) -> dict[tuple[int, tuple[float, ...]], float]:
    out = {}
    for line in stream:
        parts = line.rstrip("\n").split("\t")
        if len(parts) < 3:
            continue
        out[(int(parts[0]), tuple(float(p) for p in parts[1:-1]))] = float(parts[-1])
    return out
