"""Kernel weights and date imputation.

The weight of a dated candidate is ``prod_k K(d_k / h_k)`` over its shingle
orders.  The basic estimate is the weighted mean of candidate dates; robust
variants minimize a weighted absolute (local median) or Huber loss instead.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Iterable, Mapping, Sequence
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ConvergenceError, DataError
from .neighbors import CandidatePool, DistanceStore, candidate_pool
from .shingle import DistanceVector

INF = math.inf
KERNELS = ("exponential", "boxcar")


@dataclass(frozen=True)
class KernelConfig:
    """Kernel family, one bandwidth per shingle order, and the nominal m.

    An infinite bandwidth neutralizes its order (factor ``K(0)``).  For the
    boxcar kernel ``K(x) = 1`` on ``0 <= x <= cutoff`` and 0 beyond.
    """

    bandwidths: tuple[float, ...]
    m: int = 5
    kernel: str = "exponential"
    cutoff: float = 1.0

    def __post_init__(self):
        bw = tuple(float(h) for h in self.bandwidths)
        object.__setattr__(self, "bandwidths", bw)
        if self.kernel not in KERNELS:
            raise ValueError(f"unknown kernel {self.kernel!r}; choose from {KERNELS}")
        if not bw:
            raise ValueError("at least one bandwidth is required")
        if any(math.isnan(h) or h <= 0 for h in bw):
            raise ValueError(f"bandwidths must be positive: {bw}")
        if all(math.isinf(h) for h in bw):
            raise ValueError("at least one bandwidth must be finite")
        if self.m < 1:
            raise ValueError(f"m must be >= 1, got {self.m}")
        if not self.cutoff > 0:
            raise ValueError(f"boxcar cutoff must be positive, got {self.cutoff}")


def kernel_function(cfg: KernelConfig) -> Callable[[float], float]:
    if cfg.kernel == "exponential":
        return lambda x: math.exp(-x)
    cutoff = cfg.cutoff
    return lambda x: 1.0 if x <= cutoff else 0.0


def kernel_weight(d: DistanceVector | Sequence[float], cfg: KernelConfig) -> float:
    values = d.values if isinstance(d, DistanceVector) else tuple(d)
    if len(values) != len(cfg.bandwidths):
        raise ValueError(f"{len(values)} distances but {len(cfg.bandwidths)} bandwidths")
    K = kernel_function(cfg)
    w = 1.0
    for dk, h in zip(values, cfg.bandwidths):
        x = 0.0 if math.isinf(h) else dk / h
        w = w * K(x)
    return w


@dataclass(frozen=True)
class Estimate:
    value: float
    effective_neighbors: int
    fell_back: bool
    weight_sum: float


@dataclass(frozen=True)
class RobustSpec:
    """Robust loss for ``robust_impute``.

    ``loss="huber"`` uses threshold ``huber_c`` on residuals divided by the
    normalized weighted MAD (1.4826 x MAD); it is solved by iterative
    reweighting until the estimate moves by less than ``tolerance`` years.
    """

    loss: str = "absolute"
    huber_c: float = 1.345
    tolerance: float = 1e-6
    max_iterations: int = 100

    def __post_init__(self):
        if self.loss not in ("absolute", "huber"):
            raise ValueError(f"unknown robust loss {self.loss!r}")
        if not self.huber_c > 0:
            raise ValueError("huber threshold must be positive")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")


def fallback_mean(target: str, dates: Mapping[str, float], total: float | None = None) -> float:
    """Mean date of the dated set, leaving out ``target`` if it is dated.

    ``total`` may pass a precomputed ``math.fsum(dates.values())``.
    """
    if not dates:
        raise DataError("no dated documents to impute from")
    if total is None:
        total = math.fsum(dates.values())
    n = len(dates)
    if target in dates:
        if n == 1:
            raise DataError("no dated documents other than the target")
        return (total - dates[target]) / (n - 1)
    return total / n


DistanceSource = Mapping[str, DistanceVector] | DistanceStore


def _distance_of(distances: DistanceSource, target: str, cand: str, orders) -> DistanceVector:
    if isinstance(distances, DistanceStore):
        return distances.distance_vector(target, cand, orders)
    return distances[cand]


def _pool_weights(target, pool, dates, distances, cfg, orders):
    members = sorted(m for m in pool.members if m != target)
    missing = [m for m in members if m not in dates]
    if missing:
        raise DataError(f"pool members without dates: {missing[:3]!r}")
    if orders is None:
        orders = distances.orders if isinstance(distances, DistanceStore) else None
    weights = [kernel_weight(_distance_of(distances, target, c, orders), cfg) for c in members]
    return members, [float(dates[c]) for c in members], weights


def impute_date(
    target: str,
    pool: CandidatePool,
    dates: Mapping[str, float],
    distances: DistanceSource,
    cfg: KernelConfig,
    orders: Sequence[int] | None = None,
) -> Estimate:
    """Kernel-weighted mean of the pool's dates.

    Weights are accumulated in candidate-id order.  With no positive weight the
    mean date of the dated set (target excluded) is returned and
    ``fell_back`` is set.  ``orders`` selects which store orders the
    bandwidths apply to (default: all orders of the store).
    """
    fallback = fallback_mean(target, dates)
    members, ts, ws = _pool_weights(target, pool, dates, distances, cfg, orders)
    num = den = 0.0
    for t, w in zip(ts, ws):
        num = num + t * w
        den = den + w
    if den > 0.0:
        return Estimate(num / den, len(members), False, den)
    return Estimate(fallback, len(members), True, den)


def weighted_median(values: Sequence[float], weights: Sequence[float]) -> float:
    """Lower weighted median: the smallest value whose cumulative weight reaches half the total."""
    order = sorted(range(len(values)), key=lambda i: values[i])
    total = math.fsum(weights)
    if not total > 0:
        raise ValueError("weighted median needs a positive total weight")
    half = total / 2.0
    acc = []
    for i in order:
        acc.append(weights[i])
        if math.fsum(acc) >= half:
            return float(values[i])
    return float(values[order[-1]])


def huber_location(values: Sequence[float], weights: Sequence[float], spec: RobustSpec) -> float:
    x = np.asarray(values, dtype=float)
    a = np.asarray(weights, dtype=float)
    t = weighted_median(x, a)
    scale = 1.4826 * weighted_median(np.abs(x - t), a)
    if scale == 0.0:
        # over half the weight sits on the median itself
        return t
    for _ in range(spec.max_iterations):
        u = np.abs(x - t) / scale
        w = a * np.where(u <= spec.huber_c, 1.0, spec.huber_c / np.maximum(u, spec.huber_c))
        t_new = float(np.dot(w, x) / w.sum())
        if abs(t_new - t) < spec.tolerance:
            return t_new
        t = t_new
    raise ConvergenceError(f"Huber iteration did not converge in {spec.max_iterations} steps", last=t)


def robust_impute(
    target: str,
    pool: CandidatePool,
    dates: Mapping[str, float],
    distances: DistanceSource,
    cfg: KernelConfig,
    spec: RobustSpec = RobustSpec(),
    orders: Sequence[int] | None = None,
) -> Estimate:
    """Minimize the kernel-weighted absolute or Huber loss over candidate dates."""
    fallback = fallback_mean(target, dates)
    members, ts, ws = _pool_weights(target, pool, dates, distances, cfg, orders)
    total = math.fsum(ws)
    if not total > 0.0:
        return Estimate(fallback, len(members), True, total)
    if spec.loss == "absolute":
        value = weighted_median(ts, ws)
    else:
        value = huber_location(ts, ws, spec)
    return Estimate(value, len(members), False, total)


# -- batch path -----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class PackedPools:
    """Pools of many targets laid out for ``kernels.pool_predictions``."""

    targets: tuple[str, ...]
    ptr: np.ndarray
    dates: np.ndarray
    dists: np.ndarray
    fallback: np.ndarray
    orders: tuple[int, ...]
    m: int

    @property
    def effective_m(self) -> np.ndarray:
        return np.diff(self.ptr)


def pack_pools(
    targets: Iterable[str],
    store: DistanceStore,
    dates: Mapping[str, float],
    orders: Sequence[int],
    m: int,
) -> PackedPools:
    """Gather each target's nearest-m pool (id order) with dates and distances."""
    targets = tuple(targets)
    orders = tuple(orders)
    if not dates:
        raise DataError("no dated documents to impute from")
    cols = [store.column(k) for k in orders]
    cand_dates = np.array([float(dates[c]) if c in dates else math.nan for c in store.candidate_ids])
    total = math.fsum(dates.values())
    ptr = np.zeros(len(targets) + 1, dtype=np.int64)
    date_parts, dist_parts, fallback = [], [], np.empty(len(targets))
    for i, target in enumerate(targets):
        row = store.row(target)
        pos = store.pool_positions(target, orders, m)
        idx = row.members[pos]
        d = cand_dates[idx]
        if np.isnan(d).any():
            raise DataError(f"pool of {target!r} contains undated candidates")
        date_parts.append(d)
        dist_parts.append(row.dist[np.ix_(pos, cols)])
        ptr[i + 1] = ptr[i] + idx.size
        fallback[i] = fallback_mean(target, dates, total)
    pool_dates = np.concatenate(date_parts) if date_parts else np.empty(0)
    pool_dists = np.concatenate(dist_parts) if dist_parts else np.empty((0, len(orders)))
    return PackedPools(targets, ptr, pool_dates, np.ascontiguousarray(pool_dists), fallback, orders, m)


def predict_packed(packed: PackedPools, bandwidths, kernel="exponential", cutoff=1.0, threads=None):
    """Weighted-mean predictions and weight sums for every packed pool."""
    return kernels.pool_predictions(packed.ptr, packed.dates, packed.dists, bandwidths, kernel, cutoff, packed.fallback, threads)


def impute_many(
    targets: Iterable[str],
    store: DistanceStore,
    dates: Mapping[str, float],
    cfg: KernelConfig,
    orders: Sequence[int] | None = None,
    robust: RobustSpec | None = None,
    threads: int | None = None,
) -> dict[str, Estimate]:
    """Impute every target; same results as calling ``impute_date`` per target."""
    orders = tuple(store.orders if orders is None else orders)
    targets = tuple(targets)
    if robust is not None:
        out = {}
        for t in targets:
            pool = candidate_pool(t, orders, cfg.m, store)
            out[t] = robust_impute(t, pool, dates, store, cfg, robust, orders)
        return out
    packed = pack_pools(targets, store, dates, orders, cfg.m)
    pred, wsum = predict_packed(packed, cfg.bandwidths, cfg.kernel, cfg.cutoff, threads)
    eff = packed.effective_m
    return {
        t: Estimate(float(pred[i]), int(eff[i]), not wsum[i] > 0.0, float(wsum[i]))
        for i, t in enumerate(targets)
    }
