"""Figure data: the validation x training resemblance heatmap and the date scatter."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import IO

import numpy as np

from ..corpus import Corpus
from ..errors import DataError
from ..neighbors import DistanceStore
from .metrics import EvalReport


@dataclass(frozen=True)
class HeatmapParams:
    clip_high: float = 0.3
    zero_floor: float = 0.1
    group_size: int = 5
    white_threshold: float = 0.8

    def __post_init__(self):
        if not 0 <= self.zero_floor < self.clip_high <= 1:
            raise ValueError("need 0 <= zero_floor < clip_high <= 1")
        if not 0 < self.white_threshold < 1:
            raise ValueError("white_threshold must lie in (0, 1)")
        if self.group_size < 1:
            raise ValueError("group_size must be >= 1")


def group_starts(n: int, group_size: int) -> np.ndarray:
    """Start index of each column group; the last group absorbs the remainder."""
    n_groups = max(1, n // group_size)
    return np.arange(n_groups) * group_size


def to_pixels(values: np.ndarray, white_threshold: float) -> np.ndarray:
    """Linear grey scale: values at or below the threshold are white (255), 1.0 is black (0)."""
    scaled = np.clip((values - white_threshold) / (1.0 - white_threshold), 0.0, 1.0)
    return np.floor(255.0 * (1.0 - scaled) + 0.5).astype(np.uint8)


def heatmap_values(validation: Corpus, training: Corpus, store: DistanceStore, order: int,
                   params: HeatmapParams = HeatmapParams()) -> np.ndarray:
    """Row-normalized, group-averaged resemblances before the grey-scale mapping."""
    if not len(validation) or not len(training):
        raise DataError("heatmap needs non-empty validation and training corpora")
    if store.keep is not None:
        raise ValueError("heatmap needs an untruncated distance store")
    val_docs = validation.sorted_by_date()
    train_ids = [d.id for d in training.sorted_by_date()]
    if len(val_docs) != len(validation) or len(train_ids) != len(training):
        raise DataError("heatmap corpora must be fully dated")
    starts = group_starts(len(train_ids), params.group_size)
    counts = np.diff(np.append(starts, len(train_ids)))
    out = np.zeros((len(val_docs), len(starts)))
    for i, doc in enumerate(val_docs):
        res = np.minimum(store.resemblances(doc.id, order, train_ids), params.clip_high)
        res[res < params.zero_floor] = 0.0
        cells = np.add.reduceat(res, starts) / counts
        top = cells.max()
        out[i] = cells / top if top > 0 else cells
    return out


def render_heatmap(validation: Corpus, training: Corpus, store: DistanceStore, order: int,
                   params: HeatmapParams = HeatmapParams()) -> np.ndarray:
    """8-bit grey image, one row per validation document and one column per training group.

    Both axes are sorted by date (ties by id).  Pixels come from
    ``heatmap_values`` through ``to_pixels``.
    """
    return to_pixels(heatmap_values(validation, training, store, order, params), params.white_threshold)


def write_pgm(target, image: np.ndarray) -> None:
    """Binary 8-bit PGM (P5).  ``target`` is a path or a binary stream."""
    image = np.ascontiguousarray(image, dtype=np.uint8)
    if image.ndim != 2:
        raise ValueError("PGM image must be 2-D")
    h, w = image.shape
    payload = f"P5\n{w} {h}\n255\n".encode("ascii") + image.tobytes()
    if hasattr(target, "write"):
        target.write(payload)
    else:
        with open(target, "wb") as fh:
            fh.write(payload)


def read_pgm(source) -> np.ndarray:
    data = source.read() if hasattr(source, "read") else open(source, "rb").read()
    fields, pos = [], 0
    while len(fields) < 4:
        while data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b"#":
            pos = data.index(b"\n", pos) + 1
            continue
        end = pos
        while not data[end:end + 1].isspace():
            end += 1
        fields.append(data[pos:end])
        pos = end
    if fields[0] != b"P5" or int(fields[3]) != 255:
        raise ValueError("not an 8-bit binary PGM")
    w, h = int(fields[1]), int(fields[2])
    pixels = np.frombuffer(data[pos + 1:pos + 1 + w * h], dtype=np.uint8)
    return pixels.reshape(h, w)


def scatter_data(report: EvalReport) -> str:
    """TSV ``true_year TAB estimated_year TAB true_year`` sorted by true year.

    The repeated third column traces the zero-error line.
    """
    if not len(report):
        raise DataError("empty report")
    rows = sorted(report.per_document, key=lambda r: (r.true_year, r.id))
    return "".join(f"{r.true_year}\t{r.estimated_year!r}\t{r.true_year}\n" for r in rows)


def edge_bias(report: EvalReport, fraction: float = 0.1) -> tuple[float, float]:
    """Mean signed error (estimate - truth) for the earliest and latest ``fraction`` of documents."""
    rows = sorted(report.per_document, key=lambda r: (r.true_year, r.id))
    n = max(1, math.floor(len(rows) * fraction))
    early = [r.estimated_year - r.true_year for r in rows[:n]]
    late = [r.estimated_year - r.true_year for r in rows[-n:]]
    return math.fsum(early) / n, math.fsum(late) / n
