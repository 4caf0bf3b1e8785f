"""Prediction reports: per-document errors, MAE, and the mean-date baseline."""

from __future__ import annotations

import math
from collections.abc import Mapping
from dataclasses import dataclass
from typing import IO

from ..errors import DataError
from ..estimator import Estimate

# Published results on the DEEDS charters (not distributed here, so not reproducible).
DEEDS_REFERENCE = {
    "training_mean_year": 1245.8,
    "baseline_validation_mae": 36.6,
    "validation_mae": {(1,): 13.1, (2,): 11.1, (3,): 12.1},
    "test_mae": 12.2,
    "mean_resemblance": {1: 0.083, 2: 0.014, 3: 0.0042},
    "training_documents": 3034,
    "validation_documents": 167,
    "heatmap_groups": 606,
}


@dataclass(frozen=True)
class DocResult:
    id: str
    true_year: int
    estimated_year: float
    absolute_error: float
    effective_neighbors: int
    fell_back: bool


@dataclass(frozen=True)
class EvalReport:
    per_document: tuple[DocResult, ...]
    mae: float
    baseline_mae: float
    baseline: float

    def __len__(self) -> int:
        return len(self.per_document)

    def signed_errors(self) -> list[float]:
        return [r.estimated_year - r.true_year for r in self.per_document]


def evaluate(predictions: Mapping[str, Estimate], truth: Mapping[str, int], training_mean: float) -> EvalReport:
    """Compare estimates with true years.

    ``baseline_mae`` is the MAE of predicting ``training_mean`` for every
    document.  Results are listed by id, so the report does not depend on the
    order of the inputs.
    """
    missing = sorted(set(truth) - set(predictions))
    extra = sorted(set(predictions) - set(truth))
    if missing or extra:
        raise DataError(f"prediction/truth ids differ: missing predictions {missing[:5]}, unknown ids {extra[:5]}")
    if not truth:
        raise DataError("nothing to evaluate")
    rows = []
    for doc_id in sorted(truth):
        est = predictions[doc_id]
        t = truth[doc_id]
        rows.append(DocResult(doc_id, t, est.value, abs(est.value - t), est.effective_neighbors, est.fell_back))
    mae = math.fsum(r.absolute_error for r in rows) / len(rows)
    baseline_mae = math.fsum(abs(training_mean - r.true_year) for r in rows) / len(rows)
    return EvalReport(tuple(rows), mae, baseline_mae, training_mean)


REPORT_HEADER = "#id\ttrue_year\testimated_year\tabsolute_error\teffective_neighbors\tfell_back\n"


def write_report(stream: IO[str], report: EvalReport) -> None:
    stream.write(REPORT_HEADER)
    for r in report.per_document:
        stream.write(
            f"{r.id}\t{r.true_year}\t{r.estimated_year!r}\t{r.absolute_error!r}\t{r.effective_neighbors}\t{int(r.fell_back)}\n"
        )
    stream.write(f"#mae\t{report.mae!r}\n#baseline_mae\t{report.baseline_mae!r}\n#baseline\t{report.baseline!r}\n")


PREDICTION_HEADER = "#id\testimate\teffective_neighbors\tfell_back\n"


def write_predictions(stream: IO[str], predictions: Mapping[str, Estimate]) -> None:
    stream.write(PREDICTION_HEADER)
    for doc_id in sorted(predictions):
        e = predictions[doc_id]
        stream.write(f"{doc_id}\t{e.value!r}\t{e.effective_neighbors}\t{int(e.fell_back)}\n")


def read_predictions(stream) -> dict[str, Estimate]:
    out = {}
    for lineno, line in enumerate(stream, start=1):
        line = line.rstrip("\r\n")
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 4:
            raise DataError(f"predictions line {lineno}: expected 4 fields")
        try:
            out[parts[0]] = Estimate(float(parts[1]), int(parts[2]), parts[3] == "1", math.nan)
        except ValueError:
            raise DataError(f"predictions line {lineno}: malformed values") from None
    return out
