"""End-to-end runs driven by a flat ``key = value`` config file.

Recognized keys (defaults in brackets)::

    manifest            path to a manifest; relative to the config file
    synth.<field>       SyntheticSpec fields, used when no manifest is given
                        (n_documents, date_range=lo,hi, vocab_size, drift_rate,
                        doc_length_range=lo,hi, window, zipf_exponent,
                        common_words, common_fraction; synth.seed [seed])
    orders              comma-separated shingle orders [2]
    kernel              exponential | boxcar [exponential]
    cutoff              boxcar support [1.0]
    estimator           mean | median | huber [mean]
    m_candidates        [5,10,20,50]
    grid_size, grid_min, grid_max, grid_inf   [25, 1e-4, 1.0, true]
    train_fraction, validation_fraction, test_fraction   [0.9, 0.05, 0.05]
    seed                split seed [0]
    threads             [1]; never changes any output
    heatmap_order       [2 if used, else the first order]
    heatmap.clip_high, heatmap.zero_floor, heatmap.group_size, heatmap.white_threshold
    output_dir          [out]; relative to the config file

Artifacts written to the output directory: ``summary.txt``,
``loss_surface.tsv``, ``validation_report.tsv`` / ``test_report.tsv`` (when
the set is non-empty), ``heatmap.pgm`` and ``scatter.tsv``.
"""

from __future__ import annotations

import dataclasses
import logging
import math
from collections.abc import Mapping
from pathlib import Path

from ..corpus import Corpus, SplitSpec, read_manifest, split_corpus
from ..errors import DataError, StageError
from ..estimator import KernelConfig, RobustSpec, impute_many
from ..neighbors import build_store
from ..shingle import ShingleIndex
from ..tuner import BandwidthGrid, tune, write_loss_surface
from .figures import HeatmapParams, render_heatmap, scatter_data, write_pgm
from .metrics import EvalReport, evaluate, write_report
from .synthetic import SyntheticSpec, generate_synthetic

log = logging.getLogger(__name__)


def parse_config(text: str) -> dict[str, str]:
    out = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DataError(f"config line {lineno}: expected 'key = value'")
        key, value = (p.strip() for p in line.split("=", 1))
        if not key:
            raise DataError(f"config line {lineno}: empty key")
        out[key] = value
    return out


def read_config(path) -> dict[str, str]:
    return parse_config(Path(path).read_text(encoding="utf-8"))


def _ints(value: str) -> tuple[int, ...]:
    return tuple(int(v) for v in value.split(",") if v.strip())


def _bool(value: str) -> bool:
    v = value.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise DataError(f"not a boolean: {value!r}")


_SYNTH_TYPES = {f.name: f.type for f in dataclasses.fields(SyntheticSpec)}


def synthetic_spec(cfg: Mapping[str, str], seed: int) -> SyntheticSpec:
    kwargs = {}
    for key, value in cfg.items():
        if not key.startswith("synth."):
            continue
        name = key[len("synth."):]
        if name not in _SYNTH_TYPES:
            raise DataError(f"unknown synthetic parameter {name!r}")
        if name in ("date_range", "doc_length_range"):
            pair = _ints(value)
            if len(pair) != 2:
                raise DataError(f"{key} needs two comma-separated integers")
            kwargs[name] = pair
        elif name in ("drift_rate", "zipf_exponent", "common_fraction"):
            kwargs[name] = float(value)
        else:
            kwargs[name] = int(value)
    kwargs.setdefault("seed", seed)
    if "n_documents" not in kwargs:
        raise DataError("config needs either 'manifest' or 'synth.n_documents'")
    return SyntheticSpec(**kwargs)


@dataclasses.dataclass
class ExperimentConfig:
    orders: tuple[int, ...] = (2,)
    kernel: str = "exponential"
    cutoff: float = 1.0
    estimator: str = "mean"
    m_candidates: tuple[int, ...] = (5, 10, 20, 50)
    grid_size: int = 25
    grid_min: float = 1e-4
    grid_max: float = 1.0
    grid_inf: bool = True
    split: SplitSpec = SplitSpec(0.9, 0.05, 0.05, 0)
    threads: int = 1
    heatmap_order: int | None = None
    heatmap: HeatmapParams = HeatmapParams()
    output_dir: Path = Path("out")
    manifest: Path | None = None
    synthetic: SyntheticSpec | None = None

    @classmethod
    def from_mapping(cls, cfg: Mapping[str, str], base: Path = Path(".")) -> ExperimentConfig:
        known = {
            "manifest", "orders", "kernel", "cutoff", "estimator", "m_candidates", "grid_size", "grid_min",
            "grid_max", "grid_inf", "train_fraction", "validation_fraction", "test_fraction", "seed", "threads",
            "heatmap_order", "output_dir",
        }
        unknown = [k for k in cfg if k not in known and not k.startswith(("synth.", "heatmap."))]
        if unknown:
            raise DataError(f"unknown config keys: {', '.join(sorted(unknown))}")
        try:
            seed = int(cfg.get("seed", 0))
            out = cls(
                orders=_ints(cfg.get("orders", "2")),
                kernel=cfg.get("kernel", "exponential"),
                cutoff=float(cfg.get("cutoff", 1.0)),
                estimator=cfg.get("estimator", "mean"),
                m_candidates=_ints(cfg.get("m_candidates", "5,10,20,50")),
                grid_size=int(cfg.get("grid_size", 25)),
                grid_min=float(cfg.get("grid_min", 1e-4)),
                grid_max=float(cfg.get("grid_max", 1.0)),
                grid_inf=_bool(cfg.get("grid_inf", "true")),
                split=SplitSpec(
                    float(cfg.get("train_fraction", 0.9)),
                    float(cfg.get("validation_fraction", 0.05)),
                    float(cfg.get("test_fraction", 0.05)),
                    seed,
                ),
                threads=int(cfg.get("threads", 1)),
                heatmap_order=int(cfg["heatmap_order"]) if "heatmap_order" in cfg else None,
                heatmap=HeatmapParams(
                    clip_high=float(cfg.get("heatmap.clip_high", 0.3)),
                    zero_floor=float(cfg.get("heatmap.zero_floor", 0.1)),
                    group_size=int(cfg.get("heatmap.group_size", 5)),
                    white_threshold=float(cfg.get("heatmap.white_threshold", 0.8)),
                ),
                output_dir=base / cfg.get("output_dir", "out"),
                manifest=base / cfg["manifest"] if "manifest" in cfg else None,
                synthetic=None if "manifest" in cfg else synthetic_spec(cfg, seed),
            )
        except ValueError as exc:
            raise DataError(f"bad config value: {exc}") from exc
        if out.estimator not in ("mean", "median", "huber"):
            raise DataError(f"unknown estimator {out.estimator!r}")
        if not out.orders:
            raise DataError("orders must list at least one shingle order")
        return out

    @property
    def figure_order(self) -> int:
        if self.heatmap_order is not None:
            return self.heatmap_order
        return 2 if 2 in self.orders else self.orders[0]


class _Stage:
    def __init__(self, name):
        self.name = name

    def __enter__(self):
        log.info("stage %s", self.name)

    def __exit__(self, exc_type, exc, tb):
        if exc is not None and not isinstance(exc, StageError):
            raise StageError(self.name, exc) from exc
        return False


def _fmt(x) -> str:
    if isinstance(x, float):
        return "inf" if math.isinf(x) else repr(x)
    if isinstance(x, (tuple, list)):
        return ",".join(_fmt(v) for v in x)
    return str(x)


def _effective_stats(report: EvalReport) -> dict[str, str]:
    eff = [r.effective_neighbors for r in report.per_document]
    return {
        "effective_m_mean": _fmt(math.fsum(eff) / len(eff)),
        "effective_m_min": str(min(eff)),
        "effective_m_max": str(max(eff)),
        "fallbacks": str(sum(r.fell_back for r in report.per_document)),
    }


def run_experiment(config, output_dir=None) -> dict[str, str]:
    """Split, shingle, tune, impute, evaluate and render; returns the run summary.

    ``config`` is a path to a config file, a mapping of raw config strings, or
    an ``ExperimentConfig``.  Any failure is re-raised as ``StageError``.
    """
    with _Stage("config"):
        if isinstance(config, ExperimentConfig):
            cfg = config
        elif isinstance(config, Mapping):
            cfg = ExperimentConfig.from_mapping(config)
        else:
            path = Path(config)
            cfg = ExperimentConfig.from_mapping(read_config(path), base=path.parent)
        out_dir = Path(output_dir) if output_dir is not None else cfg.output_dir

    with _Stage("load"):
        if cfg.manifest is not None:
            corpus = read_manifest(cfg.manifest).dated()
        else:
            corpus = generate_synthetic(cfg.synthetic)
        if len(corpus) < 3:
            raise DataError("need at least 3 dated documents")

    with _Stage("split"):
        train, validation, test = split_corpus(corpus, cfg.split)

    keep = max(cfg.m_candidates)
    with _Stage("shingle"):
        train_docs = sorted(train.values(), key=lambda d: d.id)
        train_index = ShingleIndex(train_docs, cfg.orders)

    with _Stage("store"):
        cv_store = build_store(train_docs, train_docs, cfg.orders, keep=keep, threads=cfg.threads,
                               target_index=train_index, candidate_index=train_index)

    with _Stage("tune"):
        grid = BandwidthGrid.log_spaced(len(cfg.orders), cfg.grid_size, cfg.grid_min, cfg.grid_max,
                                        cfg.grid_inf, cfg.m_candidates)
        result = tune(train, grid, cv_store, kernel=cfg.kernel, cutoff=cfg.cutoff, threads=cfg.threads)
        kcfg = KernelConfig(result.best_bandwidths, result.best_m, cfg.kernel, cfg.cutoff)

    robust = None
    if cfg.estimator == "median":
        robust = RobustSpec("absolute")
    elif cfg.estimator == "huber":
        robust = RobustSpec("huber")

    training_dates = train.dates()
    training_mean = train.mean_date()
    reports: dict[str, EvalReport] = {}
    with _Stage("impute"):
        for name, part in (("validation", validation), ("test", test)):
            if not len(part):
                continue
            store = build_store(part.documents(), train_docs, cfg.orders, keep=keep, threads=cfg.threads,
                                candidate_index=train_index)
            preds = impute_many(part, store, training_dates, kcfg, robust=robust, threads=cfg.threads)
            reports[name] = evaluate(preds, part.dates(), training_mean)

    summary = {
        "documents": str(len(corpus)),
        "train": str(len(train)),
        "validation": str(len(validation)),
        "test": str(len(test)),
        "orders": _fmt(cfg.orders),
        "kernel": cfg.kernel,
        "estimator": cfg.estimator,
        "best_m": str(result.best_m),
        "best_bandwidths": _fmt(result.best_bandwidths),
        "cv_loss": _fmt(result.cv_loss),
        "training_mean": _fmt(training_mean),
    }
    for name, rep in reports.items():
        summary[f"{name}.mae"] = _fmt(rep.mae)
        summary[f"{name}.baseline_mae"] = _fmt(rep.baseline_mae)
        summary.update({f"{name}.{k}": v for k, v in _effective_stats(rep).items()})

    with _Stage("render"):
        out_dir.mkdir(parents=True, exist_ok=True)
        with open(out_dir / "loss_surface.tsv", "w", encoding="utf-8") as fh:
            write_loss_surface(fh, result)
        for name, rep in reports.items():
            with open(out_dir / f"{name}_report.tsv", "w", encoding="utf-8") as fh:
                write_report(fh, rep)
        if len(validation):
            k = cfg.figure_order
            index = train_index if k in cfg.orders else ShingleIndex(train_docs, [k])
            fig_store = build_store(validation.documents(), train_docs, [k], threads=cfg.threads, candidate_index=index)
            image = render_heatmap(validation, train, fig_store, k, cfg.heatmap)
            write_pgm(out_dir / "heatmap.pgm", image)
            summary["heatmap_order"] = str(k)
            summary["heatmap_shape"] = f"{image.shape[0]}x{image.shape[1]}"
        scatter_src = reports.get("test") or reports.get("validation")
        if scatter_src is not None:
            (out_dir / "scatter.tsv").write_text(scatter_data(scatter_src), encoding="utf-8")
        with open(out_dir / "summary.txt", "w", encoding="utf-8") as fh:
            for key, value in summary.items():
                fh.write(f"{key} = {value}\n")
    return summary
