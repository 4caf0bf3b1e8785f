"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path

from .. import kernels
from ..corpus import read_manifest, write_manifest
from ..errors import DataError, StageError
from ..estimator import INF, KernelConfig, RobustSpec, impute_many
from ..neighbors import build_store
from ..shingle import ShingleIndex, write_resemblance_dump
from ..tuner import BandwidthGrid, tune, write_loss_surface
from .experiment import run_experiment
from .figures import HeatmapParams, render_heatmap, write_pgm
from .metrics import evaluate, read_predictions, write_predictions, write_report
from .synthetic import SyntheticSpec, generate_synthetic

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3

log = logging.getLogger("charterdate")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _orders(value):
    try:
        orders = tuple(int(v) for v in value.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad orders {value!r}") from None
    if not orders or min(orders) < 1:
        raise argparse.ArgumentTypeError("orders must be positive integers")
    return orders


def _pair(value):
    try:
        a, b = (int(v) for v in value.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'lo,hi', got {value!r}") from None
    return a, b


def _bandwidths(value):
    out = []
    for v in value.split(","):
        v = v.strip().lower()
        out.append(INF if v in ("inf", "infinity") else float(v))
    return tuple(out)


def _open_out(path):
    if path in (None, "-"):
        return sys.stdout
    return open(path, "w", encoding="utf-8")


def _close(fh):
    if fh is not sys.stdout:
        fh.close()


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=0, help="random seed (synthetic corpora, splits)")
    p.add_argument("--orders", type=_orders, default=(2,), help="comma-separated shingle orders [2]")
    p.add_argument("--threads", type=int, default=1, help="worker threads; never changes output")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _grid_args(p):
    p.add_argument("--m-candidates", type=_orders, default=(5, 10, 20, 50))
    p.add_argument("--grid-size", type=int, default=25)
    p.add_argument("--grid-min", type=float, default=1e-4)
    p.add_argument("--grid-max", type=float, default=1.0)
    p.add_argument("--no-inf", action="store_true", help="leave the infinite bandwidth out of the grid")
    p.add_argument("--kernel", choices=("exponential", "boxcar"), default="exponential")
    p.add_argument("--cutoff", type=float, default=1.0)


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(prog="charterdate", description="Date documents by kernel smoothing over shingle resemblances.")
    parser.add_argument("--backend", choices=("cython", "python"), help="force a kernel backend")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("synth", parents=[common], help="write a synthetic dated manifest")
    p.add_argument("-n", "--n-documents", type=int, required=True)
    p.add_argument("--date-range", type=_pair, default=(1100, 1400))
    p.add_argument("--vocab-size", type=int, default=4000)
    p.add_argument("--drift-rate", type=float, default=1.5)
    p.add_argument("--length-range", type=_pair, default=(200, 400))
    p.add_argument("--window", type=int, default=500)
    p.add_argument("--common-fraction", type=float, default=0.3)
    p.add_argument("-o", "--output", default="-")

    p = sub.add_parser("shingle", parents=[common], help="list shingle-set sizes and fingerprints")
    p.add_argument("manifest")
    p.add_argument("-o", "--output", default="-")

    p = sub.add_parser("resemble", parents=[common], help="write the sparse resemblance dump")
    p.add_argument("--targets", required=True)
    p.add_argument("--candidates", help="defaults to the targets manifest")
    p.add_argument("-o", "--output", default="-")

    p = sub.add_parser("tune", parents=[common], help="cross-validate (m, bandwidths) on a training manifest")
    p.add_argument("--train", required=True)
    _grid_args(p)
    p.add_argument("-o", "--output", default=None, help="loss-surface TSV")

    p = sub.add_parser("impute", parents=[common], help="impute dates for target documents")
    p.add_argument("--train", required=True)
    p.add_argument("--targets", required=True)
    p.add_argument("-m", type=int, required=True)
    p.add_argument("--bandwidths", type=_bandwidths, required=True, help="one per order; 'inf' allowed")
    p.add_argument("--kernel", choices=("exponential", "boxcar"), default="exponential")
    p.add_argument("--cutoff", type=float, default=1.0)
    p.add_argument("--estimator", choices=("mean", "median", "huber"), default="mean")
    p.add_argument("-o", "--output", default="-")

    p = sub.add_parser("evaluate", parents=[common], help="score predictions against true dates")
    p.add_argument("--predictions", required=True)
    p.add_argument("--truth", required=True, help="manifest with the true dates")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--train", help="training manifest (its mean date is the baseline)")
    g.add_argument("--training-mean", type=float)
    p.add_argument("-o", "--output", default=None, help="per-document report TSV")

    p = sub.add_parser("heatmap", parents=[common], help="render the validation x training heatmap (PGM)")
    p.add_argument("--validation", required=True)
    p.add_argument("--training", required=True)
    p.add_argument("--clip-high", type=float, default=0.3)
    p.add_argument("--zero-floor", type=float, default=0.1)
    p.add_argument("--group-size", type=int, default=5)
    p.add_argument("--white-threshold", type=float, default=0.8)
    p.add_argument("-o", "--output", required=True)

    p = sub.add_parser("run", parents=[common], help="run a full experiment from a config file")
    p.add_argument("config")
    p.add_argument("--output-dir")
    return parser


def _cmd_synth(a):
    corpus = generate_synthetic(SyntheticSpec(
        n_documents=a.n_documents, date_range=a.date_range, vocab_size=a.vocab_size, drift_rate=a.drift_rate,
        doc_length_range=a.length_range, seed=a.seed, window=a.window, common_fraction=a.common_fraction,
    ))
    fh = _open_out(a.output)
    write_manifest(corpus, fh)
    _close(fh)


def _cmd_shingle(a):
    docs = read_manifest(a.manifest).documents()
    index = ShingleIndex(docs, a.orders)
    fh = _open_out(a.output)
    for i, doc in enumerate(index.documents):
        for k in index.orders:
            s = index.shingle_set(i, k)
            fh.write(f"{doc.id}\t{k}\t{s.count}\t{' '.join(f'{int(x):016x}' for x in s.fingerprints)}\n")
    _close(fh)


def _cmd_resemble(a):
    targets = read_manifest(a.targets).documents()
    cands = read_manifest(a.candidates).documents() if a.candidates else targets
    fh = _open_out(a.output)
    write_resemblance_dump(fh, ShingleIndex(targets, a.orders), ShingleIndex(cands, a.orders), threads=a.threads)
    _close(fh)


def _cmd_tune(a):
    train = read_manifest(a.train).dated()
    docs = train.documents()
    store = build_store(docs, docs, a.orders, keep=max(a.m_candidates), threads=a.threads)
    grid = BandwidthGrid.log_spaced(len(store.orders), a.grid_size, a.grid_min, a.grid_max, not a.no_inf, a.m_candidates)
    result = tune(train, grid, store, kernel=a.kernel, cutoff=a.cutoff, threads=a.threads)
    if a.output:
        with open(a.output, "w", encoding="utf-8") as fh:
            write_loss_surface(fh, result)
    hs = ",".join("inf" if math.isinf(h) else repr(h) for h in result.best_bandwidths)
    print(f"orders\t{','.join(map(str, store.orders))}\nbest_m\t{result.best_m}\nbest_bandwidths\t{hs}\ncv_loss\t{result.cv_loss!r}")


def _cmd_impute(a):
    train = read_manifest(a.train).dated()
    targets = read_manifest(a.targets)
    orders = tuple(sorted(set(a.orders)))
    if len(a.bandwidths) != len(orders):
        raise UsageError(f"{len(a.bandwidths)} bandwidths given for orders {orders}")
    cfg = KernelConfig(a.bandwidths, a.m, a.kernel, a.cutoff)
    store = build_store(targets.documents(), train.documents(), orders, keep=a.m, threads=a.threads)
    robust = {"mean": None, "median": RobustSpec("absolute"), "huber": RobustSpec("huber")}[a.estimator]
    preds = impute_many(targets, store, train.dates(), cfg, robust=robust, threads=a.threads)
    fh = _open_out(a.output)
    write_predictions(fh, preds)
    _close(fh)


def _cmd_evaluate(a):
    with open(a.predictions, encoding="utf-8") as fh:
        preds = read_predictions(fh)
    truth = read_manifest(a.truth).dates()
    mean = a.training_mean if a.training_mean is not None else read_manifest(a.train).mean_date()
    report = evaluate(preds, truth, mean)
    if a.output:
        with open(a.output, "w", encoding="utf-8") as fh:
            write_report(fh, report)
    print(f"mae\t{report.mae!r}\nbaseline_mae\t{report.baseline_mae!r}")


def _cmd_heatmap(a):
    validation = read_manifest(a.validation).dated()
    training = read_manifest(a.training).dated()
    k = a.orders[0]
    params = HeatmapParams(a.clip_high, a.zero_floor, a.group_size, a.white_threshold)
    store = build_store(validation.documents(), training.documents(), [k], threads=a.threads)
    write_pgm(a.output, render_heatmap(validation, training, store, k, params))


def _cmd_run(a):
    summary = run_experiment(a.config, output_dir=a.output_dir)
    for key, value in summary.items():
        print(f"{key} = {value}")


COMMANDS = {
    "synth": _cmd_synth, "shingle": _cmd_shingle, "resemble": _cmd_resemble, "tune": _cmd_tune,
    "impute": _cmd_impute, "evaluate": _cmd_evaluate, "heatmap": _cmd_heatmap, "run": _cmd_run,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.backend:
            kernels.set_backend(args.backend)
        if args.threads < 1:
            raise UsageError("--threads must be >= 1")
        COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"charterdate: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except StageError as exc:
        print(f"charterdate: {exc}", file=sys.stderr)
        return EXIT_DATA if isinstance(exc.cause, (DataError, OSError)) else EXIT_INTERNAL
    except (DataError, OSError) as exc:
        print(f"charterdate: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # noqa: BLE001
        log.exception("internal error")
        print(f"charterdate: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
