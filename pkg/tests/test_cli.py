import subprocess
import sys

import pytest

from charterdate import kernels
from charterdate.corpus import read_manifest, write_manifest
from charterdate.harness.cli import main
from charterdate.harness.figures import read_pgm


@pytest.fixture(autouse=True)
def _restore_backend():
    name = kernels.backend()
    yield
    kernels.set_backend(name)


@pytest.fixture(scope="module")
def manifests(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    paths = {}
    paths["all"] = d / "all.tsv"
    assert main(["synth", "-n", "170", "--seed", "1", "--length-range", "40,80", "-o", str(paths["all"])]) == 0
    corpus = read_manifest(paths["all"])
    ids = sorted(corpus)
    for name, part in (("train", ids[:150]), ("val", ids[150:])):
        paths[name] = d / f"{name}.tsv"
        with open(paths[name], "w", encoding="utf-8") as fh:
            write_manifest(corpus.subset(part), fh)
    return paths


def test_synth_is_deterministic(manifests, tmp_path):
    out = tmp_path / "again.tsv"
    assert main(["synth", "-n", "170", "--seed", "1", "--length-range", "40,80", "-o", str(out)]) == 0
    assert out.read_bytes() == manifests["all"].read_bytes()


def test_shingle(manifests, tmp_path, capsys):
    assert main(["shingle", str(manifests["val"]), "--orders", "1,2"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 40
    doc, k, count, fps = lines[0].split("\t")
    assert k == "1" and int(count) == len(fps.split())


def test_resemble_threads_do_not_change_output(manifests, tmp_path):
    outs = []
    for threads in ("1", "3"):
        out = tmp_path / f"res{threads}.tsv"
        argv = ["resemble", "--targets", str(manifests["val"]), "--candidates", str(manifests["train"]),
                "--orders", "1,2,3", "--threads", threads, "-o", str(out)]
        assert main(argv) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1] and outs[0]
    first = outs[0].decode().splitlines()[0].split("\t")
    assert len(first) == 4 and 0 < float(first[3]) <= 1


def test_tune_impute_evaluate(manifests, tmp_path, capsys):
    surface = tmp_path / "surface.tsv"
    argv = ["tune", "--train", str(manifests["train"]), "--grid-size", "4", "--m-candidates", "5,10", "-o", str(surface)]
    assert main(argv) == 0
    fields = dict(ln.split("\t") for ln in capsys.readouterr().out.splitlines())
    assert fields["orders"] == "2" and fields["best_m"] in ("5", "10")
    assert len(surface.read_text().splitlines()) == 2 * 5

    preds = tmp_path / "preds.tsv"
    argv = ["impute", "--train", str(manifests["train"]), "--targets", str(manifests["val"]),
            "-m", fields["best_m"], "--bandwidths", fields["best_bandwidths"], "-o", str(preds)]
    assert main(argv) == 0
    assert len(preds.read_text().splitlines()) == 21

    report = tmp_path / "report.tsv"
    argv = ["evaluate", "--predictions", str(preds), "--truth", str(manifests["val"]),
            "--train", str(manifests["train"]), "-o", str(report)]
    assert main(argv) == 0
    out = dict(ln.split("\t") for ln in capsys.readouterr().out.splitlines())
    assert float(out["mae"]) < float(out["baseline_mae"])
    assert report.read_text().startswith("#id\t")


def test_heatmap(manifests, tmp_path):
    out = tmp_path / "h.pgm"
    argv = ["heatmap", "--validation", str(manifests["val"]), "--training", str(manifests["train"]), "-o", str(out)]
    assert main(argv) == 0
    assert read_pgm(out).shape == (20, 30)


def test_run(manifests, tmp_path, capsys):
    cfg = tmp_path / "exp.cfg"
    cfg.write_text(f"manifest = {manifests['train']}\norders = 2\ngrid_size = 4\nm_candidates = 5\n"
                   "train_fraction = 0.8\nvalidation_fraction = 0.1\ntest_fraction = 0.1\n")
    assert main(["run", str(cfg), "--output-dir", str(tmp_path / "out")]) == 0
    assert "best_m = 5" in capsys.readouterr().out
    assert (tmp_path / "out" / "heatmap.pgm").exists()


def test_python_backend_flag(manifests, tmp_path):
    a, b = tmp_path / "a.tsv", tmp_path / "b.tsv"
    argv = ["resemble", "--targets", str(manifests["val"]), "--orders", "2"]
    assert main(["--backend", "python", *argv, "-o", str(a)]) == 0
    kernels.set_backend(kernels.available_backends()[0])
    assert main([*argv, "-o", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


@pytest.mark.parametrize("argv", [
    [],
    ["frobnicate"],
    ["synth"],
    ["synth", "-n", "5", "--orders", "0"],
    ["synth", "-n", "5", "--threads", "0"],
    ["impute", "--train", "x", "--targets", "y", "-m", "5", "--bandwidths", "0.1,0.2", "--orders", "2"],
])
def test_usage_errors(argv, manifests):
    if argv and argv[0] == "impute":
        argv = [a if a not in ("x", "y") else str(manifests["train"]) for a in argv]
    assert main(argv) == 1


def test_data_errors(manifests, tmp_path):
    bad = tmp_path / "bad.tsv"
    bad.write_text("a\tnot-a-date\tsome words\n")
    assert main(["shingle", str(tmp_path / "missing.tsv")]) == 2
    assert main(["shingle", str(bad)]) == 2
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("nonsense_key = 1\n")
    assert main(["run", str(cfg)]) == 2
    preds = tmp_path / "p.tsv"
    preds.write_text("zzz\t1200.0\t1\t0\n")
    assert main(["evaluate", "--predictions", str(preds), "--truth", str(manifests["val"]), "--training-mean", "1250"]) == 2


def test_console_entry_point(manifests):
    proc = subprocess.run([sys.executable, "-m", "charterdate.harness.cli", "shingle", str(tmp := manifests["val"])],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.count("\n") == 20 and tmp.exists()
    proc = subprocess.run([sys.executable, "-m", "charterdate.harness.cli", "synth"], capture_output=True, text=True)
    assert proc.returncode == 1
