import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from charterdate.corpus import Corpus, Document
from charterdate.errors import DataError
from charterdate.estimator import INF
from charterdate.neighbors import build_store
from charterdate.tuner import BandwidthGrid, cv_loss, read_loss_surface, tune, write_loss_surface

from .helpers import drifting_corpus, naive_cv_loss

TEXT = tuple("in nomine domini amen ego ricardus dedi et concessi".split())


def _setup(docs, orders, keep=None):
    corpus = Corpus(docs)
    return corpus, build_store(corpus.dated(), corpus.dated(), orders, keep=keep)


class TestCvLoss:
    def test_identical_texts_two_dates(self):
        corpus, store = _setup([Document("a", TEXT, 1200), Document("b", TEXT, 1300)], (1, 2))
        assert cv_loss((0.1, 0.1), 5, corpus, store) == 20000.0

    def test_identical_texts_same_date(self):
        docs = [Document(f"d{i}", TEXT, 1250) for i in range(4)]
        corpus, store = _setup(docs, (1,))
        assert cv_loss((0.1,), 2, corpus, store) == 0.0

    @pytest.mark.parametrize("seed", range(6))
    def test_equals_naive_holdout(self, seed, backend):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(5, 51))
        docs = drifting_corpus(seed, n)
        orders = (1, 2, 3)[: int(rng.integers(1, 4))]
        corpus, store = _setup(docs, orders)
        dates = corpus.dates()
        for _ in range(3):
            m = int(rng.choice([1, 3, 5, 10]))
            hs = tuple(float(rng.choice([1e-3, 0.05, 0.3, INF])) for _ in orders)
            if all(math.isinf(h) for h in hs):
                hs = (0.1,) + hs[1:]
            assert cv_loss(hs, m, corpus, store, threads=2) == naive_cv_loss(docs, dates, orders, hs, m)

    def test_truncated_store_gives_same_loss(self):
        docs = drifting_corpus(9, 40)
        corpus, full = _setup(docs, (1, 2))
        _, cut = _setup(docs, (1, 2), keep=10)
        for m in (1, 5, 10):
            assert cv_loss((0.05, 0.2), m, corpus, full) == cv_loss((0.05, 0.2), m, corpus, cut)

    def test_underflow_uses_leave_one_out_mean(self):
        docs = drifting_corpus(2, 12)
        corpus, store = _setup(docs, (1,))
        dates = corpus.dates()
        total = sum(dates.values())
        expected = math.fsum((t - (total - t) / (len(dates) - 1)) ** 2 for t in dates.values())
        assert cv_loss((1e-9,), 5, corpus, store) == pytest.approx(expected, rel=1e-12)

    def test_errors(self):
        corpus, store = _setup([Document("a", TEXT, 1200)], (1,))
        with pytest.raises(DataError):
            cv_loss((0.1,), 5, corpus, store)
        corpus, store = _setup(drifting_corpus(1, 5), (1,))
        with pytest.raises(ValueError):
            cv_loss((0.1, 0.1), 5, corpus, store)
        bigger = Corpus(drifting_corpus(1, 5) + [Document("zz", TEXT, 1300)])
        with pytest.raises(DataError):
            cv_loss((0.1,), 5, bigger, store)

    def test_no_neighbours_at_all(self):
        docs = [Document("a", ("x", "y"), 1200), Document("b", ("p", "q"), 1300)]
        corpus, store = _setup(docs, (1,))
        with pytest.raises(DataError):
            cv_loss((0.1,), 5, corpus, store)


class TestTune:
    def test_minimum_of_surface(self):
        docs = drifting_corpus(4, 40)
        corpus, store = _setup(docs, (1, 2))
        grid = BandwidthGrid.log_spaced(2, n=5, low=1e-3, m_candidates=(2, 5, 10))
        res = tune(corpus, grid, store)
        assert len(res.loss_surface) == len(grid) == 3 * 36
        assert res.cv_loss == min(res.loss_surface.values())
        assert res.loss_surface[(res.best_m, res.best_bandwidths)] == res.cv_loss
        for (m, hs), loss in list(res.loss_surface.items())[::7]:
            assert loss == cv_loss(hs, m, corpus, store)

    def test_single_point_grid(self):
        corpus, store = _setup(drifting_corpus(5, 20), (1,))
        res = tune(corpus, BandwidthGrid(((0.2,),), (5,)), store)
        assert (res.best_m, res.best_bandwidths) == (5, (0.2,))
        assert res.cv_loss == cv_loss((0.2,), 5, corpus, store)

    def test_ties_prefer_small_m_then_small_bandwidth(self):
        # every pool has one neighbour with the same date, so every grid point scores 0
        docs = [Document("a", TEXT, 1200), Document("b", TEXT, 1200)]
        corpus, store = _setup(docs, (1,))
        res = tune(corpus, BandwidthGrid(((0.01, 0.1, INF),), (3, 5)), store)
        assert set(res.loss_surface.values()) == {0.0}
        assert (res.best_m, res.best_bandwidths) == (3, (0.01,))

    @settings(max_examples=15, deadline=None)
    @given(st.integers(0, 10_000))
    def test_wider_grid_never_worse(self, seed):
        docs = drifting_corpus(seed, 15)
        corpus, store = _setup(docs, (1,))
        small = BandwidthGrid(((0.01, 0.1),), (5,))
        large = BandwidthGrid(((0.001, 0.01, 0.05, 0.1, INF),), (2, 5, 10))
        assert tune(corpus, large, store).cv_loss <= tune(corpus, small, store).cv_loss

    def test_order_mismatch(self):
        corpus, store = _setup(drifting_corpus(5, 10), (1,))
        with pytest.raises(ValueError):
            tune(corpus, BandwidthGrid.log_spaced(2, n=3), store)


class TestGrid:
    def test_log_spaced(self):
        g = BandwidthGrid.log_spaced(2, n=25)
        assert len(g.bandwidths[0]) == 26 and math.isinf(g.bandwidths[0][-1])
        assert g.bandwidths[0][0] == pytest.approx(1e-4) and g.bandwidths[0][-2] == pytest.approx(1.0)
        assert len(g) == 4 * 26 * 26
        assert next(iter(g.points())) == (g.bandwidths[0][0],) * 2

    @pytest.mark.parametrize("bw,ms", [(((0.2, 0.1),), (5,)), (((),), (5,)), (((0.0, 1.0),), (5,)),
                                       ((), (5,)), (((0.1,),), ()), (((0.1,),), (5, 5)), (((0.1,),), (0,))])
    def test_validation(self, bw, ms):
        with pytest.raises(ValueError):
            BandwidthGrid(bw, ms)


def test_loss_surface_round_trip():
    corpus, store = _setup(drifting_corpus(6, 20), (1, 2))
    res = tune(corpus, BandwidthGrid(((0.01, INF), (0.1, 0.3)), (2, 5)), store)
    buf = io.StringIO()
    write_loss_surface(buf, res)
    text = buf.getvalue()
    lines = text.splitlines()
    assert len(lines) == 8 and lines[0].startswith("2\t0.01\t0.1\t")
    assert any("\tinf\t" in ln for ln in lines)
    assert read_loss_surface(io.StringIO(text)) == dict(res.loss_surface)
