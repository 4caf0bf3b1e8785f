"""Compare the compiled and pure-Python kernel backends.

Times the all-pairs shingle intersection (``cross_intersections``) and the
pooled kernel-weighted means (``pool_predictions``) on a synthetic corpus, and
checks that both backends return identical arrays.

    python benchmarks/bench_kernels.py --targets 170 --candidates 3050 --threads 1
"""

import argparse
import time

import numpy as np

from charterdate import kernels
from charterdate.harness import SyntheticSpec, generate_synthetic
from charterdate.shingle import ShingleIndex


def _best_of(fn, repeat):
    best, out = float("inf"), None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--targets", type=int, default=170)
    ap.add_argument("--candidates", type=int, default=3050)
    ap.add_argument("--orders", default="1,2,3")
    ap.add_argument("--threads", type=int, default=kernels.default_threads())
    ap.add_argument("--pools", type=int, default=20000, help="number of pools for pool_predictions")
    ap.add_argument("--pool-size", type=int, default=50)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    a = ap.parse_args(argv)

    orders = tuple(int(k) for k in a.orders.split(","))
    corpus = generate_synthetic(SyntheticSpec(a.targets + a.candidates, seed=a.seed))
    docs = sorted(corpus.documents(), key=lambda d: d.id)
    t0 = time.perf_counter()
    ta = ShingleIndex(docs[:a.targets], orders)
    tb = ShingleIndex(docs[a.targets:], orders)
    print(f"shingling {len(docs)} documents x {len(orders)} orders: {time.perf_counter() - t0:.2f}s")

    rng = np.random.default_rng(a.seed)
    ptr = np.arange(a.pools + 1, dtype=np.int64) * a.pool_size
    dates = rng.integers(1100, 1400, size=ptr[-1]).astype(np.float64)
    dists = rng.uniform(0, 1, size=(ptr[-1], len(orders)))
    fallback = np.full(a.pools, 1250.0)
    hs = [0.05] * len(orders)

    results = {}
    for name in kernels.available_backends():
        kernels.set_backend(name)
        reps = 1 if name == "python" else a.repeat

        def inter():
            return [kernels.cross_intersections(*ta.packed(k), *tb.packed(k), threads=a.threads, space=tb.term_space(k))
                    for k in orders]

        def pool():
            return kernels.pool_predictions(ptr, dates, dists, hs, "exponential", 1.0, fallback, threads=a.threads)

        t_inter, c = _best_of(inter, reps)
        t_pool, p = _best_of(pool, reps)
        results[name] = (c, p)
        print(f"{name:>7}: intersections {a.targets}x{a.candidates}x{len(orders)} {t_inter:8.3f}s   "
              f"pool_predictions {a.pools}x{a.pool_size} {t_pool:8.3f}s")

    if len(results) == 2:
        (c1, p1), (c2, p2) = results.values()
        same = all(np.array_equal(x, y) for x, y in zip(c1, c2)) and all(np.array_equal(x, y) for x, y in zip(p1, p2))
        print(f"backends agree bit for bit: {same}")


if __name__ == "__main__":
    main()
