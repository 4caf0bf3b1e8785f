"""Shared generators and brute-force oracles for the test suite."""

import math

import numpy as np

from charterdate.corpus import Document


def random_tokens(rng, vocab, length):
    return [f"w{int(i)}" for i in rng.integers(0, vocab, size=length)]


def mutate(rng, tokens, vocab, rate):
    """Copy ``tokens`` replacing, deleting or inserting words at ``rate``."""
    out = []
    for tok in tokens:
        u = rng.random()
        if u < rate / 3:
            continue
        if u < 2 * rate / 3:
            out.append(f"w{int(rng.integers(vocab))}")
        else:
            out.append(tok)
        if rng.random() < rate / 3:
            out.append(f"w{int(rng.integers(vocab))}")
    return out or tokens[:1]


def random_pairs(seed, n, vocab_max=5000, lengths=(50, 500)):
    """Document pairs mixing unrelated texts and near duplicates, vocabularies 5..vocab_max."""
    rng = np.random.default_rng(seed)
    pairs = []
    for i in range(n):
        vocab = int(rng.integers(5, vocab_max + 1))
        a = random_tokens(rng, vocab, int(rng.integers(lengths[0], lengths[1] + 1)))
        if rng.random() < 0.5:
            b = random_tokens(rng, vocab, int(rng.integers(lengths[0], lengths[1] + 1)))
        else:
            b = mutate(rng, a, vocab, float(rng.uniform(0.0, 0.6)))
            b = b[: lengths[1]] if len(b) >= lengths[0] else b + a[: lengths[0] - len(b)]
        pairs.append((Document(f"a{i}", tuple(a)), Document(f"b{i}", tuple(b))))
    return pairs


def tuple_set(tokens, k):
    return {tuple(tokens[i:i + k]) for i in range(len(tokens) - k + 1)}


def exact_distance(tokens_a, tokens_b, k):
    """Resemblance distance straight from literal word-tuple sets."""
    sa, sb = tuple_set(tokens_a, k), tuple_set(tokens_b, k)
    return 1.0 - len(sa & sb) / len(sa | sb)


def grid_argmin(objective, lo, hi, step):
    grid = np.arange(lo, hi + step / 2, step)
    return float(grid[np.argmin(objective(grid))])


def exp_weight(dists, bandwidths):
    w = 1.0
    for d, h in zip(dists, bandwidths):
        w = w * math.exp(-(0.0 if math.isinf(h) else d / h))
    return w


def naive_cv_loss(docs, dates, orders, bandwidths, m):
    """Leave-one-out squared error rebuilt from scratch for every held-out document.

    Word-tuple sets, candidate ranking and weights are recomputed per holdout;
    nothing is shared with the library's store or kernels.
    """
    ids = sorted(dates)
    by_id = {d.id: d for d in docs}
    errors = []
    for held in ids:
        others = [c for c in ids if c != held]
        dist = {}
        for c in others:
            row = []
            for k in orders:
                sa, sb = tuple_set(by_id[held].tokens, k), tuple_set(by_id[c].tokens, k)
                union = len(sa | sb)
                row.append(1.0 - len(sa & sb) / union if union else 1.0)
            dist[c] = row
        pool = set()
        for pos in range(len(orders)):
            ranked = sorted((dist[c][pos], c) for c in others if dist[c][pos] < 1.0)
            pool.update(c for _, c in ranked[:m])
        num = den = 0.0
        for c in sorted(pool):
            w = exp_weight(dist[c], bandwidths)
            num = num + dates[c] * w
            den = den + w
        if den > 0.0:
            pred = num / den
        else:
            pred = math.fsum(dates[c] for c in others) / len(others)
        errors.append((dates[held] - pred) ** 2)
    return math.fsum(errors)


def drifting_corpus(seed, n, vocab=400, lengths=(30, 80), span=(1100, 1400)):
    """Small corpus whose vocabulary window slides with the date."""
    rng = np.random.default_rng(seed)
    docs = []
    for i in range(n):
        t = int(rng.integers(span[0], span[1] + 1))
        base = int((t - span[0]) * (vocab - 60) / (span[1] - span[0]))
        toks = [f"w{int(base + j)}" for j in rng.integers(0, 60, size=int(rng.integers(*lengths)))]
        docs.append(Document(f"d{i:03d}", tuple(toks), t))
    return docs
