"""Synthetic dated corpora with a drifting vocabulary.

Words sit on a line.  A document dated ``t`` draws its tokens from the
``window`` consecutive words starting at ``floor((t - t_min) * drift_rate)``,
with Zipf frequencies inside the window.  The rank of word ``v`` is
``(v * stride) mod window``, so every window holds each rank exactly once and
the frequent words change as the window slides: documents close in time share
more shingles.  A fraction ``common_fraction`` of tokens instead comes from a
fixed, date-independent set of ``common_words`` Zipf-distributed function
words; with ``common_fraction=0`` documents whose windows do not overlap share
nothing at all.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..corpus import Corpus, Document

_ONSETS = ["", "b", "c", "d", "f", "g", "l", "m", "n", "p", "r", "s", "t", "v", "qu", "tr", "pr", "st", "gr", "cl"]
_VOWELS = ["a", "e", "i", "o", "u", "ae", "ia", "io"]
_CODAS = ["", "s", "m", "t", "n", "r", "x", "nt"]


@dataclass(frozen=True)
class SyntheticSpec:
    n_documents: int
    date_range: tuple[int, int] = (1100, 1400)
    vocab_size: int = 4000
    drift_rate: float = 1.5
    doc_length_range: tuple[int, int] = (200, 400)
    seed: int = 0
    window: int = 500
    zipf_exponent: float = 1.0
    common_words: int = 60
    common_fraction: float = 0.3

    def __post_init__(self):
        lo, hi = self.date_range
        if not 0 < lo < hi:
            raise ValueError(f"date_range must be an increasing pair of positive years, got {self.date_range}")
        if self.drift_rate < 0:
            raise ValueError("drift_rate must be >= 0")
        a, b = self.doc_length_range
        if not 1 <= a <= b:
            raise ValueError(f"bad doc_length_range {self.doc_length_range}")
        if not 0.0 <= self.common_fraction < 1.0:
            raise ValueError("common_fraction must lie in [0, 1)")
        if self.common_fraction > 0 and self.common_words < 1:
            raise ValueError("common_fraction > 0 needs common_words >= 1")
        if self.n_documents < 1 or self.window < 1:
            raise ValueError("n_documents and window must be positive")
        if self.vocab_size < self.window + self.max_shift:
            raise ValueError(
                f"vocab_size {self.vocab_size} too small: need window + drift span = {self.window + self.max_shift}"
            )

    @property
    def max_shift(self) -> int:
        lo, hi = self.date_range
        return math.floor((hi - lo) * self.drift_rate)

    def window_start(self, year: int) -> int:
        return math.floor((year - self.date_range[0]) * self.drift_rate)


def _vocabulary(n: int, rng: np.random.Generator) -> list[str]:
    words: set[str] = set()
    out: list[str] = []
    while len(out) < n:
        syllables = rng.integers(2, 4)
        w = "".join(
            _ONSETS[rng.integers(len(_ONSETS))] + _VOWELS[rng.integers(len(_VOWELS))] + _CODAS[rng.integers(len(_CODAS))]
            for _ in range(syllables)
        )
        if w not in words:
            words.add(w)
            out.append(w)
    return out


def _stride(window: int) -> int:
    # any stride coprime to the window permutes the ranks; pick one near the golden ratio
    s = max(1, int(window * 0.618))
    while math.gcd(s, window) != 1:
        s += 1
    return s


def generate_synthetic(spec: SyntheticSpec) -> Corpus:
    rng = np.random.default_rng(spec.seed)
    n_common = spec.common_words if spec.common_fraction > 0 else 0
    words_all = _vocabulary(spec.vocab_size + n_common, rng)
    vocab, common = words_all[:spec.vocab_size], words_all[spec.vocab_size:]
    common_p = np.arange(1, n_common + 1, dtype=float) ** -spec.zipf_exponent
    common_p /= common_p.sum() if n_common else 1.0
    ranks = (np.arange(spec.vocab_size) * _stride(spec.window)) % spec.window + 1
    zipf = ranks.astype(float) ** -spec.zipf_exponent
    lo, hi = spec.date_range
    years = rng.integers(lo, hi + 1, size=spec.n_documents)
    lengths = rng.integers(spec.doc_length_range[0], spec.doc_length_range[1] + 1, size=spec.n_documents)
    width = len(str(spec.n_documents))
    docs = []
    for i, (year, n) in enumerate(zip(years, lengths)):
        start = spec.window_start(int(year))
        p = zipf[start:start + spec.window]
        words = rng.choice(spec.window, size=int(n), p=p / p.sum()) + start
        tokens = [vocab[w] for w in words]
        if n_common:
            slots = np.flatnonzero(rng.random(int(n)) < spec.common_fraction)
            for slot, w in zip(slots, rng.choice(n_common, size=slots.size, p=common_p)):
                tokens[slot] = common[w]
        docs.append(Document(f"syn{i:0{width}d}", tuple(tokens), int(year)))
    return Corpus(docs)
