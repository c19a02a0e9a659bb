"""Monte Carlo estimates of guessing success for spaces too large to enumerate.

Each sample draws ``x^t`` symbol-by-symbol from the single-letter
distribution (the source is memoryless), pushes it through the encoder and
scores the exact conditional top-c mass at the observed ``(y, x_P)``.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .codes import StochasticCode
from .model import AdversarySpec, Distribution, Layout, marginal

Z95 = 1.959963984540054


@dataclass(frozen=True)
class MonteCarloEstimate:
    mean: float
    stderr: float
    lo: float
    hi: float
    samples: int
    seed: int
    shards: int

    def covers(self, value) -> bool:
        return self.lo <= float(value) <= self.hi


class _Scorer:
    """Exact conditional top-c mass for an observation, cached per observation."""

    def __init__(self, code, base: Distribution, adversary: AdversarySpec, t: int, c: int):
        self.code, self.base, self.t, self.c = code, base, t, c
        self.layout = Layout(base.q, base.scope, t)
        self.P, self.Q = adversary.P, adversary.Q
        self.lp = Layout(base.q, self.P, t)
        self.lq = Layout(base.q, self.Q, t)
        self.pos = {i: k for k, i in enumerate(base.scope)}
        self.cache: dict[tuple[int, int], float] = {}

    def _compose(self, xp: int, xq: int) -> int:
        blocks = [0] * len(self.base.scope)
        for i, b in zip(self.P, self.lp.blocks(xp)):
            blocks[self.pos[i]] = b
        for i, b in zip(self.Q, self.lq.blocks(xq)):
            blocks[self.pos[i]] = b
        return self.layout.from_blocks(blocks)

    def _weight(self, x: int) -> int:
        w = 1
        for s in self.layout.time_slices(x):
            w *= self.base.weights[s]
        return w

    def _py(self, x: int, y: int) -> Fraction:
        if self.code is None:
            return Fraction(1)
        if isinstance(self.code, StochasticCode):
            return self.code.rows[x][y - 1]
        return Fraction(int(self.code.table[x] == y))

    def score(self, y: int, xp: int) -> float:
        key = (y, xp)
        if key not in self.cache:
            masses = []
            for xq in range(self.lq.size):
                x = self._compose(xp, xq)
                p = self._py(x, y)
                if p:
                    masses.append(self._weight(x) * p)
            total = sum(masses)
            top = sum(heapq.nlargest(self.c, masses))
            self.cache[key] = float(Fraction(top) / Fraction(total))
        return self.cache[key]


def _draw(rng: np.random.Generator, code, base: Distribution, t: int, count: int, known: tuple[int, ...]):
    """Sampled codewords and adversary-side ``x_P`` indices, vectorized."""
    p = np.array([w / base.denom for w in base.weights], dtype=float)
    letters = rng.choice(base.size, size=(count, t), p=p)
    k = len(base.scope)
    q, R = base.q, base.q**t
    if R**k >= 2**62:
        raise ValueError("sequence space too large for int64 sampling")
    # per-message sequence index: digits of each letter, time 1 most significant
    blocks = np.zeros((count, k), dtype=np.int64)
    for j in range(t):
        s = letters[:, j]
        for a in range(k):
            blocks[:, a] = blocks[:, a] * q + (s // q ** (k - 1 - a)) % q
    xs = np.zeros(count, dtype=np.int64)
    for a in range(k):
        xs = xs * R + blocks[:, a]
    xp = np.zeros(count, dtype=np.int64)
    for i in known:
        xp = xp * R + blocks[:, base.scope.index(i)]
    if code is None:
        ys = np.ones(count, dtype=np.int64)
    elif isinstance(code, StochasticCode):
        cdf = np.cumsum(np.array([[float(v) for v in row] for row in code.rows]), axis=1)
        u = rng.random(count)
        ys = (u[:, None] >= cdf[xs]).sum(axis=1) + 1
        ys = np.minimum(ys, code.M)
    else:
        ys = np.asarray(code.table, dtype=np.int64)[xs]
    return ys, xp


def estimate_ps(code, dist: Distribution, adversary: AdversarySpec, t: int | None = None,
                samples: int = 100_000, seed: int = 0, shards: int = 1, c: int | None = None) -> MonteCarloEstimate:
    """Sample-mean estimate of the posterior success probability with a 95% normal interval.

    ``code=None`` estimates the prior success probability instead.  Results
    depend only on ``(seed, shards)``.
    """
    t = (code.t if code is not None else 1) if t is None else t
    c = adversary.c(t) if c is None else c
    base = dist if dist.t == 1 else None
    if base is None:
        raise ValueError("estimate_ps takes the single-letter distribution")
    base = marginal(base, tuple(range(1, adversary.n + 1)))
    scorer = _Scorer(code, base, adversary, t, c)
    children = np.random.SeedSequence(seed).spawn(shards)
    sizes = [samples // shards + (1 if s < samples % shards else 0) for s in range(shards)]
    values = []
    for ss, count in zip(children, sizes):
        rng = np.random.default_rng(ss)
        ys, xp = _draw(rng, code, base, t, count, adversary.P)
        keys = np.stack([ys, xp], axis=1)
        uniq, inv = np.unique(keys, axis=0, return_inverse=True)
        scores = np.array([scorer.score(int(y), int(xp)) for y, xp in uniq])
        values.append(scores[np.asarray(inv).ravel()])
    v = np.concatenate(values) if values else np.zeros(0)
    mean = float(v.mean())
    stderr = float(v.std(ddof=1) / math.sqrt(len(v))) if len(v) > 1 else float("inf")
    return MonteCarloEstimate(mean, stderr, mean - Z95 * stderr, mean + Z95 * stderr, samples, seed, shards)
