"""Noisy same-cluster oracle and random query graphs.

Each unordered pair ``{u, v}`` has one fixed answer ``sigma(u) sigma(v) eta``
where ``eta = -1`` with probability ``q``. The noise bit is a hash of
``(seed, min(u, v), max(u, v))`` (splitmix64 in counter mode), so answers do
not depend on the order in which pairs are asked.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .graph import SignedGraph

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_EDGE_SALT = 0x5DEECE66D
_TWO_53 = float(2 ** 53)


def _splitmix64(x: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        z = x + _GOLDEN
        z = (z ^ (z >> np.uint64(30))) * _MIX1
        z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


def pair_uniform(seed: int, lo, hi) -> np.ndarray:
    """Uniform [0, 1) variates keyed by ``(seed, lo, hi)``; vectorised."""
    key = _splitmix64(np.array([int(seed) % 2 ** 64], dtype=np.uint64))
    lo = np.asarray(lo, dtype=np.uint64)
    hi = np.asarray(hi, dtype=np.uint64)
    z = _splitmix64(_splitmix64(key ^ lo) ^ hi)
    return (z >> np.uint64(11)).astype(np.float64) / _TWO_53


@dataclass(frozen=True)
class OracleConfig:
    """Corruption probability ``q`` and noise seed.

    ``strict`` enforces the open interval 0 < q < 1/2; with ``strict=False``
    the closed boundaries are allowed (q = 0 gives a noiseless oracle).
    """

    q: float
    seed: int = 0
    strict: bool = True

    def __post_init__(self):
        q = float(self.q)
        if self.strict and not 0.0 < q < 0.5:
            raise ValueError(f"corruption probability must satisfy 0 < q < 1/2, got {q}")
        if not 0.0 <= q <= 0.5:
            raise ValueError(f"corruption probability must lie in [0, 1/2], got {q}")

    @property
    def delta(self) -> float:
        return 1.0 - 2.0 * self.q

    @classmethod
    def from_delta(cls, delta: float, seed: int = 0, strict: bool = True) -> "OracleConfig":
        return cls((1.0 - delta) / 2.0, seed, strict)


class NoisyOracle:
    """Answers same-cluster queries about a hidden coloring, each pair once.

    Repeated questions return the cached answer and are not counted again.
    ``query_count`` is the number of distinct pairs answered so far.
    """

    def __init__(self, truth, q: float | OracleConfig, seed: int = 0, strict: bool = True):
        self.config = q if isinstance(q, OracleConfig) else OracleConfig(q, seed, strict)
        self.truth = np.asarray(truth, dtype=np.int8)
        if not np.isin(self.truth, (-1, 1)).all():
            raise ValueError("truth must be a +-1 coloring")
        self.n = len(self.truth)
        self._answers: dict[int, int] = {}

    @property
    def q(self) -> float:
        return self.config.q

    @property
    def delta(self) -> float:
        return self.config.delta

    @property
    def query_count(self) -> int:
        return len(self._answers)

    def _keys(self, u: np.ndarray, v: np.ndarray):
        if np.any(u == v):
            raise ValueError("cannot query a node against itself")
        if u.size and (min(u.min(), v.min()) < 0 or max(u.max(), v.max()) >= self.n):
            raise IndexError("node id out of range")
        lo = np.minimum(u, v)
        hi = np.maximum(u, v)
        return lo, hi

    def _fresh_answers(self, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
        eta = np.where(pair_uniform(self.config.seed, lo, hi) < self.config.q, -1, 1)
        return (self.truth[lo] * self.truth[hi] * eta).astype(np.int8)

    def query_many(self, u, v) -> np.ndarray:
        """Answers for the pairs ``(u[i], v[i])``; records every new pair."""
        u = np.asarray(u, dtype=np.int64).ravel()
        v = np.asarray(v, dtype=np.int64).ravel()
        if u.shape != v.shape:
            raise ValueError("u and v must have the same length")
        lo, hi = self._keys(u, v)
        answers = self._fresh_answers(lo, hi)
        cache = self._answers
        keys = (lo * self.n + hi).tolist()
        for k, a in zip(keys, answers.tolist()):
            if k not in cache:
                cache[k] = a
        return answers

    def query(self, u: int, v: int) -> int:
        if u == v:
            raise ValueError("cannot query a node against itself")
        lo, hi = (u, v) if u < v else (v, u)
        key = lo * self.n + hi
        cached = self._answers.get(key)
        if cached is not None:
            return cached
        return int(self.query_many([u], [v])[0])

    def query_block(self, rows, cols) -> np.ndarray:
        """``len(rows) x len(cols)`` matrix of answers for all cross pairs."""
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        uu = np.repeat(rows, len(cols))
        vv = np.tile(cols, len(rows))
        return self.query_many(uu, vv).reshape(len(rows), len(cols))

    def cached(self, u: int, v: int) -> int | None:
        lo, hi = (u, v) if u < v else (v, u)
        return self._answers.get(lo * self.n + hi)

    def transcript(self) -> list[tuple[int, int, int]]:
        """``(u, v, answer)`` for every answered pair, in first-asked order."""
        n = self.n
        return [(k // n, k % n, a) for k, a in self._answers.items()]

    def write_transcript(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["u", "v", "answer"])
            w.writerows(self.transcript())


def read_transcript(path) -> list[tuple[int, int, int]]:
    with open(path, newline="") as fh:
        return [(int(r["u"]), int(r["v"]), int(r["answer"])) for r in csv.DictReader(fh)]


class QueryGraph(SignedGraph):
    """Undirected graph of queried pairs, stored as edges ``lo -> hi``.

    ``und[u][v]`` is the oracle's answer for ``{u, v}``.
    """

    def __init__(self, node_count, edges, queries: int, p: float):
        super().__init__(node_count, edges)
        self.queries = queries
        self.p = p

    def answer(self, u: int, v: int) -> int:
        return self.und[u][v]


def sample_query_graph(oracle: NoisyOracle, n: int | None = None, p: float = 1.0,
                       chunk: int = 2_000_000) -> QueryGraph:
    """Include each pair independently with probability ``p`` and query it.

    Pair inclusion is hashed from the oracle seed, so the resulting graph and
    transcript depend only on ``(n, seed, p)``.
    """
    n = oracle.n if n is None else int(n)
    if n > oracle.n:
        raise ValueError(f"oracle knows {oracle.n} nodes, asked for {n}")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"edge probability must lie in [0, 1], got {p}")
    before = oracle.query_count
    edges: list[tuple[int, int, int]] = []
    if p > 0 and n > 1:
        lo_all, hi_all = np.triu_indices(n, k=1)
        for start in range(0, len(lo_all), chunk):
            lo = lo_all[start:start + chunk]
            hi = hi_all[start:start + chunk]
            keep = pair_uniform(oracle.config.seed ^ _EDGE_SALT, lo, hi) < p
            lo, hi = lo[keep], hi[keep]
            ans = oracle.query_many(lo, hi)
            edges.extend(zip(lo.tolist(), hi.tolist(), ans.tolist()))
    return QueryGraph(n, edges, queries=oracle.query_count - before, p=p)
