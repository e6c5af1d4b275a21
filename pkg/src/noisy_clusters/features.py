"""Per-edge features for sign prediction.

Columns, in order (``FEATURE_NAMES``):

====  ==================================================================
0-5   d_out_pos(u), d_out_neg(u), d_in_pos(v), d_in_neg(v), d_out(u), d_in(v)
6     embeddedness: number of common undirected neighbors of u and v
7-22  triad counts, types 1..16 (see ``triad_type``)
23-26 edge-disjoint paths of length 3 with positive / negative sign
      product, then the same for length 4
====  ==================================================================

The target edge ``u -> v`` is left out of every count; its reverse ``v -> u``
is kept when present.
"""

from __future__ import annotations

import csv
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .graph import SignedGraph

FEATURE_NAMES = (
    ["d_out_pos", "d_out_neg", "d_in_pos", "d_in_neg", "d_out", "d_in", "embeddedness"]
    + [f"triad_{i}" for i in range(1, 17)]
    + ["p3_pos", "p3_neg", "p4_pos", "p4_neg"]
)
N_FEATURES = len(FEATURE_NAMES)  # 27


def triad_type(x_in: bool, x_sign: int, y_in: bool, y_sign: int) -> int:
    """Triad type (1..16) for a common neighbor ``w`` of the edge ``x -> y``.

    ``x_in`` is True for ``w -> x`` (False for ``x -> w``); ``y_in`` is True
    for ``y -> w`` (False for ``w -> y``). Types 1-4 are ``x -> w -> y``,
    5-8 ``x <- w -> y``, 9-12 ``x -> w <- y`` and 13-16 ``x <- w <- y``; inside
    each block the signs run ``++, +-, -+, --`` (x side first).
    """
    return 1 + 8 * y_in + 4 * x_in + 2 * (x_sign < 0) + (y_sign < 0)


@dataclass
class FeatureVector:
    d_out_pos: int = 0
    d_out_neg: int = 0
    d_in_pos: int = 0
    d_in_neg: int = 0
    d_out: int = 0
    d_in: int = 0
    embeddedness: int = 0
    triads: tuple = (0,) * 16
    p3_pos: int = 0
    p3_neg: int = 0
    p4_pos: int = 0
    p4_neg: int = 0

    def as_array(self) -> np.ndarray:
        return np.array([self.d_out_pos, self.d_out_neg, self.d_in_pos, self.d_in_neg,
                         self.d_out, self.d_in, self.embeddedness, *self.triads,
                         self.p3_pos, self.p3_neg, self.p4_pos, self.p4_neg], dtype=np.int64)

    def triad(self, t: int) -> int:
        """Count for triad type ``t`` in 1..16."""
        return self.triads[t - 1]


def degree_features(graph: SignedGraph, u: int, v: int) -> tuple[int, ...]:
    """Signed degrees of ``u`` (out) and ``v`` (in) without the edge ``u -> v``, plus embeddedness."""
    out_u = graph.out_adj[u]
    in_v = graph.in_adj[v]
    out_pos = sum(1 for s in out_u.values() if s > 0)
    out_neg = len(out_u) - out_pos
    in_pos = sum(1 for s in in_v.values() if s > 0)
    in_neg = len(in_v) - in_pos
    target = out_u.get(v)
    if target is not None:
        if target > 0:
            out_pos -= 1
            in_pos -= 1
        else:
            out_neg -= 1
            in_neg -= 1
    return (out_pos, out_neg, in_pos, in_neg, out_pos + out_neg, in_pos + in_neg,
            embeddedness(graph, u, v))


def embeddedness(graph: SignedGraph, u: int, v: int) -> int:
    return len(graph.und[u].keys() & graph.und[v].keys())


def triad_counts(graph: SignedGraph, u: int, v: int) -> list[int]:
    """16 triad counts over common neighbors of ``u`` and ``v``.

    Every directed signed configuration counts, so a neighbor joined to an
    endpoint by edges in both directions contributes to several types.
    """
    counts = [0] * 16
    out_u, in_u = graph.out_adj[u], graph.in_adj[u]
    out_v, in_v = graph.out_adj[v], graph.in_adj[v]
    for w in graph.und[u].keys() & graph.und[v].keys():
        x_side = []
        if w in out_u:
            x_side.append((False, out_u[w]))
        if w in in_u:
            x_side.append((True, in_u[w]))
        y_side = []
        if w in in_v:
            y_side.append((False, in_v[w]))
        if w in out_v:
            y_side.append((True, out_v[w]))
        for x_in, xs in x_side:
            for y_in, ys in y_side:
                counts[triad_type(x_in, xs, y_in, ys) - 1] += 1
    return counts


@dataclass
class PathCollection:
    s: int
    t: int
    length: int
    paths: list[tuple[int, ...]] = field(default_factory=list)
    products: list[int] = field(default_factory=list)

    @property
    def positive(self) -> int:
        return sum(1 for p in self.products if p > 0)

    @property
    def negative(self) -> int:
        return sum(1 for p in self.products if p < 0)

    def __len__(self):
        return len(self.paths)


class _Sorted:
    """Per-graph cache of ascending neighbor lists."""

    def __init__(self, graph):
        self.nbrs = [sorted(d) for d in graph.und]


def _sorted_neighbors(graph: SignedGraph):
    cache = getattr(graph, "_feature_nbrs", None)
    if cache is None:
        cache = _Sorted(graph).nbrs
        graph._feature_nbrs = cache
    return cache


def greedy_disjoint_paths(graph: SignedGraph, s: int, t: int, length: int) -> PathCollection:
    """Greedy edge-disjoint simple ``s``-``t`` paths with exactly ``length`` edges.

    Edge directions are ignored. Candidate paths are scanned in lexicographic
    order of their node sequence (what a breadth-first search expanding
    neighbors in ascending id order discovers); a path is kept when none of
    its edges belongs to an earlier kept path. Rescanning from scratch after
    each pick would find the same paths, since kept edges are never freed.
    The edge ``{s, t}`` is never usable: a simple path through it has length 1.
    """
    if s == t:
        raise ValueError("s and t must differ")
    if length < 2:
        raise ValueError("length must be at least 2")
    und = graph.und
    nbrs = _sorted_neighbors(graph)
    used: set[tuple[int, int]] = set()
    out = PathCollection(s, t, length)
    t_free = len(und[t]) - (s in und[t])
    s_free = len(und[s]) - (t in und[s])
    if t_free == 0 or s_free == 0:
        return out
    nbrs_t = nbrs[t]
    und_t = und[t]
    path = [s]
    on_path = {s, t}

    def key(a, b):
        return (a, b) if a < b else (b, a)

    def last_hops(node):
        # candidates c with node - c - t, in ascending order
        if len(nbrs_t) < len(nbrs[node]):
            row = und[node]
            return [c for c in nbrs_t if c in row]
        return [c for c in nbrs[node] if c in und_t]

    def accept(final):
        nonlocal t_free
        full = path + final
        sign = 1
        for i in range(len(full) - 1):
            used.add(key(full[i], full[i + 1]))
            sign *= und[full[i]][full[i + 1]]
        out.paths.append(tuple(full))
        out.products.append(sign)
        t_free -= 1

    def extend(node, depth):
        # path[-1] == node, ``depth`` edges so far
        if depth == length - 2:
            for c in last_hops(node):
                if c in on_path or key(node, c) in used or key(c, t) in used:
                    continue
                accept([c, t])
                return True
            return False
        for w in nbrs[node]:
            if w in on_path or key(node, w) in used:
                continue
            path.append(w)
            on_path.add(w)
            found = extend(w, depth + 1)
            path.pop()
            on_path.discard(w)
            if found:
                return True  # the prefix edges are now used
        return False

    if length == 2:
        for c in last_hops(s):
            if c not in on_path:
                accept([c, t])
        return out
    for a in nbrs[s]:
        if a == t:
            continue
        path.append(a)
        on_path.add(a)
        extend(a, 1)
        path.pop()
        on_path.discard(a)
        if t_free == 0:
            break
    return out


def feature_vector(graph: SignedGraph, u: int, v: int) -> FeatureVector:
    deg = degree_features(graph, u, v)
    p3 = greedy_disjoint_paths(graph, u, v, 3)
    p4 = greedy_disjoint_paths(graph, u, v, 4)
    return FeatureVector(*deg, triads=tuple(triad_counts(graph, u, v)),
                         p3_pos=p3.positive, p3_neg=p3.negative,
                         p4_pos=p4.positive, p4_neg=p4.negative)


def edge_embeddedness(graph: SignedGraph, edges=None) -> np.ndarray:
    """Embeddedness of every edge (graph order unless ``edges`` is given)."""
    edges = graph.edges if edges is None else edges
    und = graph.und
    return np.fromiter((len(und[int(u)].keys() & und[int(v)].keys()) for u, v, *_ in edges),
                       dtype=np.int64, count=len(edges))


def zero_embeddedness_fraction(graph: SignedGraph) -> float:
    emb = edge_embeddedness(graph)
    return float(np.mean(emb == 0)) if len(emb) else 0.0


_WORKER_GRAPH: SignedGraph | None = None


def _init_worker(graph):
    global _WORKER_GRAPH
    _WORKER_GRAPH = graph


def _rows(pairs):
    return [feature_vector(_WORKER_GRAPH, u, v).as_array() for u, v in pairs]


def default_jobs() -> int:
    try:
        return max(1, int(os.environ.get("NOISY_CLUSTERS_JOBS", "1")))
    except ValueError:
        return 1


def feature_matrix(graph: SignedGraph, edges=None, jobs: int | None = None,
                   progress: bool = False, chunk: int = 2000) -> np.ndarray:
    """``(m, 27)`` int64 feature matrix for ``edges`` (default: all graph edges)."""
    edges = graph.edges if edges is None else edges
    pairs = [(int(e[0]), int(e[1])) for e in edges]
    jobs = default_jobs() if jobs is None else max(1, int(jobs))
    out = np.zeros((len(pairs), N_FEATURES), dtype=np.int64)
    batches = [pairs[i:i + chunk] for i in range(0, len(pairs), chunk)]
    done = 0
    if jobs == 1 or len(batches) <= 1:
        _sorted_neighbors(graph)
        results = ([feature_vector(graph, u, v).as_array() for u, v in b] for b in batches)
        pool = None
    else:
        pool = ProcessPoolExecutor(jobs, initializer=_init_worker, initargs=(graph,))
        results = pool.map(_rows, batches)
    try:
        for rows in results:
            if rows:
                out[done:done + len(rows)] = rows
            done += len(rows)
            if progress:
                print(f"features: {done}/{len(pairs)} edges", file=sys.stderr)
    finally:
        if pool is not None:
            pool.shutdown()
    return out


def write_feature_csv(graph: SignedGraph, matrix: np.ndarray, edges, fh) -> None:
    """Rows ``u,v,label,f1..f27`` with node ids in the graph's original numbering."""
    ids = graph.node_ids
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["u", "v", "label"] + [f"f{i}" for i in range(1, N_FEATURES + 1)])
    for (u, v, s), row in zip(edges, matrix):
        w.writerow([ids[int(u)], ids[int(v)], int(s)] + row.tolist())
