"""Signed directed graphs, SNAP edge-list ingestion and balanced edge samples."""

from __future__ import annotations

import gzip
import io
import json
import os
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np


class ParseError(ValueError):
    """Raised for a malformed line in an edge-list file."""

    def __init__(self, lineno: int, line: str, reason: str):
        super().__init__(f"line {lineno}: {reason}: {line.strip()!r}")
        self.lineno = lineno


class SignedGraph:
    """Directed signed graph with an undirected adjacency view.

    Edges are ``(source, target, sign)`` with ``sign`` in {-1, +1}. The
    constructor is strict: self-loops, repeated ordered pairs and out-of-range
    node ids raise. Use :func:`load_snap_edgelist` or :func:`clean_edges` to
    go from raw records to a valid edge list.

    ``und[u]`` maps each undirected neighbor of ``u`` to a sign. When both
    ``(u, v)`` and ``(v, u)`` exist with different signs, the sign of the edge
    that came first in ``edges`` wins and the pair is counted in
    ``reciprocal_conflicts``.
    """

    def __init__(self, node_count: int, edges: Iterable[tuple[int, int, int]],
                 node_ids: Sequence | None = None):
        self.node_count = int(node_count)
        self.edges: list[tuple[int, int, int]] = []
        self.out_adj: list[dict[int, int]] = [dict() for _ in range(self.node_count)]
        self.in_adj: list[dict[int, int]] = [dict() for _ in range(self.node_count)]
        self.und: list[dict[int, int]] = [dict() for _ in range(self.node_count)]
        self.reciprocal_conflicts = 0
        for u, v, s in edges:
            u, v, s = int(u), int(v), int(s)
            if u == v:
                raise ValueError(f"self-loop on node {u}")
            if not (0 <= u < self.node_count and 0 <= v < self.node_count):
                raise ValueError(f"edge ({u}, {v}) out of range for {self.node_count} nodes")
            if s not in (-1, 1):
                raise ValueError(f"edge ({u}, {v}) has sign {s}")
            if v in self.out_adj[u]:
                raise ValueError(f"duplicate edge ({u}, {v})")
            self.edges.append((u, v, s))
            self.out_adj[u][v] = s
            self.in_adj[v][u] = s
            if v in self.und[u]:
                if self.und[u][v] != s:
                    self.reciprocal_conflicts += 1
            else:
                self.und[u][v] = s
                self.und[v][u] = s
        if node_ids is None:
            node_ids = range(self.node_count)
        self.node_ids = list(node_ids)
        if len(self.node_ids) != self.node_count:
            raise ValueError("node_ids length does not match node_count")

    def __len__(self):
        return len(self.edges)

    def __repr__(self):
        return f"SignedGraph(nodes={self.node_count}, edges={len(self.edges)})"

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def sign(self, u: int, v: int) -> int:
        """Sign of the directed edge ``u -> v``; KeyError if absent."""
        return self.out_adj[u][v]

    def has_edge(self, u: int, v: int) -> bool:
        return v in self.out_adj[u]

    def sign_counts(self) -> tuple[int, int]:
        pos = sum(1 for _, _, s in self.edges if s > 0)
        return pos, len(self.edges) - pos

    def edge_array(self) -> np.ndarray:
        """Edges as an ``(m, 3)`` int64 array."""
        if not self.edges:
            return np.zeros((0, 3), dtype=np.int64)
        return np.asarray(self.edges, dtype=np.int64)

    def neighbors(self, u: int) -> list[int]:
        """Sorted undirected neighbors of ``u``."""
        return sorted(self.und[u])

    def original_edges(self) -> set[tuple]:
        """Edge set expressed in the original (pre-remap) node ids."""
        ids = self.node_ids
        return {(ids[u], ids[v], s) for u, v, s in self.edges}


@dataclass
class IngestReport:
    nodes: int
    edges: int
    records: int
    self_loops_dropped: int = 0
    duplicates_dropped: int = 0
    sign_conflicts: int = 0
    reciprocal_conflicts: int = 0

    def to_dict(self) -> dict:
        return dict(self.__dict__)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def clean_edges(records: Iterable[tuple[int, int, int]]):
    """Drop self-loops and repeated ordered pairs (first occurrence wins).

    Returns ``(edges, self_loops, duplicates, conflicts)`` where ``conflicts``
    counts dropped duplicates whose sign differed from the kept one.
    """
    seen: dict[tuple[int, int], int] = {}
    edges = []
    loops = dups = conflicts = 0
    for u, v, s in records:
        if u == v:
            loops += 1
            continue
        key = (u, v)
        if key in seen:
            dups += 1
            if seen[key] != s:
                conflicts += 1
            continue
        seen[key] = s
        edges.append((u, v, s))
    return edges, loops, dups, conflicts


def _open_text(path):
    path = os.fspath(path)
    if path.endswith(".gz"):
        return io.TextIOWrapper(gzip.open(path, "rb"), encoding="utf-8", errors="replace")
    return open(path, encoding="utf-8", errors="replace")


_SIGNS = {"1": 1, "+1": 1, "-1": -1}


def _parse_snap_lines(lines) -> list[tuple]:
    records = []
    for lineno, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        parts = stripped.split()
        if len(parts) < 3:
            raise ParseError(lineno, line, "expected 'src dst sign'")
        src, dst, tok = parts[0], parts[1], parts[2]
        if tok not in _SIGNS:
            raise ParseError(lineno, line, f"sign {tok!r} not in {{-1, +1}}")
        try:
            src_id, dst_id = int(src), int(dst)
        except ValueError:
            raise ParseError(lineno, line, "node ids must be integers") from None
        records.append((src_id, dst_id, _SIGNS[tok]))
    return records


def _parse_wiki_elec(lines) -> list[tuple]:
    # SNAP wikiElec format: a 'U' line names the candidate, each 'V' line is a
    # vote "V <vote> <voter> <time> <name>". Neutral (0) votes carry no sign.
    records = []
    candidate = None
    for lineno, line in enumerate(lines, start=1):
        parts = line.split()
        if not parts or parts[0].startswith("#"):
            continue
        tag = parts[0]
        if tag == "V" and candidate is None:
            raise ParseError(lineno, line, "vote before any candidate")
        try:
            if tag == "U":
                candidate = int(parts[1])
            elif tag == "V":
                vote = int(parts[1])
                if vote != 0:
                    records.append((int(parts[2]), candidate, 1 if vote > 0 else -1))
        except (IndexError, ValueError):
            raise ParseError(lineno, line, "malformed wikiElec record") from None
    return records


def build_graph(records: Sequence[tuple]) -> tuple[SignedGraph, IngestReport]:
    """Remap raw ids to ``0..n-1`` (sorted by original id) and clean edges."""
    ids = sorted({r[0] for r in records} | {r[1] for r in records})
    index = {x: i for i, x in enumerate(ids)}
    remapped = [(index[u], index[v], s) for u, v, s in records]
    edges, loops, dups, conflicts = clean_edges(remapped)
    graph = SignedGraph(len(ids), edges, node_ids=ids)
    report = IngestReport(
        nodes=graph.node_count, edges=graph.edge_count, records=len(records),
        self_loops_dropped=loops, duplicates_dropped=dups,
        sign_conflicts=conflicts, reciprocal_conflicts=graph.reciprocal_conflicts,
    )
    return graph, report


def read_records(path) -> list[tuple]:
    """Raw ``(src, dst, sign)`` records from a SNAP signed edge list.

    Also accepts the SNAP wikiElec vote dump (detected from its ``E``/``U``/``V``
    line tags). ``.gz`` files are decompressed transparently.
    """
    with _open_text(path) as fh:
        lines = fh.readlines()
    for line in lines:
        head = line.lstrip()
        if head and not head.startswith("#"):
            if head[0] in "ETUNV":
                return _parse_wiki_elec(lines)
            break
    return _parse_snap_lines(lines)


def load_snap_edgelist(path) -> tuple[SignedGraph, IngestReport]:
    return build_graph(read_records(path))


def write_snap_edgelist(graph: SignedGraph, path) -> None:
    """Write edges with their original node ids, tab separated."""
    ids = graph.node_ids
    with open(path, "w") as fh:
        fh.write(f"# Nodes: {graph.node_count} Edges: {graph.edge_count}\n")
        fh.write("# FromNodeId\tToNodeId\tSign\n")
        for u, v, s in graph.edges:
            fh.write(f"{ids[u]}\t{ids[v]}\t{s}\n")


# --- clusterings -----------------------------------------------------------

def clustering_agreement(found, truth) -> float:
    """Fraction of nodes labelled consistently, maximised over the label swap.

    Labels may be 0/1 assignments or +-1 colorings; positive values are one
    side and the rest the other, so both encodings mix freely.
    """
    a = np.asarray(found)
    b = np.asarray(truth)
    if a.shape != b.shape:
        raise ValueError(f"size mismatch: {a.shape} vs {b.shape}")
    if a.size == 0:
        return 1.0
    same = float(np.mean((a > 0) == (b > 0)))
    return max(same, 1.0 - same)


def sigma_to_sets(sigma) -> tuple[set[int], set[int]]:
    """Red set ``{v: sigma(v) = -1}`` and blue set ``{v: sigma(v) = +1}``."""
    sigma = np.asarray(sigma)
    if not np.isin(sigma, (-1, 1)).all():
        raise ValueError("sigma must take values in {-1, +1}")
    red = set(np.flatnonzero(sigma < 0).tolist())
    blue = set(np.flatnonzero(sigma > 0).tolist())
    return red, blue


def random_truth(n: int, seed=None, red_fraction: float = 0.5) -> np.ndarray:
    """A +-1 coloring of ``n`` nodes with about ``red_fraction`` of them red."""
    rng = np.random.default_rng(seed)
    sigma = np.ones(n, dtype=np.int8)
    red = rng.permutation(n)[: int(round(red_fraction * n))]
    sigma[red] = -1
    return sigma


# --- balanced samples ------------------------------------------------------

@dataclass
class BalancedSample:
    edges: np.ndarray  # (m, 3) rows of (u, v, sign)
    seed: object = None
    source_positive: int = 0
    source_negative: int = 0

    def __len__(self):
        return len(self.edges)

    @property
    def labels(self) -> np.ndarray:
        return self.edges[:, 2]

    def sign_counts(self) -> tuple[int, int]:
        pos = int(np.sum(self.edges[:, 2] > 0))
        return pos, len(self.edges) - pos


def make_balanced_sample(graph_or_edges, seed=None) -> BalancedSample:
    """Keep every minority-sign edge and subsample the majority sign to match.

    Accepts a :class:`SignedGraph` or an ``(m, 3)`` edge array. The kept
    majority edges are returned in their original order after the minority
    edges' positions are merged back, so the sample preserves input order.
    """
    if isinstance(graph_or_edges, SignedGraph):
        edges = graph_or_edges.edge_array()
    else:
        edges = np.asarray(graph_or_edges, dtype=np.int64).reshape(-1, 3)
    pos = np.flatnonzero(edges[:, 2] > 0)
    neg = np.flatnonzero(edges[:, 2] < 0)
    if len(pos) == 0 or len(neg) == 0:
        raise ValueError(f"need both signs, got {len(pos)} positive and {len(neg)} negative")
    rng = np.random.default_rng(seed)
    k = min(len(pos), len(neg))
    if len(pos) > k:
        pos = np.sort(rng.choice(pos, size=k, replace=False))
    elif len(neg) > k:
        neg = np.sort(rng.choice(neg, size=k, replace=False))
    keep = np.sort(np.concatenate([pos, neg]))
    return BalancedSample(edges[keep], seed=seed, source_positive=int(np.sum(edges[:, 2] > 0)),
                          source_negative=int(np.sum(edges[:, 2] < 0)))


# --- synthetic networks ----------------------------------------------------

def random_signed_digraph(n: int, p: float, seed=None, positive_rate: float = 0.5) -> SignedGraph:
    """Directed G(n, p) with independent uniform signs (P[+] = positive_rate)."""
    rng = np.random.default_rng(seed)
    mask = rng.random((n, n)) < p
    np.fill_diagonal(mask, False)
    src, dst = np.nonzero(mask)
    signs = np.where(rng.random(len(src)) < positive_rate, 1, -1)
    return SignedGraph(n, zip(src.tolist(), dst.tolist(), signs.tolist()))


def planted_signed_network(n: int, avg_degree: float, seed=None, noise: float = 0.15,
                           red_fraction: float = 0.3, power: float = 2.2,
                           reciprocity: float = 0.1) -> tuple[SignedGraph, np.ndarray]:
    """Heavy-tailed directed network whose signs follow a hidden two-faction split.

    Endpoints are drawn with Chung-Lu style weights ``w_i ~ i^(-1/(power-1))``;
    an edge is positive iff its endpoints share a faction, flipped with
    probability ``noise``. A ``reciprocity`` fraction of edges get a reverse
    edge with its own independently-noised sign. Returns ``(graph, sigma)``.
    """
    rng = np.random.default_rng(seed)
    sigma = random_truth(n, rng, red_fraction)
    weights = (np.arange(1, n + 1, dtype=float)) ** (-1.0 / (power - 1.0))
    weights = rng.permutation(weights)
    prob = weights / weights.sum()
    target_edges = int(avg_degree * n)
    records: list[tuple[int, int, int]] = []
    seen: set[tuple[int, int]] = set()
    while len(records) < target_edges:
        batch = target_edges - len(records)
        src = rng.choice(n, size=batch * 2, p=prob)
        dst = rng.choice(n, size=batch * 2, p=prob)
        flips = rng.random(batch * 2) < noise
        recip = rng.random(batch * 2) < reciprocity
        rflips = rng.random(batch * 2) < noise
        for i in range(batch * 2):
            u, v = int(src[i]), int(dst[i])
            if u == v or (u, v) in seen:
                continue
            s = int(sigma[u] * sigma[v]) * (-1 if flips[i] else 1)
            seen.add((u, v))
            records.append((u, v, s))
            if recip[i] and (v, u) not in seen:
                seen.add((v, u))
                records.append((v, u, int(sigma[u] * sigma[v]) * (-1 if rflips[i] else 1)))
            if len(records) >= target_edges:
                break
    return SignedGraph(n, records), sigma
