"""Non-adaptive recovery through edge-disjoint paths in a random query graph.

All queries are made up front on a ``G(n, p)`` graph. To estimate
``sigma(x) sigma(y)`` we grow two node-disjoint BFS trees ``T_x`` and ``T_y``
of depth ``k`` and branching ``b`` whose leaves are matched by index, link
every matched leaf pair ``(x_i, y_i)`` with a path through two further
node-disjoint "deep" trees of depth ``gamma`` and one crossing edge, and then
fold the path sign products back up the trees with majority votes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .graph import SignedGraph, clustering_agreement
from .oracle import NoisyOracle, QueryGraph, sample_query_graph


def majority(votes) -> int:
    """Sign of the sum of +-1 votes; a tie gives +1."""
    votes = list(votes)
    if not votes:
        raise ValueError("majority of an empty sequence")
    return 1 if sum(votes) >= 0 else -1


def _odd(b: int) -> int:
    return b if b % 2 else b + 1


@dataclass
class PathConfig:
    """Sizes for gadget construction.

    ``from_formula`` fills every field from the theory constants; any field
    can be overridden. ``flagged`` marks configs outside the theory regime
    (overrides present, ``epsilon * L < 1``, or a gadget too large for ``n``).
    """

    n: int
    delta: float
    p: float
    branching: int
    tree_depth: int
    deep_depth: int
    deep_branching: int
    epsilon: float = float("nan")
    avg_degree: float = float("nan")
    diameter: float = float("nan")
    flagged: bool = False
    notes: list[str] = field(default_factory=list)

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"edge probability must lie in [0, 1], got {self.p}")
        if self.branching < 1 or self.deep_branching < 1:
            raise ValueError("branching factors must be positive")
        if self.tree_depth < 0 or self.deep_depth < 0:
            raise ValueError("depths must be non-negative")

    @staticmethod
    def theory_values(n: int, delta: float) -> dict:
        ln = math.log(n)
        eps = 1.0 / math.sqrt(math.log(ln))
        avg = max(12 * ln / delta ** 4, (1 / delta) ** (4 + (2 + 2 * eps) / eps))
        diam = ln / math.log(avg) if avg > 1 else float("inf")
        return {
            "epsilon": eps,
            "avg_degree": avg,
            "diameter": diam,
            "branching": _odd(math.ceil(4 * ln / delta ** 4)),
            "tree_depth": max(1, round(eps * diam)),
            "deep_depth": max(1, round((0.5 + eps) * diam)),
        }

    @classmethod
    def from_formula(cls, n: int, delta: float, **overrides) -> "PathConfig":
        if n < 3:
            raise ValueError("need n >= 3")
        if not 0 < delta <= 1:
            raise ValueError(f"bias must lie in (0, 1], got {delta}")
        t = cls.theory_values(n, delta)
        notes = []
        p = t["avg_degree"] / n
        if p > 1:
            notes.append("average degree exceeds n; p clipped to 1")
            p = 1.0
        values = dict(p=p, branching=t["branching"], tree_depth=t["tree_depth"],
                      deep_depth=t["deep_depth"], deep_branching=t["branching"])
        for key, val in overrides.items():
            if val is None:
                continue
            if key not in values:
                raise TypeError(f"unknown override {key!r}")
            if key == "branching":
                val = _odd(int(val))
            if val != values[key]:
                notes.append(f"{key} overridden: {values[key]} -> {val}")
                values[key] = val
        if t["epsilon"] * t["diameter"] < 1:
            notes.append("epsilon * L < 1: tree depth clamped to 1")
        cfg = cls(n=n, delta=delta, epsilon=t["epsilon"], avg_degree=t["avg_degree"],
                  diameter=t["diameter"], notes=notes, **values)
        if cfg.gadget_size() > n:
            cfg.notes.append(f"gadget needs {cfg.gadget_size()} nodes, n = {n}")
        if cfg.branching > cfg.p * n:
            cfg.notes.append("branching exceeds expected degree")
        cfg.flagged = bool(cfg.notes)
        return cfg

    @classmethod
    def desk_scale(cls, n: int, delta: float, p: float = 0.9, tree_depth: int = 1,
                   deep_depth: int = 1, deep_branching: int = 2,
                   budget: float = 0.85) -> "PathConfig":
        """Largest odd branching whose gadget fits in ``budget * n`` nodes.

        The theory constants need astronomically large ``n``; this keeps the
        gadget's shape and spends the node budget on the branching factor.
        """
        b = 1
        while True:
            trial = cls(n=n, delta=delta, p=p, branching=b + 2, tree_depth=tree_depth,
                        deep_depth=deep_depth, deep_branching=deep_branching)
            if trial.gadget_size() > budget * n:
                break
            b += 2
        return cls.from_formula(n, delta, p=p, branching=b, tree_depth=tree_depth,
                                deep_depth=deep_depth, deep_branching=deep_branching)

    @property
    def leaf_pairs(self) -> int:
        return self.branching ** self.tree_depth

    def gadget_size(self) -> int:
        """Nodes used by a complete gadget (both sides)."""
        tree = sum(self.branching ** i for i in range(self.tree_depth + 1))
        deep = sum(self.deep_branching ** i for i in range(1, self.deep_depth + 1))
        return 2 * (tree + self.leaf_pairs * deep)

    @property
    def max_path_length(self) -> float:
        return (1 + 2 * self.epsilon) * self.diameter


@dataclass
class GadgetFailure:
    """Construction halted: a tree could not branch or no crossing edge exists."""

    step: str
    detail: str = ""

    def __bool__(self):
        return False


@dataclass
class PathGadget:
    x: int
    y: int
    tree_x: list[list[int]]  # level lists; children of level[l][j] are level[l+1][j*b:(j+1)*b]
    tree_y: list[list[int]]
    branching: int
    paths: list[list[list[int]]]  # per leaf pair, node sequences from x_i to y_i
    deep_edges: list[tuple[int, int]] = field(default_factory=list)
    degenerate: bool = False

    @property
    def depth(self) -> int:
        return len(self.tree_x) - 1

    @property
    def leaf_pairs(self) -> list[tuple[int, int]]:
        return list(zip(self.tree_x[-1], self.tree_y[-1]))

    def tree_edges(self) -> list[tuple[int, int]]:
        out = []
        b = self.branching
        for levels in (self.tree_x, self.tree_y):
            for depth in range(len(levels) - 1):
                for j, child in enumerate(levels[depth + 1]):
                    out.append((levels[depth][j // b], child))
        return out

    def path_edges(self) -> list[tuple[int, int]]:
        return [(p[i], p[i + 1]) for group in self.paths for p in group for i in range(len(p) - 1)]

    def edges(self) -> list[tuple[int, int]]:
        return self.tree_edges() + self.path_edges()


def _fresh_children(node, count, nbrs, used, out):
    """Append up to ``count`` unused neighbors of ``node`` (ascending ids)."""
    got = 0
    for w in nbrs[node]:
        if w not in used:
            used.add(w)
            out.append(w)
            got += 1
            if got == count:
                break
    return got


def _grow(root, depth, branching, nbrs, used, exact=True):
    """BFS levels from ``root``; None if some node cannot get ``branching`` children."""
    levels = [[root]]
    for _ in range(depth):
        nxt: list[int] = []
        for node in levels[-1]:
            got = _fresh_children(node, branching, nbrs, used, nxt)
            if exact and got < branching:
                return None
        levels.append(nxt)
    return levels


def _grow_with_parents(root, depth, branching, nbrs, used, exact=True):
    parent = {root: None}
    frontier = [root]
    for _ in range(depth):
        nxt: list[int] = []
        for node in frontier:
            start = len(nxt)
            got = _fresh_children(node, branching, nbrs, used, nxt)
            if exact and got < branching:
                return None, None
            for w in nxt[start:]:
                parent[w] = node
        frontier = nxt
    return frontier, parent


def _chain(node, parent):
    out = []
    while node is not None:
        out.append(node)
        node = parent[node]
    return out  # node ... root


class _Adjacency:
    """Sorted neighbor lists plus constant-time edge lookup."""

    def __init__(self, graph: SignedGraph):
        self.graph = graph
        self.nbrs = [sorted(d) for d in graph.und]
        self.und = graph.und


def _adjacency(qgraph) -> _Adjacency:
    if isinstance(qgraph, _Adjacency):
        return qgraph
    cached = getattr(qgraph, "_sorted_adjacency", None)
    if cached is None:
        cached = _Adjacency(qgraph)
        qgraph._sorted_adjacency = cached
    return cached


def build_gadget(qgraph: SignedGraph, x: int, y: int, config: PathConfig):
    """Tree pair plus matched edge-disjoint paths for ``(x, y)``, or a failure.

    With ``tree_depth == 0`` the gadget degenerates: depth-``deep_depth``
    trees are grown from ``x`` and ``y`` directly (short growth is allowed)
    and every query edge between them yields one ``x -> y`` path.
    """
    if x == y:
        raise ValueError("x and y must differ")
    adj = _adjacency(qgraph)
    nbrs, und = adj.nbrs, adj.und
    b, k = config.branching, config.tree_depth
    gamma, d = config.deep_depth, config.deep_branching

    if k == 0:
        return _build_degenerate(adj, x, y, gamma, d)

    used = {x, y}
    tree_x = _grow(x, k, b, nbrs, used)
    if tree_x is None:
        return GadgetFailure("tree_x", f"node in T_{x} has fewer than {b} fresh neighbors")
    tree_y = _grow(y, k, b, nbrs, used)
    if tree_y is None:
        return GadgetFailure("tree_y", f"node in T_{y} has fewer than {b} fresh neighbors")

    deep = []
    for xi, yi in zip(tree_x[-1], tree_y[-1]):
        lx, px = _grow_with_parents(xi, gamma, d, nbrs, used)
        if lx is None:
            return GadgetFailure("deep_tree", f"deep tree at leaf {xi} cannot branch")
        ly, py = _grow_with_parents(yi, gamma, d, nbrs, used)
        if ly is None:
            return GadgetFailure("deep_tree", f"deep tree at leaf {yi} cannot branch")
        deep.append((lx, px, ly, py))

    paths = []
    deep_edges = []
    for (xi, yi), (lx, px, ly, py) in zip(zip(tree_x[-1], tree_y[-1]), deep):
        cross = _first_crossing(lx, ly, und)
        if cross is None:
            return GadgetFailure("crossing", f"no query edge between deep leaves of {xi} and {yi}")
        a, c = cross
        left = _chain(a, px)[::-1]  # xi ... a
        right = _chain(c, py)  # c ... yi
        paths.append([left + right])
        deep_edges.extend((p, w) for w, p in px.items() if p is not None)
        deep_edges.extend((p, w) for w, p in py.items() if p is not None)
    return PathGadget(x, y, tree_x, tree_y, b, paths, deep_edges)


def _first_crossing(left, right, und):
    for a in left:
        row = und[a]
        for c in right:
            if c in row:
                return a, c
    return None


def _build_degenerate(adj, x, y, gamma, d):
    used = {x, y}
    _, px = _grow_with_parents(x, gamma, d, adj.nbrs, used, exact=False)
    _, py = _grow_with_parents(y, gamma, d, adj.nbrs, used, exact=False)
    paths = []
    right_nodes = sorted(py)
    for a in sorted(px):
        row = adj.und[a]
        for c in right_nodes:
            if c in row:
                paths.append(_chain(a, px)[::-1] + _chain(c, py))
    if not paths:
        return GadgetFailure("crossing", f"no query edge between the trees of {x} and {y}")
    deep_edges = [(p, w) for w, p in px.items() if p is not None]
    deep_edges += [(p, w) for w, p in py.items() if p is not None]
    return PathGadget(x, y, [[x]], [[y]], 1, [paths], deep_edges, degenerate=True)


def _lookup(answers) -> Callable[[int, int], int]:
    if isinstance(answers, SignedGraph):
        und = answers.und

        def get(u, v):
            return und[u][v]
    elif callable(answers):
        return answers
    else:
        def get(u, v):
            key = (u, v) if u < v else (v, u)
            return answers[key]
    return get


def path_sign(path, get) -> int:
    s = 1
    for i in range(len(path) - 1):
        s *= get(path[i], path[i + 1])
    return s


def estimate_pair(gadget: PathGadget, answers) -> int:
    """Estimate ``sigma(x) sigma(y)`` from the gadget's edge answers.

    ``answers`` is the query graph, a callable ``(u, v) -> sign`` or a mapping
    keyed by ``(min, max)`` pairs.
    """
    get = _lookup(answers)
    try:
        values = [majority(path_sign(p, get) for p in group) for group in gadget.paths]
        b = gadget.branching
        for depth in range(gadget.depth - 1, -1, -1):
            upper_x, lower_x = gadget.tree_x[depth], gadget.tree_x[depth + 1]
            upper_y, lower_y = gadget.tree_y[depth], gadget.tree_y[depth + 1]
            values = [
                majority(get(upper_x[j], lower_x[c]) * values[c] * get(lower_y[c], upper_y[j])
                         for c in range(j * b, (j + 1) * b))
                for j in range(len(upper_x))
            ]
    except KeyError as exc:
        raise ValueError(f"missing answer for edge {exc}") from None
    return values[0]


def check_gadget(gadget: PathGadget, qgraph: SignedGraph | None = None,
                 max_path_length: float | None = None) -> None:
    """Assert the structural guarantees of a gadget; raises AssertionError."""
    nodes_x = {v for level in gadget.tree_x for v in level}
    nodes_y = {v for level in gadget.tree_y for v in level}
    assert not nodes_x & nodes_y, "trees share a vertex"
    assert [len(l) for l in gadget.tree_x] == [len(l) for l in gadget.tree_y], "trees not isomorphic"
    b = gadget.branching
    for levels in (gadget.tree_x, gadget.tree_y):
        for depth in range(len(levels) - 1):
            assert len(levels[depth + 1]) == b * len(levels[depth]), "branching is not exact"
    assert len(gadget.paths) == b ** gadget.depth, "wrong number of leaf pairs"
    for (xi, yi), group in zip(gadget.leaf_pairs, gadget.paths):
        for p in group:
            assert p[0] == xi and p[-1] == yi, "path endpoints do not match leaf pair"
            assert len(set(p)) == len(p), "path is not simple"
            if max_path_length is not None:
                assert len(p) - 1 <= max_path_length, "path too long"
    keys = [(min(u, v), max(u, v)) for u, v in gadget.tree_edges()]
    if not gadget.degenerate:
        keys += [(min(u, v), max(u, v)) for u, v in gadget.path_edges()]
        assert len(keys) == len(set(keys)), "gadget edges are not disjoint"
    if qgraph is not None:
        for u, v in gadget.edges():
            assert v in qgraph.und[u], f"edge ({u}, {v}) not in the query graph"


def _path_sum(mat: np.ndarray, r: int, v: int) -> int:
    """``sum`` over simple ``r``-``v`` paths of length <= 3 of the product of ``mat`` entries."""
    w = mat[r].astype(np.int64)
    u = mat[:, v].astype(np.int64)
    direct = int(w[v])
    w[v] = 0  # middle nodes avoid both endpoints; the zero diagonal does the rest
    u[r] = 0
    return direct + int(w @ u) + int((w @ mat) @ u)


def fallback_estimate(qgraph: SignedGraph, r: int, v: int, dense: np.ndarray | None = None):
    """Majority over all simple query paths of length <= 3; None if there are none."""
    if dense is None:
        dense = signed_matrix(qgraph)
    if _path_sum(np.abs(dense), r, v) == 0:
        return None
    return 1 if _path_sum(dense, r, v) >= 0 else -1


def signed_matrix(graph: SignedGraph) -> np.ndarray:
    n = graph.node_count
    dense = np.zeros((n, n), dtype=np.int8)
    for u, nb in enumerate(graph.und):
        for w, s in nb.items():
            dense[u, w] = s
    return dense


@dataclass
class PathResult:
    assignment: np.ndarray
    queries: int
    gadget_failures: int
    unresolved: int
    flagged: bool
    failure_steps: dict = field(default_factory=dict)

    def report(self, truth=None) -> dict:
        out = {"queries": self.queries, "gadget_failures": self.gadget_failures,
               "unresolved": self.unresolved, "flagged": self.flagged,
               "failure_steps": dict(self.failure_steps)}
        if truth is not None:
            out["agreement"] = clustering_agreement(self.assignment, truth)
        return out


def recover_paths(oracle: NoisyOracle, n: int | None = None, config: PathConfig | None = None,
                  qgraph: QueryGraph | None = None, root: int = 0) -> PathResult:
    """Cluster ``0..n-1`` relative to ``root`` using one gadget per node.

    Nodes whose gadget cannot be built are decided by a majority over all
    query paths of length <= 3 to the root; with no such path they join the
    root's cluster (label 0).
    """
    n = oracle.n if n is None else int(n)
    if config is None:
        config = PathConfig.from_formula(n, oracle.delta)
    if qgraph is None:
        qgraph = sample_query_graph(oracle, n, config.p)
    adj = _adjacency(qgraph)
    assignment = np.zeros(n, dtype=np.int8)
    failures = unresolved = 0
    steps: dict[str, int] = {}
    dense = None
    for v in range(n):
        if v == root:
            continue
        gadget = build_gadget(adj.graph, root, v, config)
        if gadget:
            z = estimate_pair(gadget, adj.graph)
        else:
            failures += 1
            steps[gadget.step] = steps.get(gadget.step, 0) + 1
            if dense is None:
                dense = signed_matrix(qgraph)
            z = fallback_estimate(qgraph, root, v, dense)
            if z is None:
                unresolved += 1
                z = 1
        assignment[v] = 0 if z > 0 else 1
    return PathResult(assignment, qgraph.queries, failures, unresolved, config.flagged, steps)


# --- majority bias -----------------------------------------------------------

def exact_majority_bias(delta: float, m: int) -> float:
    """``E[maj]`` of ``m`` (odd) iid +-1 coins with mean ``delta``."""
    from scipy.stats import binom

    if m % 2 == 0:
        raise ValueError("count must be odd")
    return 2.0 * float(binom.sf(m // 2, m, (1 + delta) / 2)) - 1.0


def majority_bias_curve(delta: float, counts, trials: int, seed=None) -> list[tuple[int, float]]:
    """Empirical mean of the majority of ``m`` coins with mean ``delta``, per ``m``."""
    if not 0 < delta <= 1:
        raise ValueError(f"bias must lie in (0, 1], got {delta}")
    counts = [int(m) for m in counts]
    for m in counts:
        if m < 1 or m % 2 == 0:
            raise ValueError(f"counts must be odd positive integers, got {m}")
    rng = np.random.default_rng(seed)
    p = (1 + delta) / 2
    rows = []
    for m in counts:
        heads = rng.binomial(m, p, size=trials)
        rows.append((m, float(np.mean(np.where(2 * heads > m, 1.0, -1.0)))))
    return rows


def simulate_amplification(branching: int, child_bias: float, delta: float,
                           trials: int, seed=None) -> float:
    """Empirical bias of one majority level of the estimator.

    Each of ``branching`` children contributes ``eta * Z * eta'`` where the
    two edge noises have mean ``delta`` and the child estimate ``Z`` has mean
    ``child_bias``; the root takes their majority.
    """
    rng = np.random.default_rng(seed)
    shape = (trials, branching)

    def coins(mean):
        return np.where(rng.random(shape) < (1 + mean) / 2, 1, -1)

    terms = coins(delta) * coins(child_bias) * coins(delta)
    root = np.where(terms.sum(axis=1) >= 0, 1, -1)
    return float(root.mean())
