"""Two-cluster recovery from a seed set labelled by votes through a mediator set.

Pick disjoint node sets ``A`` and ``B`` and ask every ``A x B`` pair. Each
``b`` in ``B`` votes on whether ``a, a'`` in ``A`` share a cluster; the
majority gives a label for every pair inside ``A``. The largest component of
the positively labelled graph on ``A`` is a seed ``C`` from one cluster, and
every other node joins ``C`` iff most of its answers against ``C`` are +1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .graph import clustering_agreement
from .oracle import NoisyOracle


def formula_sizes(n: int, delta: float) -> tuple[int, int]:
    """``(ceil(48 ln n / delta^2), ceil(24 ln n / delta^4))``."""
    if not 0 < delta <= 1:
        raise ValueError(f"bias must lie in (0, 1], got {delta}")
    ln = math.log(n)
    return math.ceil(48 * ln / delta ** 2), math.ceil(24 * ln / delta ** 4)


@dataclass
class PythiaConfig:
    size_a: int
    size_b: int
    flagged: bool = False
    shuffle: bool = False
    shuffle_seed: int | None = None

    @classmethod
    def from_formula(cls, n: int, delta: float, fit: bool = True, **kw) -> "PythiaConfig":
        """Sizes from the theory constants.

        When ``size_a + size_b > n`` and ``fit`` is true both sizes are scaled
        down by the same factor so that ``A`` and ``B`` cover all ``n`` nodes;
        the config is then flagged as outside the theory constants.
        """
        a, b = formula_sizes(n, delta)
        if a + b <= n:
            return cls(a, b, **kw)
        if not fit:
            raise ValueError(f"formula sizes |A|={a}, |B|={b} exceed n={n}")
        a_fit = max(2, int(round(a * n / (a + b))))
        b_fit = max(1, n - a_fit)
        return cls(a_fit, b_fit, flagged=True, **kw)

    def validate(self, n: int) -> None:
        if self.size_a < 2 or self.size_b < 1:
            raise ValueError(f"need |A| >= 2 and |B| >= 1, got {self.size_a}, {self.size_b}")
        if self.size_a + self.size_b > n:
            raise ValueError(f"|A| + |B| = {self.size_a + self.size_b} exceeds n = {n}")


def vote_pair(oracle: NoisyOracle, u: int, v: int, mediators) -> int:
    """Majority over ``s`` of ``answer(u, s) * answer(v, s)``; ties give +1."""
    med = np.asarray(sorted(mediators) if isinstance(mediators, (set, frozenset)) else mediators,
                     dtype=np.int64).ravel()
    if med.size == 0:
        raise ValueError("mediator set is empty")
    if u == v:
        raise ValueError("u and v must differ")
    if np.any(med == u) or np.any(med == v):
        raise ValueError("u and v must not be mediators")
    au = oracle.query_many(np.full(med.size, u), med)
    av = oracle.query_many(np.full(med.size, v), med)
    agree = int(np.count_nonzero(au == av))
    return 1 if 2 * agree >= med.size else -1


def vote_matrix(answers: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Agreement counters and +-1 labels for all row pairs of an answer block.

    ``answers`` is the ``|A| x |B|`` matrix of oracle answers. Returns
    ``(counter, labels)`` where ``counter[i, j]`` counts mediators on which
    rows ``i`` and ``j`` agree and ``labels`` applies the ``>= |B|/2`` rule.
    The diagonal is set to +1.
    """
    m = answers.astype(np.int32)
    nb = m.shape[1]
    counter = (nb + m @ m.T) // 2
    labels = np.where(2 * counter >= nb, 1, -1).astype(np.int8)
    np.fill_diagonal(labels, 1)
    return counter, labels


def largest_positive_component(labels, nodes=None) -> np.ndarray:
    """Largest connected component of the graph of +1 labels.

    ``labels`` is a symmetric +-1 matrix over the nodes in ``nodes`` (default
    ``0..len-1``). Ties go to the component with the smallest node id.
    Returns the component's node ids, sorted.
    """
    labels = np.asarray(labels)
    k = labels.shape[0]
    nodes = np.arange(k) if nodes is None else np.asarray(nodes)
    adj = labels > 0
    np.fill_diagonal(adj, False)
    _, comp = connected_components(csr_matrix(adj), directed=False)
    sizes = np.bincount(comp)
    best = None
    for c in np.flatnonzero(sizes == sizes.max()):
        members = np.sort(nodes[comp == c])
        if best is None or members[0] < best[0]:
            best = members
    return best


@dataclass
class PythiaResult:
    assignment: np.ndarray  # 1 for the cluster grown from the seed, 0 otherwise
    queries: int
    seed_set: np.ndarray
    size_a: int
    size_b: int
    flagged: bool
    vote_labels: np.ndarray = field(repr=False, default=None)

    @property
    def size_c(self) -> int:
        return len(self.seed_set)

    @property
    def query_bound(self) -> int:
        n = len(self.assignment)
        return self.size_a * self.size_b + (n - self.size_c) * self.size_c

    def report(self, truth=None) -> dict:
        out = {"queries": self.queries, "size_a": self.size_a, "size_b": self.size_b,
               "size_c": self.size_c, "query_bound": self.query_bound, "flagged": self.flagged}
        if truth is not None:
            out["agreement"] = clustering_agreement(self.assignment, truth)
        return out


def recover_pythia(oracle: NoisyOracle, n: int | None = None,
                   config: PythiaConfig | None = None) -> PythiaResult:
    n = oracle.n if n is None else int(n)
    if config is None:
        config = PythiaConfig.from_formula(n, oracle.delta)
    config.validate(n)
    before = oracle.query_count

    order = np.arange(n)
    if config.shuffle:
        order = np.random.default_rng(config.shuffle_seed).permutation(n)
    a_nodes = order[:config.size_a]
    b_nodes = order[config.size_a:config.size_a + config.size_b]

    block = oracle.query_block(a_nodes, b_nodes)
    _, labels = vote_matrix(block)
    seed = largest_positive_component(labels, a_nodes)

    # the seed stays fixed during expansion, so each outsider costs |C| queries
    in_seed = np.zeros(n, dtype=bool)
    in_seed[seed] = True
    rest = np.flatnonzero(~in_seed)
    assignment = in_seed.astype(np.int8)
    if rest.size:
        answers = oracle.query_block(rest, seed)
        positive = np.count_nonzero(answers > 0, axis=1)
        assignment[rest[2 * positive > len(seed)]] = 1

    return PythiaResult(assignment, oracle.query_count - before, seed,
                        config.size_a, config.size_b, config.flagged, labels)
