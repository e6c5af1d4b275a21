"""L2-regularised logistic regression and stratified k-fold cross-validation.

The model is ``P(+ | x) = 1 / (1 + exp(-(b0 + sum_i b_i x_i)))`` fitted on
z-scored features by gradient descent with a backtracking line search.
"""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .features import FEATURE_NAMES, edge_embeddedness, feature_matrix
from .graph import SignedGraph, make_balanced_sample

SCHEMA_VERSION = 1

GROUPS = {
    "deg": tuple(range(0, 6)),
    "tr": (6,),
    "triads": tuple(range(7, 23)),
    "p3": (23, 24),
    "p4": (25, 26),
}
_ALIASES = {
    "all": ("deg", "tr", "triads", "p3", "p4"),
    "classic": ("deg", "tr", "triads"),
    "leskovec": ("deg", "tr", "triads"),
    "leskovec-et-al": ("deg", "tr", "triads"),
    "leskovec et al.": ("deg", "tr", "triads"),
    "degree": ("deg",),
    "triangles": ("tr",),
    "embeddedness": ("tr",),
}
MASK_NAMES = ("All", "Classic", "Deg", "Tr", "Triads", "P3", "P4")


@dataclass(frozen=True)
class FeatureMask:
    """Named union of feature groups, e.g. ``"P3+P4"`` or ``"Classic+P3"``."""

    name: str
    groups: tuple

    @classmethod
    def parse(cls, name: str) -> "FeatureMask":
        groups: list[str] = []
        for part in str(name).split("+"):
            key = part.strip().lower()
            if key in GROUPS:
                picked = (key,)
            elif key in _ALIASES:
                picked = _ALIASES[key]
            else:
                raise ValueError(f"unknown feature mask {part.strip()!r}; "
                                 f"valid names: {', '.join(MASK_NAMES)} (combine with '+')")
            groups.extend(g for g in picked if g not in groups)
        if not groups:
            raise ValueError("empty feature mask")
        return cls(name, tuple(groups))

    @property
    def columns(self) -> list[int]:
        return sorted(i for g in self.groups for i in GROUPS[g])

    @property
    def feature_names(self) -> list[str]:
        return [FEATURE_NAMES[i] for i in self.columns]


def _as_mask(mask) -> FeatureMask | None:
    if mask is None or isinstance(mask, FeatureMask):
        return mask
    return FeatureMask.parse(mask)


def _pm1(labels) -> np.ndarray:
    y = np.asarray(labels).ravel()
    vals = set(np.unique(y).tolist())
    if vals <= {0, 1}:
        return np.where(y > 0, 1.0, -1.0)
    if vals <= {-1, 1}:
        return y.astype(float)
    raise ValueError(f"labels must be 0/1 or -1/+1, got {sorted(vals)}")


def logistic_objective(theta: np.ndarray, Z: np.ndarray, y: np.ndarray, l2: float):
    """Mean logistic loss plus ``l2/2 * |w|^2`` and its gradient.

    ``theta = [b0, w...]``; ``y`` in {-1, +1}. The intercept is not penalised.
    """
    b0, w = theta[0], theta[1:]
    margin = y * (b0 + Z @ w)
    loss = np.mean(np.logaddexp(0.0, -margin)) + 0.5 * l2 * (w @ w)
    coef = -y * _sigmoid(-margin) / len(y)
    grad = np.empty_like(theta)
    grad[0] = coef.sum()
    grad[1:] = Z.T @ coef + l2 * w
    return loss, grad


def _sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


@dataclass
class TrainedModel:
    columns: list[int]
    mean: np.ndarray
    std: np.ndarray
    weights: np.ndarray  # standardized space; zero for constant features
    bias: float
    l2: float
    iterations: int
    converged: bool
    grad_norm: float

    def decision_function(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        return self.bias + self._standardize(X[:, self.columns]) @ self.weights

    def _standardize(self, Xc):
        safe = np.where(self.std > 0, self.std, 1.0)
        return np.where(self.std > 0, (Xc - self.mean) / safe, 0.0)

    def predict_proba(self, X) -> np.ndarray:
        return _sigmoid(self.decision_function(X))

    def predict(self, X) -> np.ndarray:
        return np.where(self.decision_function(X) >= 0, 1, -1)

    def accuracy(self, X, labels) -> float:
        return float(np.mean(self.predict(X) == _pm1(labels)))

    def raw_coefficients(self) -> tuple[float, np.ndarray]:
        """Intercept and weights for unstandardized inputs."""
        safe = np.where(self.std > 0, self.std, 1.0)
        w_raw = np.where(self.std > 0, self.weights / safe, 0.0)
        return float(self.bias - w_raw @ self.mean), w_raw


def train_logistic(X, labels, mask=None, l2: float | None = None, max_iters: int = 2000,
                   tol: float = 1e-6) -> TrainedModel:
    """Fit the logistic model on the columns selected by ``mask``.

    ``l2`` defaults to ``1 / N``. Each step is plain gradient descent with an
    Armijo backtracking search started from the Barzilai-Borwein step length.
    Stops when the gradient's max-norm drops below ``tol`` or after
    ``max_iters`` steps. Starts from zero, so repeated fits are identical.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ValueError("X must be a 2-d array")
    y = _pm1(labels)
    if len(y) != len(X):
        raise ValueError("X and labels differ in length")
    if len(y) < 2 or np.all(y == y[0]):
        raise ValueError("need at least two rows with both labels present")
    mask = _as_mask(mask)
    columns = mask.columns if mask is not None else list(range(X.shape[1]))
    Xc = X[:, columns]
    if not np.all(np.isfinite(Xc)):
        raise ValueError("non-finite feature value")
    l2 = 1.0 / len(y) if l2 is None else float(l2)

    mean = Xc.mean(axis=0)
    std = Xc.std(axis=0)
    active = std > 0
    Z = (Xc[:, active] - mean[active]) / std[active]

    theta = np.zeros(1 + Z.shape[1])
    loss, grad = logistic_objective(theta, Z, y, l2)
    step = 1.0
    it = 0
    converged = False
    for it in range(1, max_iters + 1):
        if float(np.max(np.abs(grad))) < tol:
            converged = True
            it -= 1
            break
        g2 = float(grad @ grad)
        while True:
            cand = theta - step * grad
            cand_loss, cand_grad = logistic_objective(cand, Z, y, l2)
            if cand_loss <= loss - 1e-4 * step * g2 or step < 1e-14:
                break
            step *= 0.5
        # Barzilai-Borwein guess for the next trial step, then backtrack again
        s_vec, y_vec = cand - theta, cand_grad - grad
        sy = float(s_vec @ y_vec)
        step = float(s_vec @ s_vec) / sy if sy > 1e-300 else step * 2.0
        step = min(max(step, 1e-10), 1e6)
        theta, loss, grad = cand, cand_loss, cand_grad
    else:
        converged = float(np.max(np.abs(grad))) < tol

    weights = np.zeros(len(columns))
    weights[active] = theta[1:]
    return TrainedModel(columns, mean, std, weights, float(theta[0]), l2, it, converged,
                        float(np.max(np.abs(grad))))


def stratified_folds(labels, k: int = 10, seed=None) -> list[np.ndarray]:
    """Split row indices into ``k`` disjoint folds, balanced by label.

    Rows of each sign are shuffled and dealt round-robin, positives first and
    negatives continuing where they left off, so fold sizes differ by at most one.
    """
    y = np.asarray(labels)
    rng = np.random.default_rng(seed)
    pos = rng.permutation(np.flatnonzero(y > 0))
    neg = rng.permutation(np.flatnonzero(y <= 0))
    order = np.concatenate([pos, neg])
    slot = np.arange(len(order)) % k
    return [np.sort(order[slot == f]) for f in range(k)]


@dataclass
class CvReport:
    mask: str
    columns: list[str]
    emb_threshold: int
    emb_max: int | None
    seed: object
    n_edges: int
    fold_sizes: list[int]
    fold_accuracies: list[float]
    coefficients: list[dict] = field(default_factory=list)
    schema_version: int = SCHEMA_VERSION

    @property
    def mean_accuracy(self) -> float:
        return float(np.mean(self.fold_accuracies))

    def to_dict(self) -> dict:
        out = asdict(self)
        out["mean_accuracy"] = self.mean_accuracy
        return out

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    def write_coefficients_csv(self, fh) -> None:
        """One row per fold: intercept then one column per active feature."""
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["fold", "space", "intercept"] + self.columns)
        for i, c in enumerate(self.coefficients):
            w.writerow([i, "standardized", c["intercept"]] + c["weights"])
            w.writerow([i, "raw", c["raw_intercept"]] + c["raw_weights"])


class FeatureCache:
    """Memoised feature rows keyed by directed edge."""

    def __init__(self, graph: SignedGraph, jobs: int | None = None):
        self.graph = graph
        self.jobs = jobs
        self._rows: dict[tuple[int, int], np.ndarray] = {}

    def matrix(self, edges) -> np.ndarray:
        missing = [(int(u), int(v), 0) for u, v, *_ in edges if (int(u), int(v)) not in self._rows]
        if missing:
            rows = feature_matrix(self.graph, missing, jobs=self.jobs)
            for (u, v, _), row in zip(missing, rows):
                self._rows[(u, v)] = row
        return np.array([self._rows[(int(u), int(v))] for u, v, *_ in edges], dtype=np.int64)


def cross_validate(graph: SignedGraph, mask="All", emb_threshold: int = 0, seed=0,
                   emb_max: int | None = None, folds: int = 10, cache: FeatureCache | None = None,
                   l2: float | None = None, max_iters: int = 2000, tol: float = 1e-6,
                   jobs: int | None = None) -> CvReport:
    """Balanced k-fold accuracy for edges with ``emb_threshold <= C(u, v) [<= emb_max]``.

    Features come from the full graph with each target edge left out, and are
    computed once for the balanced sample before it is split.
    """
    mask = _as_mask(mask)
    if emb_threshold < 0:
        raise ValueError("embeddedness threshold must be >= 0")
    edges = graph.edge_array()
    emb = edge_embeddedness(graph)
    keep = emb >= emb_threshold
    if emb_max is not None:
        keep &= emb <= emb_max
    chosen = edges[keep]
    if len(chosen) < 20:
        raise ValueError(f"only {len(chosen)} edges qualify; need at least 20")
    sample = make_balanced_sample(chosen, seed)
    if len(sample) < 20:
        raise ValueError(f"balanced sample has {len(sample)} edges; need at least 20")
    cache = cache or FeatureCache(graph, jobs)
    X = cache.matrix(sample.edges)
    y = sample.labels

    split = stratified_folds(y, folds, seed)
    accs, coefs = [], []
    for f, test in enumerate(split):
        train = np.concatenate([split[g] for g in range(folds) if g != f])
        model = train_logistic(X[train], y[train], mask, l2=l2, max_iters=max_iters, tol=tol)
        accs.append(model.accuracy(X[test], y[test]))
        b_raw, w_raw = model.raw_coefficients()
        coefs.append({"intercept": model.bias, "weights": model.weights.tolist(),
                      "raw_intercept": b_raw, "raw_weights": w_raw.tolist(),
                      "converged": model.converged, "iterations": model.iterations})
    return CvReport(mask.name, mask.feature_names, emb_threshold, emb_max,
                    seed if isinstance(seed, (int, type(None))) else str(seed), len(sample),
                    [len(s) for s in split], accs, coefs)
