import numpy as np
import pytest

from noisy_clusters.graph import planted_signed_network
from noisy_clusters.learn import (FeatureCache, FeatureMask, cross_validate, logistic_objective,
                                  stratified_folds, train_logistic)


def central_diff(f, theta, h=1e-6):
    g = np.zeros_like(theta)
    for i in range(len(theta)):
        e = np.zeros_like(theta)
        e[i] = h
        g[i] = (f(theta + e) - f(theta - e)) / (2 * h)
    return g


def rel_err(a, b):
    return np.linalg.norm(a - b) / max(np.linalg.norm(a), np.linalg.norm(b), 1e-12)


def test_gradient_matches_finite_differences():
    rng = np.random.default_rng(0)
    for _ in range(50):
        n, d = rng.integers(5, 60), rng.integers(1, 8)
        Z = rng.normal(size=(n, d))
        y = rng.choice([-1.0, 1.0], n)
        theta = rng.normal(size=d + 1)
        l2 = rng.uniform(0, 1)
        _, g = logistic_objective(theta, Z, y, l2)
        fd = central_diff(lambda t: logistic_objective(t, Z, y, l2)[0], theta)
        assert rel_err(g, fd) <= 1e-5


def test_returned_weights_are_stationary():
    rng = np.random.default_rng(1)
    X = rng.normal(size=(200, 4))
    y = np.where(X @ [1, -2, 0.5, 0] + rng.normal(size=200) > 0, 1, -1)
    m = train_logistic(X, y, tol=1e-8)
    assert m.converged
    Z = (X - m.mean) / m.std
    theta = np.concatenate([[m.bias], m.weights])
    fd = central_diff(lambda t: logistic_objective(t, Z, y, m.l2)[0], theta)
    assert np.max(np.abs(fd)) < 1e-5


def test_separable_one_dimensional():
    X = np.array([[-1.0], [1.0]])
    m = train_logistic(X, [-1, 1], l2=0)
    assert m.accuracy(X, [-1, 1]) == 1.0


def test_separable_toy_default_l2():
    rng = np.random.default_rng(2)
    X = np.vstack([rng.normal(-3, 1, (50, 2)), rng.normal(3, 1, (50, 2))])
    y = np.array([-1] * 50 + [1] * 50)
    assert train_logistic(X, y).accuracy(X, y) == 1.0


def test_uninformative_features():
    X = np.zeros((10, 3))
    y = [1] * 5 + [-1] * 5
    m = train_logistic(X, y)
    assert m.accuracy(X, y) == 0.5
    assert not m.weights.any()


def test_constant_feature_frozen_and_raw_equivalence():
    rng = np.random.default_rng(3)
    X = np.column_stack([rng.normal(size=100), np.full(100, 7.0), rng.normal(5, 3, size=100)])
    y = np.where(X[:, 0] + 0.3 * X[:, 2] > 1.5, 1, -1)
    m = train_logistic(X, y)
    assert m.weights[1] == 0
    b, w = m.raw_coefficients()
    assert np.allclose(b + X @ w, m.decision_function(X))


def test_errors():
    with pytest.raises(ValueError):
        train_logistic(np.ones((4, 2)), [1, 1, 1, 1])
    with pytest.raises(ValueError):
        train_logistic(np.array([[np.nan], [1.0]]), [1, -1])
    with pytest.raises(ValueError):
        train_logistic(np.ones((1, 2)), [1])


def test_duplicate_feature_keeps_predictions():
    rng = np.random.default_rng(4)
    X = rng.normal(size=(300, 3))
    y = np.where(X @ [1.0, -1.0, 0.5] + rng.normal(size=300) > 0, 1, -1)
    a = train_logistic(X, y, tol=1e-10)
    Xd = np.column_stack([X, X[:, 0]])
    b = train_logistic(Xd, y, tol=1e-10)
    assert np.array_equal(a.predict(X), b.predict(Xd))
    assert b.weights[0] == pytest.approx(b.weights[3])


def test_mask_parsing():
    assert FeatureMask.parse("All").columns == list(range(27))
    assert FeatureMask.parse("classic").columns == list(range(23))
    assert FeatureMask.parse("Leskovec").columns == list(range(23))
    assert FeatureMask.parse("P3+P4").columns == [23, 24, 25, 26]
    assert FeatureMask.parse("Triads").columns == list(range(7, 23))
    assert FeatureMask.parse("Deg+Tr").columns == list(range(7))
    with pytest.raises(ValueError):
        FeatureMask.parse("nope")
    with pytest.raises(ValueError):
        FeatureMask.parse("")


def test_mask_selects_columns():
    rng = np.random.default_rng(5)
    X = rng.normal(size=(80, 27))
    y = np.where(X[:, 23] > 0, 1, -1)
    m = train_logistic(X, y, FeatureMask.parse("P3"))
    assert len(m.weights) == 2 and m.accuracy(X, y) == 1.0


@pytest.mark.parametrize("size", [100, 101, 109])
def test_folds_partition_balanced(size):
    y = np.array([1] * (size // 2) + [-1] * (size - size // 2))
    folds = stratified_folds(y, 10, seed=1)
    allidx = np.concatenate(folds)
    assert sorted(allidx.tolist()) == list(range(size))
    sizes = [len(f) for f in folds]
    assert max(sizes) - min(sizes) <= 1
    assert all(abs(s - size / 10) <= 1 for s in sizes)
    for f in folds:
        pos = int(np.sum(y[f] > 0))
        assert abs(pos - (len(f) - pos)) <= 2


@pytest.fixture(scope="module")
def planted():
    g, _ = planted_signed_network(400, 10, seed=3)
    return g, FeatureCache(g)


def test_cv_report_structure_and_determinism(planted):
    g, cache = planted
    r1 = cross_validate(g, "All", seed=5, cache=cache)
    r2 = cross_validate(g, "All", seed=5, cache=FeatureCache(g))
    assert r1.to_dict() == r2.to_dict()
    assert len(r1.fold_accuracies) == 10 and sum(r1.fold_sizes) == r1.n_edges
    assert max(r1.fold_sizes) - min(r1.fold_sizes) <= 1
    assert r1.schema_version == 1 and len(r1.coefficients) == 10


def test_all_not_worse_than_classic(planted):
    g, cache = planted
    for seed in (0, 1):
        full = cross_validate(g, "All", seed=seed, cache=cache).mean_accuracy
        classic = cross_validate(g, "Classic", seed=seed, cache=cache).mean_accuracy
        assert full >= classic - 0.01


def test_cv_threshold_and_errors(planted):
    g, cache = planted
    r = cross_validate(g, "Deg", emb_threshold=2, seed=0, cache=cache)
    assert r.emb_threshold == 2 and r.mean_accuracy > 0.5
    with pytest.raises(ValueError):
        cross_validate(g, "All", emb_threshold=10_000, cache=cache)
    with pytest.raises(ValueError):
        cross_validate(g, "All", emb_threshold=-1, cache=cache)


def test_coefficient_csv(planted, tmp_path):
    g, cache = planted
    r = cross_validate(g, "P3", seed=0, cache=cache)
    path = tmp_path / "c.csv"
    with open(path, "w") as fh:
        r.write_coefficients_csv(fh)
    lines = path.read_text().splitlines()
    assert lines[0] == "fold,space,intercept,p3_pos,p3_neg"
    assert len(lines) == 21
