import numpy as np
import pytest
from scipy.optimize import linprog

import sinkdist


def lp_emd(r, c, m):
    d = len(r)
    a_eq = np.zeros((2 * d, d * d))
    for i in range(d):
        a_eq[i, i * d:(i + 1) * d] = 1.0
        a_eq[d + i, i::d] = 1.0
    res = linprog(m.ravel(), A_eq=a_eq, b_eq=np.concatenate([r, c]), bounds=(0, None), method="highs")
    return res.fun


def plain_sinkhorn(r, c, m, lam, iters=20000):
    k = np.exp(-lam * m)
    u = np.ones_like(r)
    for _ in range(iters):
        v = c / (k.T @ u)
        u = r / (k @ v)
    p = u[:, None] * k * v[None, :]
    return float((p * m).sum())


def test_normalize_and_entropy():
    np.testing.assert_allclose(sinkdist.normalize(np.array([1.0, 3.0])), [0.25, 0.75])
    assert sinkdist.entropy(np.array([0.5, 0.5])) == pytest.approx(np.log(2.0))


def test_emd_matches_linear_program():
    for seed in range(5):
        m = sinkdist.random_points_metric(7, seed)
        r, c = sinkdist.sample_simplex(7, 100 + seed), sinkdist.sample_simplex(7, 200 + seed)
        sol = sinkdist.emd(r, c, m)
        assert sol.cost == pytest.approx(lp_emd(r, c, m), abs=1e-9)
        np.testing.assert_allclose(sol.plan.sum(axis=1), r, atol=1e-12)


def test_sinkhorn_matches_numpy_iteration():
    m = sinkdist.median_normalize(sinkdist.random_points_metric(10, 3))
    r, c = sinkdist.sample_simplex(10, 4), sinkdist.sample_simplex(10, 5)
    res = sinkdist.sinkhorn(r, c, m, 5.0, tolerance=1e-12)
    assert res.converged
    assert res.divergence == pytest.approx(plain_sinkhorn(r, c, m, 5.0), rel=1e-9)
    assert res.divergence >= sinkdist.emd(r, c, m).cost - 1e-12


def test_two_bin_closed_form():
    half = np.array([0.5, 0.5])
    swap = np.array([[0.0, 1.0], [1.0, 0.0]])
    value = sinkdist.sinkhorn(half, half, swap, 1.0, tolerance=1e-14).divergence
    assert value == pytest.approx(1.0 / (1.0 + np.e), rel=1e-9)


def test_batch_agrees_with_single():
    m = sinkdist.median_normalize(sinkdist.random_points_metric(12, 1))
    r = sinkdist.sample_simplex(12, 2)
    targets = np.column_stack([sinkdist.sample_simplex(12, s) for s in range(10, 16)])
    batch = sinkdist.sinkhorn_batch(r, targets, m, 9.0, tolerance=1e-10)
    single = [sinkdist.sinkhorn(r, targets[:, j], m, 9.0, tolerance=1e-10).divergence for j in range(6)]
    np.testing.assert_allclose(batch, single, rtol=1e-8)


def test_plan_marginals():
    m = sinkdist.grid_euclidean_metric(3, 3)
    r, c = sinkdist.sample_simplex(9, 7), sinkdist.sample_simplex(9, 8)
    p = sinkdist.sinkhorn_plan(r, c, m, 2.0)
    np.testing.assert_allclose(p.sum(axis=1), r, atol=1e-8)
    np.testing.assert_allclose(p.sum(axis=0), c, atol=1e-12)


def test_alpha_boundaries():
    m = sinkdist.random_points_metric(6, 9)
    r, c = sinkdist.sample_simplex(6, 10), sinkdist.sample_simplex(6, 11)
    rep = sinkdist.sinkhorn_alpha(r, c, m, 0.0)
    assert rep.boundary == "independence"
    assert rep.value == pytest.approx(r @ m @ c, rel=1e-12)
    rep = sinkdist.sinkhorn_alpha(r, c, m, 0.3)
    assert abs(rep.achieved_entropy - rep.target_entropy) <= 1e-4


def test_baselines_and_errors():
    a, b = np.array([1.0, 0.0]), np.array([0.0, 1.0])
    assert sinkdist.baseline_distance("tv", a, b) == pytest.approx(1.0)
    assert sinkdist.baseline_distance("hellinger", a, b) == pytest.approx(2.0)
    with pytest.raises(ValueError):
        sinkdist.baseline_distance("cosine", a, b)
    with pytest.raises(ValueError):
        sinkdist.normalize(np.array([-1.0, 2.0]))
    with pytest.raises(ValueError):
        sinkdist.sinkhorn(a, b, np.eye(3), 1.0)
