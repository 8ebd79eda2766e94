import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import grid_argmin
from conftest import disk_points, random_tree, random_tree_points, seeds
from mmconc import EuclideanScreen, HyperbolicScreen, MetricTree, PushforwardMeasure, build_space
from mmconc.barycenter import (
    barycenter,
    euclidean_barycenter,
    minimizer_set,
    objective,
    riemannian_barycenter,
    t_mean_minimizer,
    tree_barycenter,
    variance_inequality_report,
)
from mmconc.errors import EmptyMeasure
from mmconc.mmcore import merge_atoms

R1, R2 = EuclideanScreen(1), EuclideanScreen(2)
H2 = HyperbolicScreen(2, -1.0)


def meas(screen, atoms, w=None):
    atoms = np.asarray(atoms, float)
    w = np.full(len(atoms), 1.0 / len(atoms)) if w is None else np.asarray(w, float)
    return PushforwardMeasure(screen, atoms, w)


def tree_meas(T, pts, w):
    atoms, ww, _ = merge_atoms(T, pts, w)
    return PushforwardMeasure(T, atoms, ww)


# -------------------------------------------------------------- barycenters

def test_euclidean_examples():
    assert euclidean_barycenter(meas(R1, [[0], [1]])).point[0] == 0.5
    assert np.allclose(euclidean_barycenter(meas(R2, [[2, 3]])).point, [2, 3])
    assert np.allclose(euclidean_barycenter(meas(R2, [[0, 0], [3, 0], [0, 3]], [1, 1, 1])).point, [1, 1])


def test_empty_measure_rejected():
    with pytest.raises(EmptyMeasure):
        barycenter(PushforwardMeasure(R1, np.zeros((0, 1)), np.zeros(0)))


def test_riemannian_examples():
    r = riemannian_barycenter(meas(H2, [[0.3, 0], [-0.3, 0]]))
    assert np.allclose(r.point, 0, atol=1e-12)
    r = riemannian_barycenter(meas(H2, [[0.2, 0.1]]))
    assert r.iterations == 0 and np.allclose(r.point, [0.2, 0.1])
    r = riemannian_barycenter(meas(H2, [[0, 0], [0.5, 0]]))
    assert np.allclose(r.point, [2 - math.sqrt(3), 0], atol=1e-9)
    assert H2.distance(r.point, [0, 0]) == pytest.approx(math.log(3) / 2, abs=1e-9)


@given(seeds, st.integers(2, 8), st.sampled_from([-0.5, -1.0, -4.0]))
def test_riemannian_fixed_point_residual(seed, k, kappa):
    S = HyperbolicScreen(2, kappa)
    nu = meas(S, disk_points(seed, k, 2, 0.9), np.random.default_rng(seed).uniform(0.1, 1, k))
    r = riemannian_barycenter(nu)
    g = nu.weights @ S.log(r.point, nu.atoms) / nu.mass
    assert np.linalg.norm(g) <= 1e-10
    assert r.residual <= 1e-10


@pytest.mark.parametrize("seed", range(4))
def test_riemannian_agrees_with_grid_oracle(seed):
    nu = meas(H2, disk_points(100 + seed, 5, 2, 0.7))
    x = riemannian_barycenter(nu).point
    g = grid_argmin(H2, nu)
    assert np.linalg.norm(x - g) <= 1e-3


def test_tree_barycenter_examples(star):
    T = MetricTree(["u", "v"], [("u", "v", 2.0)])
    r = tree_barycenter(PushforwardMeasure(T, [T.vertex("u"), T.vertex("v")], np.array([0.5, 0.5])))
    assert r.point == T.edge_point(0, 1.0)
    leaves = [star.vertex(x) for x in "abd"]
    assert tree_barycenter(PushforwardMeasure(star, leaves, np.ones(3) / 3)).point == star.vertex("c")
    p = star.edge_point(1, 0.3)
    assert tree_barycenter(PushforwardMeasure(star, [p], np.ones(1))).point == p


@given(seeds, st.integers(2, 9), st.integers(1, 6))
def test_tree_barycenter_beats_dense_sampling(seed, n, k):
    T = random_tree(seed, n)
    nu = tree_meas(T, random_tree_points(T, seed + 1, k), np.random.default_rng(seed).uniform(0.1, 1, k))
    b = tree_barycenter(nu)
    best = min(
        objective(T, nu.atoms, nu.weights, T.edge_point(e, off))
        for e in range(len(T.edges))
        for off in np.linspace(0, T.edges[e][2], 41)
    )
    assert b.value <= best + 1e-9
    assert b.value == pytest.approx(objective(T, nu.atoms, nu.weights, b.point), abs=1e-9)


# ------------------------------------------------------------------ t-means

def test_t_mean_examples():
    r = t_mean_minimizer(meas(R1, [[0], [1]]), 2.0)
    assert r.point[0] == pytest.approx(0.5, abs=1e-9) and not r.flat_region
    r = t_mean_minimizer(meas(R1, [[0], [1]]), 1.0)
    assert 0 <= r.point[0] <= 1 and r.flat_region
    r = t_mean_minimizer(meas(R1, [[0], [1], [2]]), 1.0)
    assert r.point[0] == pytest.approx(1.0, abs=1e-9) and not r.flat_region
    with pytest.raises(ValueError):
        t_mean_minimizer(meas(R1, [[0]]), 2.5)


def test_piecewise_linear_scan_oracle():
    # t = 1 on the line: the objective is piecewise linear, so a scan over atoms is exact
    atoms = np.array([0.0, 0.4, 1.3, 2.0, 5.0])
    w = np.array([0.1, 0.3, 0.2, 0.25, 0.15])
    vals = [np.sum(w * np.abs(a - atoms)) for a in atoms]
    r = t_mean_minimizer(meas(R1, atoms[:, None], w), 1.0)
    assert r.value == pytest.approx(min(vals), abs=1e-12)
    assert r.point[0] == pytest.approx(atoms[int(np.argmin(vals))], abs=1e-9)


def test_tree_t_mean_flat_on_path():
    T = MetricTree(["u", "v"], [("u", "v", 1.0)])
    r = t_mean_minimizer(PushforwardMeasure(T, [T.vertex("u"), T.vertex("v")], np.array([0.5, 0.5])), 1.0)
    assert r.flat_region and r.spread == pytest.approx(1.0)


@given(seeds, st.integers(1, 6), st.floats(0.3, 2.0), st.sampled_from(["euclid", "hyperbolic"]))
def test_t_mean_localization_and_monotone_descent(seed, k, t, kind):
    S = R2 if kind == "euclid" else H2
    nu = meas(S, disk_points(seed, k, 2, 0.8))
    hist = []
    r = t_mean_minimizer(nu, t, seed=seed, history=hist)
    assert all(b <= a + 1e-14 * max(1.0, abs(a)) for a, b in zip(hist, hist[1:]))
    D = nu.pairwise()
    assert S.distances_from(r.point, nu.atoms).min() <= 2 * D.max() + 1e-6
    for a in nu.atoms:
        assert r.value <= objective(S, nu.atoms, nu.weights, a, t) + 1e-12


@given(seeds, st.integers(1, 6), st.floats(0.3, 2.0))
def test_tree_t_mean_localization(seed, k, t):
    T = random_tree(seed, 7)
    nu = tree_meas(T, random_tree_points(T, seed + 2, k), np.ones(k))
    r = t_mean_minimizer(nu, t)
    D = nu.pairwise()
    assert min(T.distance(r.point, a) for a in nu.atoms) <= 2 * D.max() + 1e-6


# ----------------------------------------------------------- minimizer sets

def test_minimizer_set_examples():
    assert minimizer_set(meas(H2, [[0.3, 0], [-0.3, 0]]), 1.5, 2.0, 9).diameter <= 1e-9
    # below exponent 1 the objective is concave along the geodesic and the minimizers are the atoms
    assert minimizer_set(meas(H2, [[0.3, 0], [-0.3, 0]]), 0.5, 0.9, 3).diameter == pytest.approx(H2.distance([0.3, 0], [-0.3, 0]))
    assert minimizer_set(meas(R1, [[0], [1]]), 1.0, 2.0, 5).diameter == pytest.approx(1.0)
    assert minimizer_set(meas(R2, [[0.1, 0.2]]), 0.5, 1.0, 5).diameter == 0.0
    with pytest.raises(ValueError):
        minimizer_set(meas(R1, [[0]]), 1.0, 0.5)


def _rotate(P, th):
    c, s = math.cos(th), math.sin(th)
    return P @ np.array([[c, -s], [s, c]]).T


@settings(max_examples=10)
@given(seeds, st.integers(2, 5), st.floats(0, 6.28))
def test_minimizer_set_equivariance(seed, k, th):
    P = disk_points(seed, k, 2, 0.7)
    w = np.random.default_rng(seed).uniform(0.2, 1, k)
    for S in (R2, H2):
        base = minimizer_set(meas(S, P, w), 0.6, 2.0, 5).diameter
        perm = np.random.default_rng(seed + 1).permutation(k)
        assert minimizer_set(meas(S, P[perm], w[perm]), 0.6, 2.0, 5).diameter == pytest.approx(base, abs=1e-6)
        assert minimizer_set(meas(S, _rotate(P, th), w), 0.6, 2.0, 5).diameter == pytest.approx(base, abs=1e-6)


# ------------------------------------------------------------------ variance

def test_variance_tree_two_atoms():
    L = 3.0
    T = MetricTree(["u", "v"], [("u", "v", L)])
    nu = PushforwardMeasure(T, [T.vertex("u"), T.vertex("v")], np.array([0.5, 0.5]))
    lhs, rhs, margin = variance_inequality_report(nu)
    assert lhs == pytest.approx(L**2 / 4) and rhs == pytest.approx(L**2 / 4) and abs(margin) <= 1e-12
    lhs, rhs, margin = variance_inequality_report(nu, p=1.0)
    assert lhs == pytest.approx(L / 2) and rhs == pytest.approx(L / 2)


def test_variance_antipodal_pair():
    sp = build_space(None, [[0, math.pi], [math.pi, 0]], [0.5, 0.5], coords=[[1.0, 0.0], [-1.0, 0.0]])
    lhs, rhs, margin = variance_inequality_report(sp, "nonnegative")
    assert lhs == pytest.approx(math.pi**2 / 4) and rhs == pytest.approx(math.pi**2 / 4)
    assert margin >= -1e-12


@given(seeds, st.integers(1, 7), st.sampled_from([1.0, 1.5, 2.0, 3.0]))
def test_variance_nonpositive_direction(seed, k, p):
    w = np.random.default_rng(seed).uniform(0.1, 1, k)
    for nu in (meas(R2, disk_points(seed, k) * 3, w), meas(H2, disk_points(seed, k), w)):
        assert variance_inequality_report(nu, p=p)[2] >= -1e-9
    T = random_tree(seed, 6)
    assert variance_inequality_report(tree_meas(T, random_tree_points(T, seed, k), w), p=p)[2] >= -1e-9


def test_variance_rejects_bad_form():
    with pytest.raises(ValueError):
        variance_inequality_report(meas(R1, [[0], [1]]), p=1.0, form="sturm")
    with pytest.raises(ValueError):
        variance_inequality_report(meas(R1, [[0], [1]]), curvature_sign="zero")
