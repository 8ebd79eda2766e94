import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import seeds, small_spaces
from mmconc import EuclideanScreen, SubsetMask, build_space, neighborhood, pushforward
from mmconc.errors import AsymmetricMatrix, BadSpace, EmptySubset, NegativeWeight, TriangleViolation
from mmconc.generators import gen_space
from mmconc.mmcore import check_triangle, merge_atoms
from mmconc.observables import ScreenMap


def test_two_point_space(two_point):
    assert two_point.mass == 1.0
    assert two_point.diameter == 1.0
    assert two_point.summary() == {"n": 2, "mass": 1.0, "diameter": 1.0, "support_size": 2}


def test_single_point_space():
    sp = build_space(["p"], [[0.0]], [1.0])
    assert sp.diameter == 0.0 and sp.mass == 1.0


def test_triangle_violation_reports_triple():
    with pytest.raises(TriangleViolation) as exc:
        build_space(None, [[0, 1, 3], [1, 0, 1], [3, 1, 0]])
    assert exc.value.slack == pytest.approx(1.0)
    assert {exc.value.i, exc.value.k} == {0, 2}


def test_triangle_tolerance_admits_rounding():
    build_space(None, [[0, 1, 2 + 5e-10], [1, 0, 1], [2 + 5e-10, 1, 0]])


def test_rejects_bad_inputs():
    with pytest.raises(AsymmetricMatrix):
        build_space(None, [[0, 1], [2, 0]])
    with pytest.raises(NegativeWeight):
        build_space(None, [[0, 1], [1, 0]], [1.0, -0.1])
    with pytest.raises(BadSpace):
        build_space(None, [[0, 1], [1, 0]], [0.0, 0.0])
    with pytest.raises(BadSpace):
        build_space(None, [[0, 1, 2]])
    with pytest.raises(BadSpace):
        build_space(None, [[0, np.nan], [np.nan, 0]])


def test_weights_need_not_sum_to_one():
    sp = build_space(None, [[0, 1], [1, 0]], [2.0, 1.5])
    assert sp.mass == 3.5


def test_support_and_diameter_ignore_null_points():
    sp = build_space(None, [[0, 1, 5], [1, 0, 4], [5, 4, 0]], [0.5, 0.5, 0.0])
    assert list(sp.support) == [0, 1]
    assert sp.diameter == 1.0
    assert sp.restrict_to_support().n == 2


def test_spot_check_large_matrix():
    x = np.linspace(0, 1, 400)
    D = np.abs(x[:, None] - x[None, :])
    check_triangle(D)
    # stretch one off-diagonal block; a positive fraction of random triples then violates
    D[:200, 200:] *= 3.0
    D[200:, :200] *= 3.0
    with pytest.raises(TriangleViolation):
        check_triangle(D)


def test_space_is_immutable(two_point):
    with pytest.raises(ValueError):
        two_point.dist[0, 1] = 5.0


def test_neighborhood_examples(two_point):
    A = SubsetMask.of(two_point, [0])
    assert neighborhood(two_point, A, 1.0, closed=True).indices == [0, 1]
    assert neighborhood(two_point, A, 1.0, closed=False).indices == [0]
    assert neighborhood(two_point, A, 0.0, closed=True).indices == [0]
    with pytest.raises(EmptySubset):
        neighborhood(two_point, SubsetMask.of(two_point, []), 1.0)


def test_subset_mask_mass(two_point):
    assert SubsetMask.of(two_point, []).mass == 0.0
    assert SubsetMask.of(two_point, [0, 1]).mass == 1.0
    assert SubsetMask.of(two_point, [0]) <= SubsetMask.of(two_point, [0, 1])


def test_pushforward_identity(two_point):
    F = ScreenMap(EuclideanScreen(1), np.array([[0.0], [1.0]]))
    nu = pushforward(F, two_point)
    assert nu.atoms[:, 0].tolist() == [0.0, 1.0]
    assert nu.weights.tolist() == [0.5, 0.5]


def test_pushforward_constant_map_merges(two_point):
    F = ScreenMap(EuclideanScreen(2), np.array([[0.3, 0.1], [0.3, 0.1]]))
    nu = pushforward(F, two_point)
    assert len(nu) == 1 and nu.weights[0] == 1.0


def test_merge_rule_threshold():
    scr = EuclideanScreen(1)
    atoms, w, owner = merge_atoms(scr, np.array([[0.0], [5e-13], [1e-11]]), [1.0, 2.0, 3.0])
    assert w.tolist() == [3.0, 3.0]
    assert owner.tolist() == [0, 0, 1]


@given(small_spaces(), seeds, st.floats(0, 3), st.floats(0, 3))
def test_neighborhoods_grow_with_radius(space, seed, r1, r2):
    r, R = sorted((r1, r2))
    rng = np.random.default_rng(seed)
    k = int(rng.integers(1, space.n + 1))
    A = SubsetMask.of(space, rng.choice(space.n, size=k, replace=False))
    for closed in (True, False):
        small = neighborhood(space, A, r, closed)
        big = neighborhood(space, A, R, closed)
        assert small <= big
        assert small.mass <= big.mass
        if closed or r > 0:
            assert A <= small


@given(small_spaces(), seeds)
def test_pushforward_preserves_mass(space, seed):
    rng = np.random.default_rng(seed)
    pts = rng.integers(0, 3, size=(space.n, 2)).astype(float)
    nu = pushforward(ScreenMap(EuclideanScreen(2), pts), space)
    assert abs(nu.mass - space.mass) <= 1e-12
    assert len(nu) <= len(space.support)


@pytest.mark.parametrize(
    "spec",
    ["two_point", "point", "circle:N=17", "cube:k=5", "sphere:n=4,N=60,seed=3", "cloud:n=30,seed=5,metric=graph", "sphere:n=10,N=40,s=0.25"],
)
def test_generated_spaces_validate(spec):
    sp = gen_space(spec, check=False)
    build_space(sp.labels, sp.dist, sp.weights)
