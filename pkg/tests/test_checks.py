"""The inequality battery: every relation holds on random small spaces."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from conftest import random_tree, random_tree_points, seeds, small_spaces
from mmconc import EuclideanScreen, HyperbolicScreen, PushforwardMeasure, build_space, pushforward
from mmconc.checks import (
    alpha_closed,
    check_alpha_levy_radius,
    check_alpha_at_twice_levy_radius,
    check_sep_alpha,
    check_alpha_tail,
    check_central_radius,
    check_lp,
    check_log_chart,
    check_sep_pushforward,
    check_product,
    check_sandwich,
    check_tree_maps,
    check_tree_split,
    check_variance,
    check_variance_sphere,
    verify_space,
    verify_spaces,
)
from mmconc.generators import gen_space, map_family, scalar_family
from mmconc.mmcore import merge_atoms
from mmconc.observables import alpha_exact_many, levy_radius, obs_diameter, partial_diameter, ScreenMap


def all_pass(recs):
    bad = [r for r in recs if r.passed is False]
    assert not bad, bad[:3]
    return recs


@settings(max_examples=25)
@given(small_spaces(max_n=9))
def test_sandwich_and_alpha_relations(space):
    all_pass(check_sandwich(space))
    all_pass(check_alpha_levy_radius(space))
    all_pass(check_alpha_at_twice_levy_radius(space))
    all_pass(check_sep_alpha(space))


@settings(max_examples=15)
@given(small_spaces(max_n=8))
def test_alpha_tail(space):
    all_pass(check_alpha_tail(space))


@settings(max_examples=15)
@given(small_spaces(max_n=8), seeds)
def test_sep_pushforward(space, seed):
    all_pass(check_sep_pushforward(space, seed=seed, count=6))


@settings(max_examples=15)
@given(small_spaces(max_n=9), seeds)
def test_lp_and_central_radius(space, seed):
    maps = []
    for j, scr in enumerate((EuclideanScreen(1), EuclideanScreen(2), HyperbolicScreen(2, -1.0), random_tree(seed, 6))):
        maps += map_family(space, scr, "mixed", 3, seed + j)
    all_pass(check_lp(space, maps))
    all_pass(check_central_radius(space, maps))
    all_pass(check_log_chart(space, [F for F in maps if F.screen.kind == "hyperbolic"]))


@settings(max_examples=15)
@given(small_spaces(max_n=9), seeds)
def test_product_and_tree_maps(space, seed):
    all_pass(check_product(space, 2, 4, seed))
    all_pass(check_product(space, 3, 2, seed))
    all_pass(check_tree_maps(space, random_tree(seed, 7), count=4, seed=seed))


@given(seeds, st.integers(1, 10))
def test_tree_split_records(seed, k):
    T = random_tree(seed, 9)
    atoms, w, _ = merge_atoms(T, random_tree_points(T, seed, k), np.random.default_rng(seed).uniform(0.1, 1, k))
    all_pass(check_tree_split(PushforwardMeasure(T, atoms, w)))


def test_variance_checks():
    sp = gen_space("sphere:n=3,N=40,seed=2")
    all_pass(check_variance_sphere(sp))
    nu = pushforward(map_family(sp, HyperbolicScreen(2, -1.0), "exp_chart", 1, 0)[0], sp)
    all_pass(check_variance(nu))


# ------------------------------------------------- cross-checks against oracles

@settings(max_examples=20)
@given(small_spaces(max_n=7), st.floats(0.05, 0.45))
def test_sandwich_with_public_api(space, c):
    """Recompute both sides through the public functionals and brute-force oracles."""
    sp = space.restrict_to_support()
    k = c * sp.mass
    fam = scalar_family(sp, "exact_small")
    lr = levy_radius(sp, k, fam).value
    maps = [ScreenMap.from_field(f) for f in fam]
    od = obs_diameter(sp, EuclideanScreen(1), k, maps).value
    ref = max(oracles.pd_brute(np.abs(f.values[:, None] - f.values[None, :]), sp.weights, sp.mass - k) for f in fam)
    assert od == pytest.approx(ref, abs=1e-12)
    assert lr <= od + 1e-9 and od <= 2 * lr + 1e-9


# ------------------------------------------- alpha at exactly twice LeRad

def test_twice_levy_radius_counterexample_on_two_points(two_point):
    """At exactly twice the Levy radius the open-neighborhood alpha can exceed kappa.

    On two points at distance 1 with kappa = 1/4, the radius is 1/2 and
    alpha(1) = 1/2 because the open 1-neighborhood of one point misses the
    other. Just to the right of 1, alpha drops to 0.
    """
    [lit] = check_alpha_at_twice_levy_radius(two_point, kappas=[0.25], literal=True)
    assert lit.lhs == 0.5 and lit.passed is False
    [closed] = check_alpha_at_twice_levy_radius(two_point, kappas=[0.25])
    assert closed.lhs == 0.0 and closed.passed
    D, w = two_point.dist, two_point.weights
    assert alpha_exact_many(D, w, [1.0])[0] == 0.5
    assert alpha_closed(D, w, [1.0])[0] == 0.0


# ----------------------------------------------------------------- battery

@pytest.mark.parametrize("spec", ["two_point", "point", "cloud:n=10,seed=1", "cube:k=3", "sphere:n=3,N=12,seed=4"])
def test_verify_space_passes(spec):
    res = verify_space(gen_space(spec))
    assert res.passed, res.failures()[:3]
    assert len(res.records) > 0


def test_verify_skips_large_spaces():
    res = verify_space(gen_space("sphere:n=3,N=60,seed=1"))
    assert res.passed
    assert any(r.passed is None for r in res.records)
    d = res.to_dict()
    assert d["summary"]["exact_battery"]["min_margin"] is None


def test_suite_result_flags_a_failing_record(two_point):
    res = verify_spaces([two_point])
    assert res.passed
    rec = check_alpha_at_twice_levy_radius(two_point, kappas=[0.25], literal=True)
    from mmconc.checks import VerifySuiteResult

    bad = VerifySuiteResult(res.records + rec)
    assert not bad.passed and len(bad.failures()) == 1
