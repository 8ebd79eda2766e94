import re

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from mmconc import MetricTree, build_space
from mmconc.generators import SpaceSpec, gen_space

settings.register_profile(
    "default",
    deadline=None,
    max_examples=40,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
)
settings.load_profile("default")


@pytest.fixture
def two_point():
    return build_space(["x1", "x2"], [[0, 1], [1, 0]], [0.5, 0.5])


@pytest.fixture
def star():
    return MetricTree(["c", "a", "b", "d"], [("c", "a", 1.0), ("c", "b", 1.0), ("c", "d", 1.0)])


def cloud(n, seed, metric="euclid"):
    return gen_space(SpaceSpec("random_cloud", {"n": n, "dim": 2, "metric": metric}, seed))


seeds = st.integers(min_value=0, max_value=2**32 - 1)
small_n = st.integers(min_value=2, max_value=9)


@st.composite
def small_spaces(draw, max_n=9):
    n = draw(st.integers(min_value=1, max_value=max_n))
    seed = draw(seeds)
    metric = draw(st.sampled_from(["euclid", "graph"]))
    return cloud(n, seed, metric)


def rng(seed=0):
    return np.random.default_rng(seed)


def random_tree(seed, n=8):
    r = np.random.default_rng(seed)
    edges = [(int(r.integers(0, i)), i, float(r.uniform(0.1, 2.0))) for i in range(1, n)]
    return MetricTree(list(range(n)), edges)


def random_tree_points(tree, seed, k):
    r = np.random.default_rng(seed)
    out = []
    for _ in range(k):
        if r.uniform() < 0.3 or not tree.edges:
            out.append(int(r.integers(0, len(tree.vertices))))
        else:
            e = int(r.integers(0, len(tree.edges)))
            out.append((e, float(r.uniform(0, tree.edges[e][2]))))
    return tree.as_points(out)


def disk_points(seed, k, dim=2, rmax=0.9):
    r = np.random.default_rng(seed)
    v = r.normal(size=(k, dim))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    return v * (rmax * r.uniform(size=(k, 1)) ** (1.0 / dim))


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: (int(re.match(r"\d+", s.split()[1]).group()), s)):
            terminalreporter.write_line(line)
