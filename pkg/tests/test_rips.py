import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from pdcp import PointCloud, RipsConfig, build_rips, diameter, validate
from pdcp.types import InputError

coords = st.floats(-10, 10, allow_nan=False, allow_infinity=False)
clouds = st.integers(1, 25).flatmap(lambda n: arrays(np.float64, (n, 2), elements=coords))


def test_single_point():
    c = build_rips(PointCloud([[0.0, 0.0]]), RipsConfig(1.0))
    assert len(c) == 1 and c.values[0] == 0.0


def test_coincident_points():
    c = build_rips(PointCloud([[1.0, 1.0], [1.0, 1.0]]), RipsConfig(1.0))
    assert [(s.vertices, s.filtration_value) for s in c.simplices] == [((0,), 0.0), ((1,), 0.0), ((0, 1), 0.0)]


def test_right_triangle():
    c = build_rips(PointCloud([[0, 0], [1, 0], [0, 1]]), RipsConfig(1.5, 2))
    _, ev = c.of_dim(1)
    assert ev.tolist() == [1.0, 1.0, pytest.approx(math.sqrt(2), abs=1e-12)]
    tv, tval = c.of_dim(2)
    assert tv.tolist() == [[0, 1, 2]] and tval[0] == ev[2]


def test_max_dim_one_has_no_triangles():
    c = build_rips(PointCloud([[0, 0], [1, 0], [0, 1]]), RipsConfig(1.5, 1))
    assert c.count(2) == 0 and c.count(1) == 3


def test_errors():
    with pytest.raises(InputError, match="empty input"):
        build_rips(np.zeros((0, 2)), RipsConfig(1.0))
    with pytest.raises(InputError, match="invalid coordinate"):
        build_rips(PointCloud([[0.0, np.inf]]), RipsConfig(1.0))
    with pytest.raises(ValueError):
        RipsConfig(0.0)
    with pytest.raises(ValueError):
        RipsConfig(1.0, 3)


def test_diameter():
    assert diameter(PointCloud([[0, 0], [3, 4], [1, 1]])) == 5.0
    assert diameter(PointCloud([[2, 2]])) == 0.0


@given(clouds, st.floats(0.1, 15))
def test_valid_and_edge_count_matches_brute_force(pts, eps):
    c = build_rips(PointCloud(pts), RipsConfig(eps, 2))
    assert validate(c) is None
    n = len(pts)
    brute = [
        (i, j) for i in range(n) for j in range(i + 1, n)
        if math.dist(pts[i], pts[j]) <= eps
    ]
    assert c.count(1) == len(brute)
    assert {tuple(e) for e in c.of_dim(1)[0].tolist()} == set(brute)
    # triangles are exactly the 3-cliques
    adj = set(brute)
    cliques = {
        (i, j, k) for i in range(n) for j in range(i + 1, n) for k in range(j + 1, n)
        if {(i, j), (i, k), (j, k)} <= adj
    }
    assert {tuple(t) for t in c.of_dim(2)[0].tolist()} == cliques


@given(clouds, st.floats(0, 2 * math.pi), st.floats(-5, 5), st.floats(-5, 5))
def test_isometry_invariance(pts, angle, dx, dy):
    rot = np.array([[math.cos(angle), -math.sin(angle)], [math.sin(angle), math.cos(angle)]])
    moved = pts @ rot.T + [dx, dy]
    cfg = RipsConfig(1e6, 2)  # no truncation: rounding cannot flip membership
    a = np.array(build_rips(PointCloud(pts), cfg).value_multiset())
    b = np.array(build_rips(PointCloud(moved), cfg).value_multiset())
    assert a.shape == b.shape
    assert np.array_equal(a[:, 0], b[:, 0])
    np.testing.assert_allclose(np.sort(a[:, 1]), np.sort(b[:, 1]), atol=1e-9)


@given(clouds, st.floats(0.1, 15), st.randoms(use_true_random=False))
def test_permutation_equivariance(pts, eps, rnd):
    perm = list(range(len(pts)))
    rnd.shuffle(perm)
    cfg = RipsConfig(eps, 2)
    a = build_rips(PointCloud(pts), cfg)
    b = build_rips(PointCloud(pts[perm]), cfg)
    assert a.value_multiset() == b.value_multiset()


@given(clouds, st.floats(0.1, 8), st.floats(0, 8))
def test_monotone_truncation(pts, eps, extra):
    small = build_rips(PointCloud(pts), RipsConfig(eps, 2)).simplices
    big = build_rips(PointCloud(pts), RipsConfig(eps + extra, 2)).simplices
    assert set(small) <= set(big)
    # the added simplices all enter later than eps
    assert all(s.filtration_value > eps for s in set(big) - set(small))
