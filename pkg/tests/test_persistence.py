import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from pdcp import (
    FilteredComplex,
    FiltrationError,
    PointCloud,
    ReductionOptions,
    RipsConfig,
    ScalarGrid,
    build_lower_star,
    build_rips,
    compute_persistence,
    h0_union_find,
)
from pdcp.persistence import pair_simplices

from oracles import boundary_reduction, kruskal_weights, random_complex

KEEP_ZERO = ReductionOptions(drop_zero_persistence=False)


def as_counters(diagram):
    finite = Counter()
    for d in diagram.dims:
        for b, p in diagram.pairs(d):
            finite[(d, b, b + p)] += 1
    essential = Counter((d, b) for d in diagram.dims for b in diagram.infinite_births(d))
    return finite, essential


def oracle_tilted(finite):
    # rewrite oracle deaths as persistences with the same float arithmetic
    return Counter({(d, b, b + (x - b)): n for (d, b, x), n in finite.items()})


def test_points_on_a_line():
    d = compute_persistence(build_rips(PointCloud([[0.0], [1.0], [3.0]]), RipsConfig(3.0)))
    assert d.pairs(0).tolist() == [[0.0, 1.0], [0.0, 2.0]]
    assert d.infinite_births(0).tolist() == [0.0]


def test_unit_square_loop():
    pts = [[0, 0], [1, 0], [1, 1], [0, 1]]
    d = compute_persistence(build_rips(PointCloud(pts), RipsConfig(1.5, 2)))
    (b, p), = d.pairs(1).tolist()
    assert b == 1.0 and p == pytest.approx(math.sqrt(2) - 1, abs=1e-12)
    assert d.infinite_births(1).size == 0


def test_row_grid_lower_star():
    d = compute_persistence(build_lower_star(ScalarGrid([[0, 3, 1, 2]])))
    assert d.pairs(0).tolist() == [[1.0, 2.0]]
    assert d.infinite_births(0).tolist() == [0.0]
    assert d.pairs(1).size == 0


def test_increasing_path_has_no_finite_pairs():
    items = [((i,), float(i)) for i in range(6)] + [((i, i + 1), float(i + 1)) for i in range(5)]
    d = compute_persistence(FilteredComplex.from_simplices(items))
    assert d.pairs(0).size == 0 and d.infinite_births(0).tolist() == [0.0]


def test_single_vertex_and_zero_merge():
    d = h0_union_find(FilteredComplex.from_simplices([((0,), 4.0)]))
    assert d.pairs(0).size == 0 and d.infinite_births(0).tolist() == [4.0]
    two = FilteredComplex.from_simplices([((0,), 0.0), ((1,), 0.0), ((0, 1), 0.0)])
    d = h0_union_find(two)
    assert d.pairs(0).size == 0 and d.infinite_births(0).tolist() == [0.0]
    kept = h0_union_find(two, drop_zero_persistence=False)
    assert kept.pairs(0).tolist() == [[0.0, 0.0]]


def test_hollow_triangle_is_essential_loop():
    items = [((i,), 0.0) for i in range(3)] + [((0, 1), 1.0), ((0, 2), 2.0), ((1, 2), 3.0)]
    d = compute_persistence(FilteredComplex.from_simplices(items))
    assert d.infinite_births(1).tolist() == [3.0]


def test_invalid_filtration_rejected():
    bad = FilteredComplex.from_simplices([((0,), 2.0), ((1,), 0.0), ((0, 1), 1.0)])
    with pytest.raises(FiltrationError, match="invalid filtration"):
        compute_persistence(bad)
    with pytest.raises(FiltrationError, match="invalid filtration"):
        compute_persistence(FilteredComplex.from_simplices([((0, 1), 1.0)]))


def test_sparse_vertex_ids():
    items = [((10,), 0.0), ((5000,), 1.0), ((10, 5000), 2.0)]
    d = compute_persistence(FilteredComplex.from_simplices(items))
    assert d.pairs(0).tolist() == [[1.0, 1.0]]


def test_empty_options_rejected():
    with pytest.raises(ValueError):
        ReductionOptions(dims=())


@given(st.integers(0, 2**32 - 1))
def test_matches_boundary_reduction(seed):
    items = random_complex(np.random.default_rng(seed))
    got = compute_persistence(FilteredComplex.from_simplices(items), KEEP_ZERO)
    finite, essential = boundary_reduction(items)
    g_fin, g_ess = as_counters(got)
    assert g_fin == oracle_tilted(finite)
    assert g_ess == essential


@given(st.integers(0, 2**32 - 1))
def test_pairing_is_a_partial_matching(seed):
    items = random_complex(np.random.default_rng(seed))
    cx = FilteredComplex.from_simplices(items)
    pp = pair_simplices(cx)
    idx = pp.index
    for pairs, ess in ((pp.h0, pp.h0_essential), (pp.h1, pp.h1_essential)):
        creators = np.concatenate([pairs[:, 0], ess])
        assert len(set(creators.tolist())) == len(creators)
        assert len(set(pairs[:, 1].tolist())) == len(pairs)
    assert np.all(idx.edge_values[pp.h0[:, 1]] >= idx.vertex_values[pp.h0[:, 0]])
    assert np.all(idx.tri_values[pp.h1[:, 1]] >= idx.edge_values[pp.h1[:, 0]])
    # an edge cannot both kill a component and create a loop
    assert not set(pp.h0[:, 1].tolist()) & set(pp.h1[:, 0].tolist())


@given(st.integers(0, 2**32 - 1))
def test_h0_fast_path_agrees(seed):
    cx = FilteredComplex.from_simplices(random_complex(np.random.default_rng(seed)))
    full = compute_persistence(cx)
    fast = h0_union_find(cx)
    assert np.array_equal(full.pairs(0), fast.pairs(0))
    assert np.array_equal(full.infinite_births(0), fast.infinite_births(0))


@given(st.integers(2, 40).flatmap(lambda n: arrays(np.float64, (n, 2), elements=st.floats(-5, 5))))
def test_h0_deaths_are_mst_weights(pts):
    cx = build_rips(PointCloud(pts), RipsConfig(100.0, 1))
    d = compute_persistence(cx, ReductionOptions(dims=(0,), drop_zero_persistence=False))
    deaths = np.sort(d.pairs(0).sum(axis=1))
    np.testing.assert_allclose(deaths, np.sort(kruskal_weights(pts)), rtol=0, atol=1e-9)


@given(arrays(np.float64, (6, 2), elements=st.floats(-5, 5)), st.floats(0.1, 5))
def test_truncated_rips_keeps_short_mst_edges(pts, eps):
    d = compute_persistence(build_rips(PointCloud(pts), RipsConfig(eps, 1)), ReductionOptions(dims=(0,), drop_zero_persistence=False))
    expected = [w for w in kruskal_weights(pts) if w <= eps]
    np.testing.assert_allclose(np.sort(d.pairs(0).sum(axis=1)), np.sort(expected), atol=1e-9)
    assert len(d.infinite_births(0)) == len(pts) - len(expected)


@given(st.integers(0, 2**32 - 1))
def test_component_counting(seed):
    cx = FilteredComplex.from_simplices(random_complex(np.random.default_rng(seed)))
    d = compute_persistence(cx, KEEP_ZERO)
    assert len(d.pairs(0)) + len(d.infinite_births(0)) == cx.n_vertices


@given(
    st.tuples(st.integers(1, 12), st.integers(1, 12)).flatmap(
        lambda rc: arrays(np.float64, rc, elements=st.integers(0, 9).map(float))
    ),
    st.integers(-20, 20),
)
def test_lower_star_shift_covariance(g, c):
    a = compute_persistence(build_lower_star(g))
    b = compute_persistence(build_lower_star(g + c))
    for dim in (0, 1):
        pa, pb = a.pairs(dim), b.pairs(dim)
        assert pa.shape == pb.shape
        np.testing.assert_allclose(pb[:, 0], pa[:, 0] + c, atol=1e-12)
        np.testing.assert_allclose(pb[:, 1], pa[:, 1], atol=1e-12)
        np.testing.assert_allclose(b.infinite_births(dim), a.infinite_births(dim) + c, atol=1e-12)


@given(
    st.tuples(st.integers(1, 4), st.integers(1, 4)).flatmap(
        lambda rc: arrays(np.float64, rc, elements=st.integers(0, 5).map(float))
    )
)
def test_lower_star_matches_boundary_reduction(g):
    cx = build_lower_star(g)
    items = [(tuple(s.vertices), s.filtration_value) for s in cx.simplices]
    finite, essential = boundary_reduction(items)
    g_fin, g_ess = as_counters(compute_persistence(cx, KEEP_ZERO))
    assert g_fin == oracle_tilted(finite)
    assert g_ess == essential
