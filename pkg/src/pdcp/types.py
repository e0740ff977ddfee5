"""Shared domain types: inputs, filtered complexes and persistence diagrams.

Simplicial complexes are stored array-backed (a padded vertex table plus a
value column) because a single image frame produces a few hundred thousand
simplices; per-simplex Python objects are only materialised on request.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import _kernels


class InputError(ValueError):
    """Raised for malformed user data (empty frames, non-finite values, ...)."""


class FiltrationError(ValueError):
    """Raised when a complex does not describe a valid filtration."""


@dataclass(frozen=True)
class PointCloud:
    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1) if pts.size else pts.reshape(0, 1)
        if pts.ndim != 2:
            raise InputError("points must be a 2-d array (n, d)")
        if pts.shape[0] == 0:
            raise InputError("empty input")
        if pts.shape[1] < 1:
            raise InputError("points must have dimension >= 1")
        if not np.all(np.isfinite(pts)):
            raise InputError("invalid coordinate")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    def __len__(self):
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]


@dataclass(frozen=True)
class ScalarGrid:
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.ndim == 1:
            vals = vals.reshape(1, -1)
        if vals.ndim != 2 or vals.size == 0:
            raise InputError("empty input")
        if not np.all(np.isfinite(vals)):
            raise InputError("invalid pixel value")
        vals = np.ascontiguousarray(vals)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_flat(cls, rows: int, cols: int, values: Sequence[float]) -> "ScalarGrid":
        vals = np.asarray(values, dtype=np.float64)
        if rows < 1 or cols < 1 or vals.size == 0:
            raise InputError("empty input")
        if vals.size != rows * cols:
            raise InputError(f"expected {rows * cols} values, got {vals.size}")
        return cls(vals.reshape(rows, cols))

    @property
    def rows(self) -> int:
        return self.values.shape[0]

    @property
    def cols(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class Simplex:
    vertices: tuple
    filtration_value: float

    def __post_init__(self):
        vs = tuple(int(v) for v in self.vertices)
        if not 1 <= len(vs) <= 3:
            raise ValueError("only vertices, edges and triangles are supported")
        if any(a >= b for a, b in zip(vs, vs[1:])):
            raise ValueError(f"vertices must be strictly increasing: {vs}")
        if not np.isfinite(self.filtration_value):
            raise ValueError("filtration value must be finite")
        object.__setattr__(self, "vertices", vs)
        object.__setattr__(self, "filtration_value", float(self.filtration_value))

    @property
    def dim(self) -> int:
        return len(self.vertices) - 1


def _canonical_order(verts: np.ndarray, dims: np.ndarray, vals: np.ndarray) -> np.ndarray:
    """Permutation sorting rows by (value, dimension, vertex tuple)."""
    m = len(vals)
    base = int(verts.max()) + 2
    if 3 * base**3 >= 2**62 or m >= 2**31:
        return np.lexsort((verts[:, 2], verts[:, 1], verts[:, 0], dims, vals))
    # pack (dim, v0, v1, v2) into one integer; padding -1 maps to 0
    shifted = verts + 1
    key = ((dims.astype(np.int64) * base + shifted[:, 0]) * base + shifted[:, 1]) * base + shifted[:, 2]
    if np.all(key[1:] > key[:-1]):
        key_rank = np.arange(m)  # builders emit rows in key order already
    else:
        key_rank = np.empty(m, dtype=np.int64)
        key_rank[np.argsort(key)] = np.arange(m)
    by_val = np.argsort(vals)
    sv = vals[by_val]
    group = np.empty(m, dtype=np.int64)
    group[by_val] = np.cumsum(np.r_[True, sv[1:] != sv[:-1]]) - 1
    # unstable sorts are safe: the combined key is unique for distinct simplices
    return np.argsort(group * m + key_rank)


class FilteredComplex:
    """A filtration realised as one ordered list of simplices.

    Rows of ``vertices`` hold up to three sorted vertex ids padded with -1;
    ``values`` holds filtration values.  Rows are kept in the canonical
    order (value, dimension, vertex tuple) unless ``presorted`` is passed
    for data the caller has already ordered.
    """

    def __init__(self, vertices, values, *, presorted: bool = False):
        verts = np.asarray(vertices, dtype=np.int64).reshape(-1, 3)
        vals = np.asarray(values, dtype=np.float64).reshape(-1)
        if verts.shape[0] != vals.shape[0]:
            raise ValueError("vertices and values must have the same length")
        dims = (verts[:, 1] >= 0).astype(np.int8) + (verts[:, 2] >= 0)
        if not presorted and verts.shape[0] > 1:
            order = _canonical_order(verts, dims, vals)
            verts, vals, dims = verts.take(order, axis=0), vals.take(order), dims.take(order)
        for a in (verts, vals, dims):
            a.setflags(write=False)
        self.vertices = verts
        self.values = vals
        self.dims = dims

    @classmethod
    def from_simplices(cls, simplices: Iterable[Simplex | tuple], *, presorted: bool = False):
        """Build from ``Simplex`` objects or ``(vertex_tuple, value)`` pairs."""
        rows, vals = [], []
        for s in simplices:
            if not isinstance(s, Simplex):
                s = Simplex(*s)
            rows.append(s.vertices + (-1,) * (3 - len(s.vertices)))
            vals.append(s.filtration_value)
        return cls(np.array(rows, dtype=np.int64).reshape(-1, 3), vals, presorted=presorted)

    def __len__(self):
        return self.values.shape[0]

    def __iter__(self):
        return iter(self.simplices)

    @property
    def simplices(self) -> list[Simplex]:
        return [
            Simplex(tuple(int(v) for v in row if v >= 0), float(val))
            for row, val in zip(self.vertices, self.values)
        ]

    @property
    def n_vertices(self) -> int:
        return int(np.count_nonzero(self.dims == 0))

    def count(self, dim: int) -> int:
        return int(np.count_nonzero(self.dims == dim))

    def of_dim(self, dim: int) -> tuple[np.ndarray, np.ndarray]:
        """Vertex table (n, dim+1) and values of the dim-simplices, in filtration order."""
        mask = self.dims == dim
        return self.vertices[mask, : dim + 1], self.values[mask]

    def value_multiset(self) -> list[tuple[int, float]]:
        return sorted(zip(self.dims.tolist(), self.values.tolist()))

    def __repr__(self):
        return (
            f"FilteredComplex(V={self.count(0)}, E={self.count(1)}, T={self.count(2)})"
        )


@dataclass
class FaceIndex:
    """Per-dimension ordering of a complex plus face lookups.

    ``vertex_rank[v]`` is the filtration position of vertex ``v`` among
    vertices; ``edge_vertices`` holds those ranks for each edge and
    ``tri_edges`` the edge positions of each triangle (-1 if missing).
    """

    vertex_ids: np.ndarray
    vertex_values: np.ndarray
    vertex_rank: np.ndarray
    edge_vertices: np.ndarray
    edge_values: np.ndarray
    tri_edges: np.ndarray
    tri_values: np.ndarray
    edge_missing_vertex: np.ndarray = field(repr=False)


class _Relabeled(FilteredComplex):
    def __init__(self, vertices, values, dims):
        self.vertices, self.values, self.dims = vertices, values, dims


def face_index(cx: FilteredComplex) -> FaceIndex:
    vids, vvals = cx.of_dim(0)
    vids = vids[:, 0]
    evs, evals = cx.of_dim(1)
    tvs, tvals = cx.of_dim(2)

    n_id = int(cx.vertices.max()) + 1 if len(cx) else 0
    if n_id > 4 * len(cx) + 16:
        # sparse ids: relabel densely so lookup tables stay small
        ids, inv = np.unique(cx.vertices, return_inverse=True)
        inv = inv.reshape(cx.vertices.shape) - int(ids[0] < 0)
        inv[cx.vertices < 0] = -1
        relabeled = _Relabeled(inv, cx.values, cx.dims)
        return face_index(relabeled)
    vertex_rank = np.full(max(n_id, 1), -1, dtype=np.int64)
    vertex_rank[vids] = np.arange(len(vids))
    if evs.size:
        edge_vertices = vertex_rank[evs]
    else:
        edge_vertices = np.zeros((0, 2), dtype=np.int64)

    if tvs.size:
        tri_edges = _kernels.face_lookup(
            n_id, np.ascontiguousarray(evs).reshape(-1, 2), np.ascontiguousarray(tvs)
        )
    else:
        tri_edges = np.zeros((0, 3), dtype=np.int64)
    return FaceIndex(
        vertex_ids=vids,
        vertex_values=vvals,
        vertex_rank=vertex_rank,
        edge_vertices=edge_vertices,
        edge_values=evals,
        tri_edges=tri_edges,
        tri_values=tvals,
        edge_missing_vertex=(edge_vertices < 0).any(axis=1) if evs.size else np.zeros(0, bool),
    )


def _sort_violation(cx: FilteredComplex) -> str | None:
    if len(cx) < 2:
        return None
    i, code = _kernels.first_order_violation(cx.values, cx.dims, cx.vertices)
    if code == 1:
        return f"sort order: simplex {i + 1} precedes simplex {i} in the ordering key"
    if code == 2:
        return f"sort order: duplicate simplex at position {i + 1}"
    return None


def _basic_violation(cx: FilteredComplex) -> str | None:
    if not np.all(np.isfinite(cx.values)):
        return "finite values: non-finite filtration value"
    v = cx.vertices
    if v.size and np.any((v < 0) & (cx.dims[:, None] >= np.arange(3))):
        return "vertex ids: negative vertex id"
    for d in (1, 2):
        rows = v[cx.dims == d]
        if rows.size and np.any(rows[:, 0:d] >= rows[:, 1 : d + 1]):
            return f"vertex order: dimension-{d} simplex with unsorted vertices"
    if len(np.unique(cx.vertices[cx.dims == 0, 0])) != cx.count(0):
        return "sort order: duplicate vertex"
    return None


def validate(cx: FilteredComplex, index: FaceIndex | None = None) -> str | None:
    """Check face closure, monotonicity and sort order, in that order.

    Returns ``None`` for a valid filtration, otherwise a description of the
    first violated invariant (prefixed by its name).
    """
    problem = _basic_violation(cx)
    if problem is not None:
        return problem
    idx = face_index(cx) if index is None else index

    if idx.edge_missing_vertex.any():
        e = int(np.flatnonzero(idx.edge_missing_vertex)[0])
        edge = cx.of_dim(1)[0][e]
        return f"face closure: edge {tuple(edge.tolist())} has a missing vertex"
    if idx.tri_edges.size and np.any(idx.tri_edges < 0):
        t = int(np.flatnonzero((idx.tri_edges < 0).any(axis=1))[0])
        tri = cx.of_dim(2)[0][t]
        return f"face closure: triangle {tuple(tri.tolist())} has a missing edge"

    if idx.edge_values.size:
        face_max = idx.vertex_values[idx.edge_vertices].max(axis=1)
        bad = face_max > idx.edge_values
        if bad.any():
            e = int(np.flatnonzero(bad)[0])
            edge = cx.of_dim(1)[0][e]
            return f"monotonicity: edge {tuple(edge.tolist())} enters before one of its vertices"
    if idx.tri_values.size:
        face_max = idx.edge_values[idx.tri_edges].max(axis=1)
        bad = face_max > idx.tri_values
        if bad.any():
            t = int(np.flatnonzero(bad)[0])
            tri = cx.of_dim(2)[0][t]
            return f"monotonicity: triangle {tuple(tri.tolist())} enters before one of its edges"

    return _sort_violation(cx)


@dataclass(frozen=True)
class PersistencePair:
    dim: int
    birth: float
    persistence: float

    @property
    def death(self) -> float:
        return self.birth + self.persistence


@dataclass
class PersistenceDiagram:
    """Tilted diagram: finite features as (birth, persistence) per dimension.

    ``finite[d]`` is an (n, 2) float array; ``infinite[d]`` the births of
    features that never die within the complex.
    """

    frame_index: int = 0
    finite: dict = field(default_factory=dict)
    infinite: dict = field(default_factory=dict)
    # largest filtration value of the source complex, if known
    max_value: float | None = None

    def __post_init__(self):
        self.finite = {
            int(d): np.asarray(p, dtype=np.float64).reshape(-1, 2) for d, p in self.finite.items()
        }
        self.infinite = {
            int(d): np.asarray(b, dtype=np.float64).reshape(-1) for d, b in self.infinite.items()
        }

    @property
    def dims(self) -> list[int]:
        return sorted(set(self.finite) | set(self.infinite))

    def pairs(self, dim: int) -> np.ndarray:
        return self.finite.get(dim, np.zeros((0, 2)))

    def infinite_births(self, dim: int) -> np.ndarray:
        return self.infinite.get(dim, np.zeros(0))

    @property
    def finite_pairs(self) -> list[PersistencePair]:
        return [
            PersistencePair(d, float(b), float(p))
            for d in sorted(self.finite)
            for b, p in self.finite[d]
        ]

    def total_persistence(self, dim: int) -> float:
        return float(self.pairs(dim)[:, 1].sum())

    def __eq__(self, other):
        if not isinstance(other, PersistenceDiagram):
            return NotImplemented
        if self.frame_index != other.frame_index or self.dims != other.dims:
            return False
        return all(
            np.array_equal(_canon(self.pairs(d)), _canon(other.pairs(d)))
            and np.array_equal(np.sort(self.infinite_births(d)), np.sort(other.infinite_births(d)))
            for d in self.dims
        )


def _canon(pairs: np.ndarray) -> np.ndarray:
    if len(pairs) == 0:
        return pairs
    return pairs[np.lexsort((pairs[:, 1], pairs[:, 0]))]
