"""Persistence diagrams (H0 and H1) of a filtered complex, in tilted form.

Dimension 0 is computed with an elder-rule union-find.  Dimension 1 comes
from reducing the coboundary matrix of the edges over Z/2, with the columns
of edges that already killed a component cleared up front.  Both give the
same pairs as the textbook boundary-matrix reduction on the complex's total
order.
"""
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .types import (
    FaceIndex,
    FilteredComplex,
    FiltrationError,
    PersistenceDiagram,
    _basic_violation,
    face_index,
    validate,
)


@dataclass(frozen=True)
class ReductionOptions:
    dims: tuple = (0, 1)
    drop_zero_persistence: bool = True
    check: bool = True

    def __post_init__(self):
        dims = tuple(sorted(set(int(d) for d in self.dims)))
        if not dims or any(d not in (0, 1) for d in dims):
            raise ValueError("dims must be a nonempty subset of {0, 1}")
        object.__setattr__(self, "dims", dims)


@dataclass
class PersistencePairs:
    """Raw pairing by filtration position within each dimension.

    ``h0`` pairs (vertex position, edge position); ``h1`` pairs (edge
    position, triangle position).  Essential features are listed by the
    position of their creator.
    """

    index: FaceIndex
    h0: np.ndarray
    h0_essential: np.ndarray
    h1: np.ndarray | None = None
    h1_essential: np.ndarray | None = None


def _prepare(cx: FilteredComplex, check: bool) -> FaceIndex:
    if check:
        problem = _basic_violation(cx)
        if problem is not None:
            raise FiltrationError(f"invalid filtration: {problem}")
    idx = face_index(cx)
    if check:
        problem = validate(cx, idx)
        if problem is not None:
            raise FiltrationError(f"invalid filtration: {problem}")
    return idx


def pair_simplices(cx: FilteredComplex, dims=(0, 1), check: bool = True) -> PersistencePairs:
    idx = _prepare(cx, check)
    n_vertices = len(idx.vertex_values)
    ev = np.ascontiguousarray(idx.edge_vertices, dtype=np.int64).reshape(-1, 2)
    births, deaths, negative = _kernels.union_find_h0(n_vertices, ev)
    survivors = np.ones(n_vertices, dtype=bool)
    survivors[births] = False
    out = PersistencePairs(
        index=idx,
        h0=np.stack([births, deaths], axis=1),
        h0_essential=np.flatnonzero(survivors),
    )
    if 1 in dims:
        indptr, indices = _kernels.coboundary_csr(len(idx.edge_values), idx.tri_edges)
        pe, pt, ess = _kernels.reduce_coboundary(indptr, indices, len(idx.tri_values), negative)
        out.h1 = np.stack([pe, pt], axis=1)
        out.h1_essential = np.sort(ess)
    return out


def _tilted(birth_vals, death_vals, drop_zero):
    pairs = np.stack([birth_vals, death_vals - birth_vals], axis=1)
    if drop_zero:
        pairs = pairs[pairs[:, 1] > 0]
    # canonical order: by birth, then persistence
    return pairs[np.lexsort((pairs[:, 1], pairs[:, 0]))]


def compute_persistence(
    cx: FilteredComplex, opts: ReductionOptions | None = None, frame_index: int = 0
) -> PersistenceDiagram:
    """Tilted persistence diagram (birth, death - birth) for the requested dimensions.

    Raises ``FiltrationError`` when ``cx`` fails :func:`validate`.
    """
    opts = opts or ReductionOptions()
    pp = pair_simplices(cx, opts.dims, opts.check)
    idx = pp.index
    finite, infinite = {}, {}
    if 0 in opts.dims:
        finite[0] = _tilted(
            idx.vertex_values[pp.h0[:, 0]], idx.edge_values[pp.h0[:, 1]], opts.drop_zero_persistence
        )
        infinite[0] = np.sort(idx.vertex_values[pp.h0_essential])
    if 1 in opts.dims:
        finite[1] = _tilted(
            idx.edge_values[pp.h1[:, 0]], idx.tri_values[pp.h1[:, 1]], opts.drop_zero_persistence
        )
        infinite[1] = np.sort(idx.edge_values[pp.h1_essential])
    max_value = float(cx.values.max()) if len(cx) else None
    return PersistenceDiagram(frame_index=frame_index, finite=finite, infinite=infinite, max_value=max_value)


def h0_union_find(
    cx: FilteredComplex, drop_zero_persistence: bool = True, check: bool = True, frame_index: int = 0
) -> PersistenceDiagram:
    """Dimension-0 diagram only; skips all triangle bookkeeping."""
    return compute_persistence(
        cx, ReductionOptions(dims=(0,), drop_zero_persistence=drop_zero_persistence, check=check), frame_index
    )
