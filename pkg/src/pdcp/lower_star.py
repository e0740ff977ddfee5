"""Lower-star (sublevel set) filtration of a scalar grid.

Pixels are vertices with row-major ids.  Each unit square is split by its
top-left to bottom-right diagonal (Freudenthal triangulation), so every
simplex enters at the largest value among its pixels.
"""
import numpy as np

from .types import FilteredComplex, ScalarGrid

# direction of the single diagonal drawn in every unit square
DIAGONAL = "main"


def grid_simplices(rows: int, cols: int):
    """Vertex tables of the triangulated grid: (edges (E, 2), triangles (T, 3))."""
    ids = np.arange(rows * cols, dtype=np.int64).reshape(rows, cols)
    parts = [
        np.stack([ids[:, :-1].ravel(), ids[:, 1:].ravel()], axis=1),  # horizontal
        np.stack([ids[:-1, :].ravel(), ids[1:, :].ravel()], axis=1),  # vertical
        np.stack([ids[:-1, :-1].ravel(), ids[1:, 1:].ravel()], axis=1),  # diagonal
    ]
    edges = np.concatenate(parts, axis=0)
    tl, tr = ids[:-1, :-1].ravel(), ids[:-1, 1:].ravel()
    bl, br = ids[1:, :-1].ravel(), ids[1:, 1:].ravel()
    # ids are row-major so tl < tr < bl < br whenever rows, cols >= 2
    tris = np.concatenate(
        [np.stack([tl, tr, br], axis=1), np.stack([tl, bl, br], axis=1)], axis=0
    )
    return edges, tris


def build_lower_star(grid: ScalarGrid) -> FilteredComplex:
    """Filtered complex whose prefixes are the sublevel sets of the grid."""
    if not isinstance(grid, ScalarGrid):
        grid = ScalarGrid(grid)
    f = grid.values.ravel()
    n = f.shape[0]
    edges, tris = grid_simplices(grid.rows, grid.cols)

    verts = np.full((n + len(edges) + len(tris), 3), -1, dtype=np.int64)
    verts[:n, 0] = np.arange(n)
    verts[n : n + len(edges), :2] = edges
    verts[n + len(edges) :, :] = tris
    edge_vals = np.maximum(f[edges[:, 0]], f[edges[:, 1]])
    tri_vals = np.maximum(np.maximum(f[tris[:, 0]], f[tris[:, 1]]), f[tris[:, 2]])
    vals = np.concatenate([f, edge_vals, tri_vals])
    return FilteredComplex(verts, vals)
