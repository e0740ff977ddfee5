"""Vietoris-Rips filtration of a point cloud, truncated at ``eps_max``."""
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import pdist, squareform

from .types import FilteredComplex, InputError, PointCloud


@dataclass(frozen=True)
class RipsConfig:
    eps_max: float
    max_dim: int = 2

    def __post_init__(self):
        if not (self.eps_max > 0):
            raise ValueError("eps_max must be positive")
        if self.max_dim not in (1, 2):
            raise ValueError("max_dim must be 1 or 2")


def diameter(cloud: PointCloud) -> float:
    """Largest pairwise Euclidean distance (0 for a single point)."""
    if len(cloud) < 2:
        return 0.0
    return float(pdist(cloud.points).max())


def build_rips(cloud, cfg: RipsConfig) -> FilteredComplex:
    """Rips complex: vertices at 0, edges at their length, triangles at their longest edge.

    All pairwise distances are computed; no spatial index is used.
    """
    if not isinstance(cloud, PointCloud):
        pts = np.asarray(cloud, dtype=np.float64)
        if pts.size == 0:
            raise InputError("empty input")
        cloud = PointCloud(pts)
    n = len(cloud)
    dist = squareform(pdist(cloud.points)) if n > 1 else np.zeros((1, 1))
    adj = dist <= cfg.eps_max
    np.fill_diagonal(adj, False)

    iu, ju = np.nonzero(np.triu(adj, k=1))
    blocks_v = [np.stack([np.arange(n), -np.ones(n, int), -np.ones(n, int)], axis=1)]
    blocks_f = [np.zeros(n)]
    blocks_v.append(np.stack([iu, ju, -np.ones(len(iu), int)], axis=1))
    blocks_f.append(dist[iu, ju])

    if cfg.max_dim == 2 and len(iu):
        tri_v, tri_f = [], []
        for i, j in zip(iu, ju):
            # common neighbours above j close a triangle
            ks = np.flatnonzero(adj[i, j + 1 :] & adj[j, j + 1 :]) + j + 1
            if ks.size:
                tri_v.append(np.stack([np.full(ks.size, i), np.full(ks.size, j), ks], axis=1))
                tri_f.append(np.maximum(np.maximum(dist[i, j], dist[i, ks]), dist[j, ks]))
        if tri_v:
            blocks_v.append(np.concatenate(tri_v))
            blocks_f.append(np.concatenate(tri_f))
    return FilteredComplex(np.concatenate(blocks_v), np.concatenate(blocks_f))
