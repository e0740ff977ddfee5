"""Seeded synthetic streams with known change points.

Random numbers
--------------
All draws come from Philox4x64-10 (Salmon et al., Random123), the
counter-based generator shipped as ``numpy.random.Philox``:

* key = (seed mod 2**64, seed >> 64), counter starts at zero;
* round multipliers 0xD2E7470EE14C6C93, 0xCA5A826395121157;
* key increments (Weyl) 0x9E3779B97F4A7C15, 0xBB67AE8584CAA73B;
* 10 rounds; each counter value yields four 64-bit words, consumed in order.

Only the raw 64-bit words are used.  Uniforms are ``(x >> 11) * 2**-53``;
normals use Box-Muller on consecutive uniform pairs (u1, u2):
``sqrt(-2 log1p(-u1)) * cos(2 pi u2)`` then ``... * sin(2 pi u2)``;
integers below n are ``floor(u * n)``.  Any language with a Philox4x64
implementation can regenerate the same streams bit for bit, up to libm
rounding in log/cos/sin.
"""
from __future__ import annotations

import math

import numpy as np

from .types import PointCloud, ScalarGrid

_MASK64 = (1 << 64) - 1


class PortableRNG:
    def __init__(self, seed: int):
        seed = int(seed)
        if seed < 0:
            raise ValueError("seed must be nonnegative")
        self._bitgen = np.random.Philox(key=[seed & _MASK64, (seed >> 64) & _MASK64])

    def raw(self, n: int) -> np.ndarray:
        return self._bitgen.random_raw(n)

    def uniform(self, size) -> np.ndarray:
        n = int(np.prod(size))
        u = (self.raw(n) >> np.uint64(11)).astype(np.float64) * 2.0**-53
        return u.reshape(size)

    def normal(self, size) -> np.ndarray:
        n = int(np.prod(size))
        u = self.uniform(2 * ((n + 1) // 2)).reshape(-1, 2)
        r = np.sqrt(-2.0 * np.log1p(-u[:, 0]))
        theta = 2.0 * math.pi * u[:, 1]
        z = np.stack([r * np.cos(theta), r * np.sin(theta)], axis=1).reshape(-1)
        return z[:n].reshape(size)

    def integers(self, n: int, size) -> np.ndarray:
        return np.floor(self.uniform(size) * n).astype(np.int64)


def sample_circles(n_points: int, centers, radius: float, noise_sd: float, seed: int) -> PointCloud:
    """Points spread uniformly over a union of equal circles, plus Gaussian jitter."""
    centers = np.asarray(centers, dtype=np.float64).reshape(-1, 2)
    if len(centers) == 0:
        raise ValueError("need at least one circle center")
    if n_points < 1 or radius <= 0 or noise_sd < 0:
        raise ValueError("invalid circle parameters")
    rng = PortableRNG(seed)
    which = rng.integers(len(centers), n_points)
    angle = 2.0 * math.pi * rng.uniform(n_points)
    pts = centers[which] + radius * np.stack([np.cos(angle), np.sin(angle)], axis=1)
    if noise_sd > 0:
        pts = pts + noise_sd * rng.normal((n_points, 2))
    return PointCloud(pts)


def _bump(rows, cols, center, width):
    r = np.arange(rows)[:, None] - center[0]
    c = np.arange(cols)[None, :] - center[1]
    return np.exp(-(r**2 + c**2) / (2.0 * width**2))


def gen_grid_stream(
    rows: int,
    cols: int,
    T: int,
    change_at: int,
    pre_blob_amp: float,
    post_blob_amp: float,
    noise_sd: float,
    seed: int,
    n_blobs: int = 3,
    blob_width: float | None = None,
    extra_blob_after: bool = False,
) -> list[ScalarGrid]:
    """T frames of fixed Gaussian bumps plus white pixel noise.

    Frames are numbered 1..T; frames before ``change_at`` use bump amplitude
    ``pre_blob_amp``, the rest ``post_blob_amp`` (and one more bump if
    ``extra_blob_after``).  The noise draws do not depend on the amplitudes,
    so two streams with the same seed share their pre-change frames exactly.
    """
    if rows < 1 or cols < 1 or T < 2:
        raise ValueError("invalid stream shape")
    if not 0 < change_at < T:
        raise ValueError("change_at must satisfy 0 < change_at < T")
    if n_blobs < 1 or noise_sd < 0:
        raise ValueError("invalid stream parameters")
    width = blob_width if blob_width is not None else max(rows, cols) / 4.0
    rng = PortableRNG(seed)
    # n_blobs + 1 centres are always drawn to keep the noise sequence fixed
    centers = rng.uniform((n_blobs + 1, 2)) * np.array([rows - 1, cols - 1])
    base = sum(_bump(rows, cols, c, width) for c in centers[:n_blobs])
    extra = _bump(rows, cols, centers[n_blobs], width)
    frames = []
    for i in range(1, T + 1):
        noise = rng.normal((rows, cols)) if noise_sd > 0 else 0.0
        if i < change_at:
            img = pre_blob_amp * base
        else:
            img = post_blob_amp * base
            if extra_blob_after:
                img = img + post_blob_amp * extra
        frames.append(ScalarGrid(img + noise_sd * noise))
    return frames


def gen_circle_stream(
    T: int,
    change_at: int,
    n_points: int = 60,
    pre_centers=((0.0, 0.0),),
    post_centers=((0.0, 0.0), (3.0, 0.0)),
    radius: float = 1.0,
    noise_sd: float = 0.05,
    seed: int = 0,
) -> list[PointCloud]:
    """Point-cloud frames whose circle layout switches at ``change_at`` (frames 1..T)."""
    if not 0 < change_at < T:
        raise ValueError("change_at must satisfy 0 < change_at < T")
    out = []
    for i in range(1, T + 1):
        centers = pre_centers if i < change_at else post_centers
        # one independent sub-seed per frame
        out.append(sample_circles(n_points, centers, radius, noise_sd, seed * 1_000_003 + i))
    return out
