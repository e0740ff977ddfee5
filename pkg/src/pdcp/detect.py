"""Online scan detector over a stream of histogram distributions.

For a candidate change time k the four windows of ``w`` frames

    (k-2w, k-w], (k-w, k], (k, k+w], (k+w, k+2w]

give estimates omega, omega', xi, xi' and the statistic

    chi_k = sum_m sigma_m (omega_m - xi_m) (omega'_m - xi'_m).

chi_k depends only on those 4w frames, so it is computed once, when frame
k + 2w arrives, and the detector keeps a sliding set of candidates no older
than the lookback.  Time t counts observed frames starting at 1; k is the
number of frames before the candidate change.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .summarize import normalize_mass


class CalibrationError(ValueError):
    pass


def chi_statistic(omega, omega2, xi, xi2, sigma) -> float:
    """Weighted bilinear divergence between two pairs of distributions.

    Not symmetric in sign: the value is negative when the two group
    differences point in opposite directions.
    """
    vecs = [np.asarray(v, dtype=np.float64).reshape(-1) for v in (omega, omega2, xi, xi2, sigma)]
    if len({v.size for v in vecs}) != 1:
        raise ValueError("dimension mismatch")
    return float(_chi(*[v[None, :] for v in vecs[:4]], vecs[4])[0])


def _chi(om, om2, xi, xi2, sigma):
    # summed bin by bin, in order, so the result does not depend on vectorisation
    acc = np.zeros(om.shape[:-1])
    for m in range(sigma.shape[0]):
        acc += sigma[m] * (om[..., m] - xi[..., m]) * (om2[..., m] - xi2[..., m])
    return acc


def candidate_chis(frames: np.ndarray, w: int, sigma: np.ndarray, pool_raw_mass: bool = False) -> np.ndarray:
    """chi_k for every candidate with all four windows inside ``frames``.

    ``frames`` has shape (..., n, M); the result has shape (..., n - 4w + 1)
    and entry i belongs to the candidate whose first window starts at frame
    i (so k = i + 2w in the 1-based time of ``frames``).
    """
    frames = np.asarray(frames, dtype=np.float64)
    n = frames.shape[-2]
    n_cand = n - 4 * w + 1
    if n_cand <= 0:
        return np.zeros(frames.shape[:-2] + (0,))
    idx = np.arange(n_cand)
    est = []
    for offset in range(4):
        starts = idx + offset * w
        # gather (..., n_cand, w, M) then add frames in order
        win = frames[..., starts[:, None] + np.arange(w)[None, :], :]
        total = win[..., 0, :].copy()
        for j in range(1, w):
            total += win[..., j, :]
        est.append(normalize_mass(total) if pool_raw_mass else total / w)
    return _chi(est[0], est[1], est[2], est[3], np.asarray(sigma, dtype=np.float64))


@dataclass(frozen=True)
class DetectorConfig:
    window: int
    lookback: float | None = None
    threshold: float = math.inf
    sigma: np.ndarray | None = None
    pool_raw_mass: bool = False

    def __post_init__(self):
        if int(self.window) != self.window or self.window < 1:
            raise ValueError("window must be a positive integer")
        lookback = 8 * self.window if self.lookback is None else self.lookback
        if lookback < 4 * self.window:
            raise ValueError("lookback must be at least four windows")
        if math.isnan(self.threshold):
            raise ValueError("threshold must be a number")
        object.__setattr__(self, "window", int(self.window))
        object.__setattr__(self, "lookback", lookback)
        if self.sigma is not None:
            sg = np.array(self.sigma, dtype=np.float64).reshape(-1)
            if np.any(sg < 0) or not np.all(np.isfinite(sg)):
                raise ValueError("weights must be finite and nonnegative")
            object.__setattr__(self, "sigma", sg)

    def with_threshold(self, threshold: float) -> "DetectorConfig":
        return DetectorConfig(self.window, self.lookback, threshold, self.sigma, self.pool_raw_mass)


@dataclass
class StepResult:
    t: int
    chi_max: float
    k_hat: int | None
    alarm: bool
    alarmed_at: int | None

    @property
    def has_candidate(self) -> bool:
        return self.k_hat is not None


@dataclass
class ScanDetector:
    """Sequential detector; feed one distribution per frame through :meth:`step`."""

    cfg: DetectorConfig
    t: int = 0
    alarmed_at: int | None = None
    last_chi_max: float = -math.inf
    last_k_hat: int | None = None
    history: deque = field(init=False, repr=False)
    candidates: deque = field(init=False, repr=False)
    _M: int | None = field(default=None, init=False, repr=False)

    def __post_init__(self):
        self.history = deque(maxlen=4 * self.cfg.window)
        self.candidates = deque()

    def step(self, dist) -> StepResult:
        x = np.asarray(dist, dtype=np.float64).reshape(-1)
        if self._M is None:
            if self.cfg.sigma is not None and self.cfg.sigma.size != x.size:
                raise ValueError("dimension mismatch")
            self._M = x.size
        elif x.size != self._M:
            raise ValueError("dimension mismatch")
        if not np.all(np.isfinite(x)):
            raise ValueError("distribution has non-finite entries")
        w = self.cfg.window
        self.t += 1
        self.history.append(x)
        if len(self.history) == 4 * w:
            sigma = self.cfg.sigma if self.cfg.sigma is not None else np.ones(self._M)
            chi = candidate_chis(np.stack(self.history), w, sigma, self.cfg.pool_raw_mass)[0]
            self.candidates.append((self.t - 2 * w, float(chi)))
        oldest = max(0, self.t - self.cfg.lookback) + 2 * w
        while self.candidates and self.candidates[0][0] < oldest:
            self.candidates.popleft()

        chi_max, k_hat = -math.inf, None
        for k, chi in self.candidates:
            if chi > chi_max:
                chi_max, k_hat = chi, k
        alarm = k_hat is not None and chi_max >= self.cfg.threshold
        if alarm and self.alarmed_at is None:
            self.alarmed_at = self.t
        self.last_chi_max, self.last_k_hat = chi_max, k_hat
        return StepResult(self.t, chi_max, k_hat, bool(alarm), self.alarmed_at)

    def scan(self) -> tuple[np.ndarray, np.ndarray]:
        """Current admissible candidates and their statistics."""
        if not self.candidates:
            return np.zeros(0, dtype=np.int64), np.zeros(0)
        ks, chis = zip(*self.candidates)
        return np.array(ks), np.array(chis)


def run_detector(stream, cfg: DetectorConfig) -> list[StepResult]:
    det = ScanDetector(cfg)
    return [det.step(x) for x in stream]


def scan_maxima(chis: np.ndarray, w: int, lookback: float, n: int) -> np.ndarray:
    """chi_t^max for t = 1..n from precomputed candidate statistics (last axis)."""
    out = np.full(chis.shape[:-1] + (n,), -math.inf)
    for t in range(4 * w, n + 1):
        lo = max(0, t - lookback) + 2 * w
        # candidate k sits at column k - 2w
        first, last = int(lo) - 2 * w, t - 4 * w
        if first <= last:
            out[..., t - 1] = chis[..., first : last + 1].max(axis=-1)
    return out


def circular_block_indices(n: int, length: int, block: int, rng) -> np.ndarray:
    n_blocks = -(-length // block)
    starts = rng.integers(n, n_blocks)
    idx = (starts[:, None] + np.arange(block)[None, :]) % n
    return idx.reshape(-1)[:length]


def calibrate_threshold(
    pre_change,
    cfg: DetectorConfig,
    alpha: float,
    horizon: int,
    replicates: int = 200,
    seed: int = 0,
    return_maxima: bool = False,
):
    """Threshold whose simulated false-alarm probability over ``horizon`` is about ``alpha``.

    Null streams are circular block bootstraps (block length 2w) of the
    pre-change distributions.  Returns the ceil((1 - alpha) R)-th smallest of
    the per-replicate maxima of chi_t^max (index clamped to at least 1).
    """
    from .synth import PortableRNG

    pre = np.asarray(pre_change, dtype=np.float64)
    w = cfg.window
    if pre.ndim != 2 or pre.shape[0] < 4 * w:
        raise CalibrationError("training prefix too short")
    if not 0 < alpha <= 1:
        raise ValueError("alpha must lie in (0, 1]")
    if horizon < 4 * w:
        raise ValueError("horizon shorter than the four-window layout")
    if replicates < 1:
        raise ValueError("need at least one replicate")
    sigma = cfg.sigma if cfg.sigma is not None else np.ones(pre.shape[1])

    rng = PortableRNG(seed)
    idx = np.stack([circular_block_indices(len(pre), horizon, 2 * w, rng) for _ in range(replicates)])
    streams = pre[idx]  # (R, horizon, M)
    chis = candidate_chis(streams, w, sigma, cfg.pool_raw_mass)
    maxima = scan_maxima(chis, w, cfg.lookback, horizon).max(axis=-1)
    order = np.sort(maxima)
    rank = max(math.ceil((1 - alpha) * replicates - 1e-12), 1)
    b = float(order[rank - 1])
    return (b, maxima) if return_maxima else b
