"""Persistence histograms over the birth axis.

A diagram becomes an M-vector: the birth axis is cut at fixed breakpoints
and each bin collects the persistence of the features born in it.  The
breakpoints are persistence-weighted quantiles of a training pool, so every
bin holds roughly the same persistence mass on the training data.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .types import PersistenceDiagram

MODEL_VERSION = 1
VARIANCE_FLOOR = 1e-6
MIN_INVVAR_FRAMES = 8


class TrainingError(ValueError):
    pass


@dataclass(frozen=True)
class HistogramModel:
    breakpoints: np.ndarray
    sigma: np.ndarray
    trained_dim: int = 0
    training_frames: int = 1
    include_infinite: bool = False
    version: int = MODEL_VERSION

    def __post_init__(self):
        bp = np.array(self.breakpoints, dtype=np.float64).reshape(-1)
        sg = np.array(self.sigma, dtype=np.float64).reshape(-1)
        if sg.size < 2 or bp.size != sg.size - 1:
            raise ValueError("need M >= 2 weights and M - 1 breakpoints")
        if not np.all(np.isfinite(bp)) or np.any(np.diff(bp) <= 0):
            raise ValueError("breakpoints must be finite and strictly increasing")
        if not np.all(np.isfinite(sg)) or np.any(sg < 0):
            raise ValueError("weights must be finite and nonnegative")
        bp.setflags(write=False)
        sg.setflags(write=False)
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "sigma", sg)

    @property
    def M(self) -> int:
        return self.sigma.size

    def to_json(self) -> str:
        doc = {
            "version": self.version,
            "M": self.M,
            "breakpoints": self.breakpoints.tolist(),
            "sigma": self.sigma.tolist(),
            "trained_dim": self.trained_dim,
            "training_frames": self.training_frames,
        }
        if self.include_infinite:
            doc["include_infinite"] = True
        return _dump_exact(doc) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "HistogramModel":
        doc = json.loads(text)
        if doc.get("version") != MODEL_VERSION:
            raise ValueError(f"unsupported model version {doc.get('version')!r}")
        model = cls(
            breakpoints=[float(x) for x in doc["breakpoints"]],
            sigma=[float(x) for x in doc["sigma"]],
            trained_dim=int(doc["trained_dim"]),
            training_frames=int(doc["training_frames"]),
            include_infinite=bool(doc.get("include_infinite", False)),
        )
        if model.M != int(doc["M"]):
            raise ValueError("M does not match the number of weights")
        return model


def fmt_real(x: float) -> str:
    """17 significant digits: enough for an exact decimal round trip."""
    x = float(x)
    if math.isnan(x) or math.isinf(x):
        raise ValueError("non-finite value cannot be serialised")
    return format(x, ".17g")


def _dump_exact(obj) -> str:
    # json.dumps would use the shortest repr; the file format pins 17 digits
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return fmt_real(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(k)}: {_dump_exact(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_dump_exact(v) for v in obj) + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _features(diagram: PersistenceDiagram, dim: int, include_infinite: bool):
    pairs = diagram.pairs(dim)
    births, pers = pairs[:, 0], pairs[:, 1]
    if include_infinite and diagram.max_value is not None:
        inf_b = diagram.infinite_births(dim)
        births = np.concatenate([births, inf_b])
        pers = np.concatenate([pers, diagram.max_value - inf_b])
    return births, pers


def weighted_breakpoints(births: np.ndarray, mass: np.ndarray, M: int) -> np.ndarray:
    """Interior breakpoints splitting ``mass`` (placed at ``births``) into M near-equal parts.

    For target m/M of the total, find the first distinct birth where the
    cumulative mass reaches the target; the breakpoint is the next distinct
    birth, so that birth closes its bin.  With no later birth the atom
    itself is used.  When several targets land on the same breakpoint the
    earlier copies are moved down one ulp at a time, which keeps the
    breakpoints strictly increasing and leaves the extra bins empty.
    """
    keep = mass > 0
    births, mass = births[keep], mass[keep]
    atoms, inv = np.unique(births, return_inverse=True)
    atom_mass = np.bincount(inv.reshape(-1), weights=mass, minlength=atoms.size)
    cum = np.cumsum(atom_mass)
    total = cum[-1]
    out = np.empty(M - 1)
    for m in range(1, M):
        i = int(np.searchsorted(cum, m / M * total, side="left"))
        i = min(i, atoms.size - 1)
        out[m - 1] = atoms[i + 1] if i + 1 < atoms.size else atoms[i]
    for m in range(M - 3, -1, -1):
        if out[m] >= out[m + 1]:
            out[m] = np.nextafter(out[m + 1], -np.inf)
    # only reachable when births sit on adjacent floats
    for m in range(1, M - 1):
        if out[m] <= out[m - 1]:
            out[m] = np.nextafter(out[m - 1], np.inf)
    return out


def train_breakpoints(
    training: Sequence[PersistenceDiagram],
    M: int,
    dim: int = 0,
    sigma: str = "identity",
    include_infinite: bool = False,
) -> HistogramModel:
    """Fit breakpoints (and optionally weights) on pre-change diagrams.

    ``sigma="invvar"`` weights each bin by the inverse variance of its
    normalised mass across the training frames (needs at least 8 frames).
    """
    if M < 2:
        raise TrainingError("invalid bin count")
    if sigma not in ("identity", "invvar"):
        raise ValueError(f"unknown weighting {sigma!r}")
    training = list(training)
    if training:
        feats = [_features(d, dim, include_infinite) for d in training]
        births = np.concatenate([f[0] for f in feats])
        mass = np.concatenate([f[1] for f in feats])
    else:
        births = mass = np.zeros(0)
    if not np.any(mass > 0):
        raise TrainingError("no training mass")

    bp = weighted_breakpoints(births, mass, M)
    weights = np.ones(M)
    model = HistogramModel(bp, weights, dim, len(training), include_infinite)
    if sigma == "invvar":
        if len(training) < MIN_INVVAR_FRAMES:
            raise TrainingError(
                f"inverse-variance weights need at least {MIN_INVVAR_FRAMES} training frames"
            )
        dists = np.stack([bin_diagram(d, model) for d in training])
        var = np.maximum(dists.var(axis=0), VARIANCE_FLOOR)
        model = HistogramModel(bp, 1.0 / var, dim, len(training), include_infinite)
    return model


def bin_diagram(diagram: PersistenceDiagram, model: HistogramModel, normalize: bool = True) -> np.ndarray:
    """Per-bin persistence mass of ``diagram``; bins are left-closed.

    Normalised output sums to one; a diagram without mass maps to the
    uniform vector.
    """
    births, pers = _features(diagram, model.trained_dim, model.include_infinite)
    bins = np.searchsorted(model.breakpoints, births, side="right")
    raw = np.bincount(bins, weights=pers, minlength=model.M).astype(np.float64)
    if not normalize:
        return raw
    return normalize_mass(raw)


def normalize_mass(raw: np.ndarray) -> np.ndarray:
    total = raw.sum(axis=-1, keepdims=True)
    safe = np.where(total > 0, total, 1.0)
    uniform = np.full_like(raw, 1.0 / raw.shape[-1])
    return np.where(total > 0, raw / safe, uniform)
