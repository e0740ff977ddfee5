"""File formats: PGM frames, CSV point clouds, diagram records, traces."""
from __future__ import annotations

import json
import math
import os
import re
from pathlib import Path
from typing import Iterable

import numpy as np

from .summarize import fmt_real
from .types import InputError, PersistenceDiagram, PointCloud, ScalarGrid

_PGM_TOKEN = re.compile(rb"#[^\n\r]*[\n\r]?|\S+")


def read_pgm(path) -> ScalarGrid:
    """Read a P2 (ASCII) or P5 (binary) graymap; sample values are kept unscaled."""
    data = Path(path).read_bytes()
    header, pos = [], 0
    # magic, width, height, maxval; comments may appear between tokens
    while len(header) < 4:
        m = _PGM_TOKEN.search(data, pos)
        if m is None:
            raise InputError("truncated PGM header")
        pos = m.end()
        if not m.group().startswith(b"#"):
            header.append(m.group())
    magic = header[0]
    if magic not in (b"P2", b"P5"):
        raise InputError(f"not a PGM file (magic {magic!r})")
    try:
        width, height, maxval = (int(x) for x in header[1:])
    except ValueError as exc:
        raise InputError("malformed PGM header") from exc
    if width < 1 or height < 1:
        raise InputError("empty input")
    if not 0 < maxval <= 65535:
        raise InputError(f"unsupported maxval {maxval}")
    n = width * height
    if magic == b"P5":
        body = data[pos + 1 :]  # exactly one whitespace byte after maxval
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
        if len(body) < n * dtype.itemsize:
            raise InputError("truncated PGM raster")
        vals = np.frombuffer(body, dtype=dtype, count=n)
    else:
        tokens = [t for t in _PGM_TOKEN.findall(data[pos:]) if not t.startswith(b"#")]
        if len(tokens) < n:
            raise InputError(f"expected {n} samples, found {len(tokens)}")
        try:
            vals = np.array([int(t) for t in tokens[:n]])
        except ValueError as exc:
            raise InputError("non-integer PGM sample") from exc
    if vals.max(initial=0) > maxval:
        raise InputError("sample exceeds maxval")
    return ScalarGrid(vals.astype(np.float64).reshape(height, width))


def write_pgm(path, values: np.ndarray, maxval: int = 65535, binary: bool = True) -> None:
    vals = np.asarray(values)
    if vals.ndim == 1:
        vals = vals.reshape(1, -1)
    if vals.min(initial=0) < 0 or vals.max(initial=0) > maxval:
        raise ValueError("values outside [0, maxval]")
    height, width = vals.shape
    head = f"{'P5' if binary else 'P2'}\n{width} {height}\n{maxval}\n".encode()
    if binary:
        dtype = ">u2" if maxval > 255 else "u1"
        body = vals.astype(dtype).tobytes()
    else:
        body = ("\n".join(" ".join(str(int(v)) for v in row) for row in vals) + "\n").encode()
    Path(path).write_bytes(head + body)


def read_points_csv(path) -> PointCloud:
    """One point per row, comma-separated coordinates, no header."""
    text = Path(path).read_text(encoding="utf-8")
    rows = [ln for ln in text.splitlines() if ln.strip()]
    if not rows:
        raise InputError("empty input")
    try:
        pts = [[float(c) for c in ln.split(",")] for ln in rows]
    except ValueError as exc:
        raise InputError(f"malformed coordinate: {exc}") from exc
    if len({len(p) for p in pts}) != 1:
        raise InputError("rows have inconsistent dimension")
    return PointCloud(np.array(pts))


def write_points_csv(path, cloud: PointCloud) -> None:
    lines = [",".join(fmt_real(c) for c in row) for row in cloud.points]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def list_frames(path, suffixes: Iterable[str]) -> list[Path]:
    """Frame files under ``path`` (or the file itself), by lexicographic file name."""
    p = Path(path)
    if p.is_file():
        return [p]
    if not p.is_dir():
        raise FileNotFoundError(f"no such file or directory: {path}")
    suffixes = tuple(s.lower() for s in suffixes)
    return sorted((f for f in p.iterdir() if f.is_file() and f.suffix.lower() in suffixes), key=lambda f: f.name)


def _dim_block(diagram: PersistenceDiagram, dim: int) -> str:
    finite = ", ".join(f"[{fmt_real(b)}, {fmt_real(p)}]" for b, p in diagram.pairs(dim))
    infinite = ", ".join(fmt_real(b) for b in diagram.infinite_births(dim))
    return f'{{"finite": [{finite}], "infinite": [{infinite}]}}'


def diagram_to_record(diagram: PersistenceDiagram) -> str:
    parts = [f'"t": {int(diagram.frame_index)}']
    parts += [f'"dim{d}": {_dim_block(diagram, d)}' for d in diagram.dims]
    return "{" + ", ".join(parts) + "}"


def record_to_diagram(line: str) -> PersistenceDiagram:
    doc = json.loads(line)
    finite, infinite = {}, {}
    for key, block in doc.items():
        m = re.fullmatch(r"dim(\d+)", key)
        if m is None:
            continue
        d = int(m.group(1))
        finite[d] = np.array(block.get("finite", []), dtype=np.float64).reshape(-1, 2)
        infinite[d] = np.array(block.get("infinite", []), dtype=np.float64)
    return PersistenceDiagram(frame_index=int(doc["t"]), finite=finite, infinite=infinite)


def write_diagrams(path, diagrams: Iterable[PersistenceDiagram]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for d in diagrams:
            fh.write(diagram_to_record(d) + "\n")


def read_diagrams(path) -> list[PersistenceDiagram]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                out.append(record_to_diagram(line))
            except (ValueError, KeyError, TypeError) as exc:
                raise InputError(f"line {lineno}: malformed diagram record ({exc})") from exc
    return out


TRACE_COLUMNS = ("t", "chi_max", "k_hat", "alarm", "alarmed_at")


def trace_row(res) -> str:
    chi = "" if math.isinf(res.chi_max) else fmt_real(res.chi_max)
    k = "" if res.k_hat is None else str(res.k_hat)
    at = "" if res.alarmed_at is None else str(res.alarmed_at)
    return f"{res.t},{chi},{k},{int(res.alarm)},{at}"


def write_trace(path_or_file, results) -> None:
    lines = [",".join(TRACE_COLUMNS)] + [trace_row(r) for r in results]
    text = "\n".join(lines) + "\n"
    if hasattr(path_or_file, "write"):
        path_or_file.write(text)
    else:
        with open(path_or_file, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def thread_cap(default: int | None = None) -> int:
    """Worker count for the diagram stage, capped by TDACP_THREADS."""
    n = default or os.cpu_count() or 1
    env = os.environ.get("TDACP_THREADS")
    if env:
        try:
            n = min(n, max(1, int(env)))
        except ValueError:
            pass
    return max(1, n)
