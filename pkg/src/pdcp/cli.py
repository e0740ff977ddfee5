"""Command line front end: diagram, train, detect, simulate.

Exit codes: 0 success, 2 usage error, 3 data error, 4 model mismatch.
"""
from __future__ import annotations

import argparse
import contextlib
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import io
from .detect import CalibrationError, DetectorConfig, ScanDetector, calibrate_threshold
from .lower_star import build_lower_star
from .persistence import ReductionOptions, compute_persistence
from .rips import RipsConfig, build_rips, diameter
from .summarize import HistogramModel, TrainingError, bin_diagram, fmt_real, train_breakpoints
from .synth import gen_circle_stream, gen_grid_stream
from .types import FiltrationError, InputError

EXIT_USAGE, EXIT_DATA, EXIT_MISMATCH = 2, 3, 4

_SUFFIXES = {"pgm-grid": (".pgm",), "csv-points": (".csv", ".txt")}


class CliError(Exception):
    def __init__(self, message, code=EXIT_DATA):
        super().__init__(message)
        self.code = code


def _dims(text: str) -> tuple:
    try:
        dims = tuple(sorted({int(x) for x in text.split(",") if x.strip()}))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad dimension list {text!r}")
    if not dims or any(d not in (0, 1) for d in dims):
        raise argparse.ArgumentTypeError("dimensions must be drawn from {0, 1}")
    return dims


def _real(text: str) -> float:
    try:
        x = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if math.isnan(x):
        raise argparse.ArgumentTypeError("NaN is not allowed")
    return x


def _open_out(path):
    if path in (None, "-"):
        return contextlib.nullcontext(sys.stdout)
    return open(path, "w", encoding="utf-8", newline="\n")


# ---- diagram -------------------------------------------------------------

def _frame_diagram(i, path, args):
    if args.format == "pgm-grid":
        cx = build_lower_star(io.read_pgm(path)) if args.mode == "lower_star" else None
        if cx is None:
            raise InputError("rips mode needs csv-points input")
    else:
        cloud = io.read_points_csv(path)
        if args.mode != "rips":
            raise InputError("lower_star mode needs pgm-grid input")
        eps = args.eps_max
        if eps is None:
            eps = diameter(cloud)
            eps = eps if eps > 0 else 1.0
        cx = build_rips(cloud, RipsConfig(eps, args.max_dim))
    # builders produce valid filtrations by construction
    return compute_persistence(cx, ReductionOptions(dims=args.dims, check=False), frame_index=i)


def cmd_diagram(args) -> int:
    files = io.list_frames(args.input, _SUFFIXES[args.format] if args.format else (".pgm", ".csv", ".txt"))
    if not files:
        raise CliError(f"no frames found under {args.input}")
    if args.format is None:
        args.format = "pgm-grid" if files[0].suffix.lower() == ".pgm" else "csv-points"
    if args.mode is None:
        args.mode = "lower_star" if args.format == "pgm-grid" else "rips"

    def work(item):
        i, f = item
        try:
            return _frame_diagram(i, f, args), None
        except (InputError, FiltrationError, ValueError, OSError) as exc:
            return None, f"frame {i} ({f.name}): {exc}"

    with ThreadPoolExecutor(max_workers=io.thread_cap()) as pool:
        results = list(pool.map(work, enumerate(files)))
    errors = [e for _, e in results if e]
    if errors:
        raise CliError("\n".join(errors))
    with _open_out(args.output) as fh:
        for d, _ in results:
            fh.write(io.diagram_to_record(d) + "\n")
    return 0


# ---- train ---------------------------------------------------------------

def cmd_train(args) -> int:
    diagrams = io.read_diagrams(args.diagrams)
    if args.bins < 2:
        raise CliError("invalid bin count", EXIT_USAGE)
    if args.train_prefix < 1:
        raise CliError("--train-prefix must be at least 1", EXIT_USAGE)
    if len(diagrams) < args.train_prefix:
        raise CliError(f"only {len(diagrams)} records, --train-prefix is {args.train_prefix}")
    try:
        model = train_breakpoints(diagrams[: args.train_prefix], args.bins, args.dim, args.sigma)
    except TrainingError as exc:
        raise CliError(str(exc))
    with _open_out(args.output) as fh:
        fh.write(model.to_json())
    return 0


# ---- detect --------------------------------------------------------------

def _load_model(path) -> HistogramModel:
    try:
        return HistogramModel.from_json(Path(path).read_text(encoding="utf-8"))
    except (ValueError, KeyError, TypeError) as exc:
        raise CliError(f"model mismatch: unreadable model ({exc})", EXIT_MISMATCH)


def cmd_detect(args) -> int:
    diagrams = io.read_diagrams(args.diagrams)
    model = _load_model(args.model)
    missing = [d.frame_index for d in diagrams if model.trained_dim not in d.dims]
    if missing:
        raise CliError(
            f"model mismatch: model uses dimension {model.trained_dim}, absent from frame {missing[0]}",
            EXIT_MISMATCH,
        )
    stream = np.stack([bin_diagram(d, model, normalize=not args.pool_raw_mass) for d in diagrams]) if diagrams else np.zeros((0, model.M))
    try:
        cfg = DetectorConfig(args.window, args.lookback, math.inf, model.sigma, args.pool_raw_mass)
    except ValueError as exc:
        raise CliError(str(exc), EXIT_USAGE)

    if args.calibrate is not None:
        prefix = args.calib_prefix or model.training_frames
        horizon = args.horizon or len(diagrams)
        try:
            b = calibrate_threshold(stream[:prefix], cfg, args.calibrate, horizon, args.replicates, args.seed)
        except CalibrationError as exc:
            raise CliError(str(exc))
        except ValueError as exc:
            raise CliError(str(exc), EXIT_USAGE)
    else:
        b = args.threshold
    det = ScanDetector(cfg.with_threshold(b))
    results = [det.step(x) for x in stream]

    at = det.alarmed_at
    k_at = results[at - 1].k_hat if at is not None else None
    summary = (
        f"alarmed_at={'none' if at is None else at} "
        f"k_hat={'none' if k_at is None else k_at} threshold={fmt_real(b) if math.isfinite(b) else b}"
    )
    if args.output in (None, "-"):
        io.write_trace(sys.stdout, results)
        print(summary, file=sys.stderr)
    else:
        io.write_trace(args.output, results)
        print(summary)
    return 0


# ---- simulate ------------------------------------------------------------

def _quantize(frames) -> list[np.ndarray]:
    # one affine map for the whole stream keeps frames comparable
    lo = min(float(f.values.min()) for f in frames)
    hi = max(float(f.values.max()) for f in frames)
    scale = 65535.0 / (hi - lo) if hi > lo else 0.0
    return [np.rint((f.values - lo) * scale).astype(np.int64) for f in frames]


def cmd_simulate(args) -> int:
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    try:
        if args.scenario == "grid-stream":
            frames = gen_grid_stream(
                args.rows, args.cols, args.frames, args.change_at,
                args.pre_amp, args.post_amp, args.noise, args.seed,
            )
            for i, img in enumerate(_quantize(frames), 1):
                io.write_pgm(out / f"frame_{i:05d}.pgm", img, binary=not args.ascii)
        else:
            clouds = gen_circle_stream(
                args.frames, args.change_at, n_points=args.n_points, noise_sd=args.noise, seed=args.seed
            )
            for i, c in enumerate(clouds, 1):
                io.write_points_csv(out / f"frame_{i:05d}.csv", c)
    except ValueError as exc:
        raise CliError(str(exc), EXIT_USAGE)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pdcp", description="Persistence-diagram change-point detection")
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("diagram", help="frames -> persistence diagram records (one JSON object per line)")
    d.add_argument("input", help="frame file or directory of frames")
    d.add_argument("--format", choices=["csv-points", "pgm-grid"])
    d.add_argument("--mode", choices=["rips", "lower_star"])
    d.add_argument("--eps-max", type=_real, help="Rips truncation scale (default: cloud diameter)")
    d.add_argument("--max-dim", type=int, choices=[1, 2], default=2)
    d.add_argument("--dims", type=_dims, default=(0, 1), help="homology dimensions, e.g. 0 or 0,1")
    d.add_argument("-o", "--output")
    d.set_defaults(func=cmd_diagram)

    t = sub.add_parser("train", help="fit histogram breakpoints on a prefix of the diagrams")
    t.add_argument("diagrams")
    t.add_argument("--bins", type=int, default=10)
    t.add_argument("--train-prefix", type=int, default=1)
    t.add_argument("--dim", type=int, choices=[0, 1], default=0)
    t.add_argument("--sigma", choices=["identity", "invvar"], default="identity")
    t.add_argument("-o", "--output")
    t.set_defaults(func=cmd_train)

    r = sub.add_parser("detect", help="run the online detector and write a per-frame trace")
    r.add_argument("diagrams")
    r.add_argument("model")
    r.add_argument("--window", type=int, default=5)
    r.add_argument("--lookback", type=_real, help="candidate lookback in frames (default 8 windows; inf allowed)")
    g = r.add_mutually_exclusive_group(required=True)
    g.add_argument("--threshold", type=_real)
    g.add_argument("--calibrate", type=_real, metavar="ALPHA", help="target false-alarm probability")
    r.add_argument("--horizon", type=int, help="simulated stream length (default: number of frames)")
    r.add_argument("--replicates", type=int, default=200)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--calib-prefix", type=int, help="pre-change frames used for calibration (default: model's training frames)")
    r.add_argument("--pool-raw-mass", action="store_true", help="pool raw bin mass inside each window before normalising")
    r.add_argument("-o", "--output")
    r.set_defaults(func=cmd_detect)

    s = sub.add_parser("simulate", help="write a synthetic frame stream")
    s.add_argument("scenario", choices=["grid-stream", "circles"])
    s.add_argument("-o", "--output", required=True, help="output directory")
    s.add_argument("--frames", type=int, default=120)
    s.add_argument("--change-at", type=int, default=60)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--noise", type=float, default=0.05)
    s.add_argument("--rows", type=int, default=32)
    s.add_argument("--cols", type=int, default=32)
    s.add_argument("--pre-amp", type=float, default=1.0)
    s.add_argument("--post-amp", type=float, default=2.0)
    s.add_argument("--n-points", type=int, default=60)
    s.add_argument("--ascii", action="store_true", help="write P2 instead of P5")
    s.set_defaults(func=cmd_simulate)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (InputError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
