"""Change-point detection on streams of persistence diagrams."""
import sys

from .detect import (
    CalibrationError,
    DetectorConfig,
    ScanDetector,
    StepResult,
    calibrate_threshold,
    candidate_chis,
    chi_statistic,
    run_detector,
)
from .lower_star import build_lower_star
from .persistence import ReductionOptions, compute_persistence, h0_union_find
from .rips import RipsConfig, build_rips, diameter
from .summarize import HistogramModel, TrainingError, bin_diagram, train_breakpoints
from .synth import PortableRNG, gen_circle_stream, gen_grid_stream, sample_circles
from .types import (
    FilteredComplex,
    FiltrationError,
    InputError,
    PersistenceDiagram,
    PersistencePair,
    PointCloud,
    ScalarGrid,
    Simplex,
    validate,
)

__version__ = "0.1.0"

__all__ = [
    name for name, obj in list(globals().items())
    if not name.startswith("_") and not isinstance(obj, type(sys))
]
