"""Change-point detection by permutation-calibrated energy-distance scans.

The package tests an ordered series for distributional change by scanning
studentized between/within energy distances over candidate split points,
calibrates the scan maximum by permutation (uniform or circular block),
localizes the change at the maximizing split, and extends to multiple
changes by recursive binary segmentation. A Monte Carlo harness replays
the standard size, power and localization experiments.
"""

from .calibration import (
    CalibrationResult,
    DetectionDecision,
    calibrate,
    detect_single,
    permute_indices,
)
from .energy import SplitStatistics, distance_matrix, scan_energy, split_statistics
from .estimators import EnergyChangeDetector, EnergySegmenter
from .exceptions import DegenerateScaleError
from .scan import (
    ScaleEstimate,
    ScanResult,
    SplitWeights,
    candidate_splits,
    double_centered_scale,
    scan,
    split_weights,
    studentize,
)
from .segmentation import (
    SegmentNode,
    SegmentationReport,
    default_min_segment,
    segment_series,
)
from .simulate import (
    Change,
    DetectorSettings,
    Exponential,
    Normal,
    PRESET_NAMES,
    Scenario,
    SimulationSummary,
    SkewNormal,
    apply_change,
    drift_curve,
    generate,
    mixture_energy,
    preset_scenario,
    run_localization,
    run_power,
    run_size,
    standard_family,
    two_sample_energy,
)

__version__ = "1.0.0"

__all__ = [
    "CalibrationResult",
    "Change",
    "DegenerateScaleError",
    "DetectionDecision",
    "DetectorSettings",
    "EnergyChangeDetector",
    "EnergySegmenter",
    "Exponential",
    "Normal",
    "PRESET_NAMES",
    "ScaleEstimate",
    "ScanResult",
    "Scenario",
    "SegmentNode",
    "SegmentationReport",
    "SimulationSummary",
    "SkewNormal",
    "SplitStatistics",
    "SplitWeights",
    "apply_change",
    "calibrate",
    "candidate_splits",
    "default_min_segment",
    "detect_single",
    "distance_matrix",
    "double_centered_scale",
    "drift_curve",
    "generate",
    "mixture_energy",
    "permute_indices",
    "preset_scenario",
    "run_localization",
    "run_power",
    "run_size",
    "scan",
    "scan_energy",
    "segment_series",
    "split_statistics",
    "split_weights",
    "standard_family",
    "studentize",
    "two_sample_energy",
    "__version__",
]
