"""Analytical latency, energy and Age-of-Information model for edge-assisted XR pipelines."""

from .aoi import AoiReport, aoi_samples, average_aoi, compose_frame_aoi, mean_sojourn, roi
from .energy import EnergyBreakdown, compose_frame_energy, segment_energy
from .evaluate import FrameResult, evaluate_frame, evaluate_frames
from .latency import LatencyBreakdown, compose_frame_latency
from .regression import (
    PAPER,
    CoefficientSet,
    LinearModel,
    cnn_complexity,
    compute_resource,
    encoding_latency_raw,
    fit_linear_model,
    mean_power,
)
from .scenario import ScenarioSpec, load_scenario, scenario_from_dict
from .simoracle import simulate_aoi, simulate_mm1
from .validation import ValidationReport, validate_scenario

__version__ = "0.1.0"
