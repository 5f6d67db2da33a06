"""Run the latency, energy and AoI models over a range of frames."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable

from .aoi import AoiReport, compose_frame_aoi
from .energy import EnergyBreakdown, compose_frame_energy
from .latency import LatencyBreakdown, compose_frame_latency
from .regression import PAPER, CoefficientSet
from .scenario import ScenarioSpec


@dataclass(frozen=True)
class FrameResult:
    latency: LatencyBreakdown
    energy: EnergyBreakdown
    aoi: AoiReport


def evaluate_frame(spec: ScenarioSpec, q: int, coeffs: CoefficientSet = PAPER) -> FrameResult:
    lat = compose_frame_latency(spec, q, coeffs)
    return FrameResult(lat, compose_frame_energy(spec, lat, coeffs), compose_frame_aoi(spec, lat))


def evaluate_frames(
    spec: ScenarioSpec,
    frames: Iterable[int] | None = None,
    coeffs: CoefficientSet = PAPER,
    jobs: int = 1,
) -> list[FrameResult]:
    """Evaluate each frame index; results come back in input order."""
    qs = list(frames) if frames is not None else list(range(1, spec.frames.frame_count + 1))
    if jobs <= 1:
        return [evaluate_frame(spec, q, coeffs) for q in qs]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(lambda q: evaluate_frame(spec, q, coeffs), qs))
