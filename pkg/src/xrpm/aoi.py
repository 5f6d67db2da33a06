"""Age-of-Information samples, averages and Relevance-of-Information.

The n-th generated packet of a sensor serves the n-th request of the frame.
Request and generation clocks restart at every frame.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from .errors import DegenerateAoi, EmptyUpdates
from .latency import LatencyBreakdown
from .latency import sojourn as mean_sojourn  # 1 / (mu - lambda); raises UnstableQueue
from .scenario import ScenarioSpec, SensorProfile


@dataclass(frozen=True)
class SensorAoi:
    sensor: str
    raw_samples: tuple[float, ...]
    samples: tuple[float, ...]
    average: float
    processed_frequency: float
    required_frequency: float
    roi: float
    flags: tuple[str, ...] = ()

    @property
    def fresh(self) -> bool:
        return self.roi >= 1.0


@dataclass(frozen=True)
class AoiReport:
    q: int
    n_updates: int
    sensors: tuple[SensorAoi, ...] = field(default=())


def aoi_samples(
    sensor: SensorProfile,
    n_updates: int,
    f_req: float,
    t_bar: float,
    c_prop: float,
    q: int = 1,
) -> list[float]:
    """Raw AoI per update: generation + propagation + buffering - request time.

    Values may be negative when the sensor runs ahead of the requests.
    """
    dist = sensor.distances_at(q)
    out = []
    for n in range(1, n_updates + 1):
        d = dist[n - 1] if len(dist) > 1 else dist[0]
        generated = n / sensor.frequency
        requested = n / f_req
        out.append(generated + (d / c_prop + t_bar) - requested)
    return out


def average_aoi(samples: Sequence[float]) -> float:
    if not samples:
        raise EmptyUpdates("no AoI samples")
    return math.fsum(samples) / len(samples)


def roi(avg_aoi: float, n_updates: int, l_tot: float) -> tuple[float, float, float]:
    """Return (processed frequency, required frequency, RoI). RoI >= 1 is fresh.

    The required frequency is N / L_tot.  :func:`compose_frame_aoi` uses a
    fixed ``frames.request_rate`` instead when the scenario sets one.
    """
    if avg_aoi <= 0.0:
        raise DegenerateAoi(f"average AoI {avg_aoi} is not positive")
    f_bar = 1.0 / avg_aoi
    f_req = n_updates / l_tot
    # (1/A) / (N/L) rearranged to L / (A N): one rounding, so RoI == 1 iff A N == L
    return f_bar, f_req, l_tot / (avg_aoi * n_updates)


def compose_frame_aoi(spec: ScenarioSpec, breakdown: LatencyBreakdown) -> AoiReport:
    """AoI report for every external sensor of the frame in ``breakdown``."""
    q = breakdown.q
    n = spec.frames.updates_per_frame
    buf = spec.external_buffer
    t_bar = mean_sojourn(buf) if buf is not None else 0.0
    # one request frequency drives both the sample clock and the RoI
    f_req = spec.frames.request_rate or n / breakdown.total
    results = []
    for s in spec.sensors:
        flags = []
        raw = aoi_samples(s, n, f_req, t_bar, spec.network.propagation_speed, q)
        if any(v < 0.0 for v in raw):
            flags.append("negative-clamped")
        clamped = tuple(max(0.0, v) for v in raw)
        avg = average_aoi(clamped)
        if avg <= 0.0:
            flags.append("degenerate-aoi")
            f_bar, r = math.inf, math.inf
        elif spec.frames.request_rate is None:
            f_bar, _, r = roi(avg, n, breakdown.total)
        else:
            f_bar = 1.0 / avg
            r = 1.0 / (avg * f_req)
        results.append(
            SensorAoi(
                sensor=s.name,
                raw_samples=tuple(raw),
                samples=clamped,
                average=avg,
                processed_frequency=f_bar,
                required_frequency=f_req,
                roi=r,
                flags=tuple(flags),
            )
        )
    return AoiReport(q=q, n_updates=n, sensors=tuple(results))
