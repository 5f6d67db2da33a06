"""Constraint checks run on a scenario before any evaluation."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

from .regression import PAPER, CoefficientSet, compute_branches, mean_power_raw, quadratic_roots
from .regression import encoding_latency_raw
from .scenario import CnnProfile, ScenarioSpec

ERROR = "ERROR"
WARN = "WARN"

# distance (GHz) from a negative stretch of a clock regression that still warns
CLOCK_MARGIN = 0.05
SHARE_TOL = 1e-9


@dataclass(frozen=True)
class Issue:
    severity: str
    path: str
    message: str

    def __str__(self) -> str:
        return f"{self.severity} {self.path}: {self.message}"


@dataclass
class ValidationReport:
    issues: list[Issue] = field(default_factory=list)

    @property
    def errors(self) -> list[Issue]:
        return [i for i in self.issues if i.severity == ERROR]

    @property
    def warnings(self) -> list[Issue]:
        return [i for i in self.issues if i.severity == WARN]

    @property
    def ok(self) -> bool:
        return not self.errors

    def error(self, path: str, message: str) -> None:
        self.issues.append(Issue(ERROR, path, message))

    def warn(self, path: str, message: str) -> None:
        self.issues.append(Issue(WARN, path, message))


def _finite(x) -> bool:
    return isinstance(x, (int, float)) and math.isfinite(x)


def _positive(r: ValidationReport, path: str, x) -> None:
    if not _finite(x) or x <= 0:
        r.error(path, f"must be > 0 (got {x})")


def _nonneg(r: ValidationReport, path: str, x) -> None:
    if not _finite(x) or x < 0:
        r.error(path, f"must be >= 0 (got {x})")


def _unit(r: ValidationReport, path: str, x, name: str) -> None:
    if not _finite(x) or not 0.0 <= x <= 1.0:
        r.error(path, f"{name} out of [0,1] (got {x})")


def _cnn(r: ValidationReport, path: str, cnn: CnnProfile) -> None:
    _nonneg(r, f"{path}.depth", cnn.depth)
    _positive(r, f"{path}.size", cnn.size)
    _nonneg(r, f"{path}.depth_scale", cnn.depth_scale)


def _device(r: ValidationReport, spec: ScenarioSpec) -> None:
    dev = spec.device
    a = dev.allocation
    _unit(r, "device.cpu_share", a.cpu_share, "cpu_share")
    _positive(r, "device.cpu_clock", a.cpu_clock)
    _positive(r, "device.gpu_clock", a.gpu_clock)
    _positive(r, "device.memory_bandwidth", dev.memory_bandwidth)
    _cnn(r, "device.cnn", dev.cnn)
    _nonneg(r, "power.wait_power", dev.wait_power)
    _nonneg(r, "power.base_power", dev.base_power)
    if not _finite(dev.thermal_fraction) or not 0.0 <= dev.thermal_fraction < 1.0:
        r.error("power.thermal_fraction", f"must lie in [0,1) (got {dev.thermal_fraction})")
    for seg, p in spec.segment_power.items():
        _nonneg(r, f"power.segment_power.{seg}", p)


def _frames(r: ValidationReport, spec: ScenarioSpec) -> None:
    f = spec.frames
    _positive(r, "frames.frame_rate", f.frame_rate)
    for name in ("frame_area", "frame_bytes", "converted_area", "converted_bytes", "encoded_bytes"):
        _positive(r, f"frames.{name}", getattr(f, name))
    if f.frame_count < 1:
        r.error("frames.frame_count", f"must be >= 1 (got {f.frame_count})")
    if f.updates_per_frame < 1:
        r.error("frames.updates_per_frame", f"must be >= 1 (got {f.updates_per_frame})")
    if f.request_rate is not None:
        _positive(r, "frames.request_rate", f.request_rate)
    if _finite(f.encoded_bytes) and _finite(f.frame_bytes) and f.encoded_bytes > f.frame_bytes:
        r.error("frames.encoded_bytes", "encoded frame larger than the captured frame")


def _encoder(r: ValidationReport, spec: ScenarioSpec) -> None:
    e = spec.encoder
    for name in ("i_interval", "b_interval", "bitrate", "quantization", "unit_scale", "decode_discount"):
        _nonneg(r, f"encoder.{name}", getattr(e, name))
    if e.output_area is not None:
        _positive(r, "encoder.output_area", e.output_area)


def _network(r: ValidationReport, spec: ScenarioSpec) -> None:
    n = spec.network
    _positive(r, "network.throughput", n.throughput)
    _positive(r, "network.propagation_speed", n.propagation_speed)
    _nonneg(r, "network.handoff_latency", n.handoff_latency)
    _unit(r, "network.handoff_probability", n.handoff_probability, "handoff_probability")
    _nonneg(r, "network.coop_distance", n.coop_distance)
    _nonneg(r, "network.coop_bytes", n.coop_bytes)


def _edges(r: ValidationReport, spec: ScenarioSpec) -> None:
    for i, e in enumerate(spec.edges):
        p = f"edges[{i}]"
        if e.compute is not None:
            _positive(r, f"{p}.compute", e.compute)
        _positive(r, f"{p}.memory_bandwidth", e.memory_bandwidth)
        _unit(r, f"{p}.task_share", e.task_share, "task_share")
        _nonneg(r, f"{p}.distance", e.distance)
        _cnn(r, f"{p}.cnn", e.cnn)


def _sensors(r: ValidationReport, spec: ScenarioSpec) -> None:
    n = spec.frames.updates_per_frame
    for i, s in enumerate(spec.sensors):
        p = f"sensors[{i}]"
        _positive(r, f"{p}.frequency", s.frequency)
        if s.arrival_rate is not None:
            _nonneg(r, f"{p}.arrival_rate", s.arrival_rate)
        rows = [s.distances] if s.trajectory is None else list(s.trajectory)
        if s.trajectory is not None and len(s.trajectory) < spec.frames.frame_count:
            r.error(f"{p}.trajectory", f"{len(s.trajectory)} rows for {spec.frames.frame_count} frames")
        for j, row in enumerate(rows):
            where = f"{p}.distances" if s.trajectory is None else f"{p}.trajectory[{j}]"
            if not row:
                r.error(where, "no distances given")
            elif len(row) > 1 and len(row) < n:
                r.error(where, f"{len(row)} distances for {n} updates")
            if any(not _finite(d) or d < 0 for d in row):
                r.error(where, "distances must be >= 0")


def _buffers(r: ValidationReport, spec: ScenarioSpec) -> None:
    for name, b in spec.buffers.items():
        p = f"buffer.{name}"
        _positive(r, f"{p}.arrival_rate", b.arrival_rate)
        _positive(r, f"{p}.service_rate", b.service_rate)
        if _finite(b.arrival_rate) and _finite(b.service_rate) and b.service_rate <= b.arrival_rate:
            r.error(p, f"unstable queue: service rate {b.service_rate} <= arrival rate {b.arrival_rate}")
    if spec.sensors and "external" not in spec.buffers:
        r.warn("buffer.external", "no external buffer; sensor AoI uses zero buffering delay")


def _offload(r: ValidationReport, spec: ScenarioSpec) -> None:
    o = spec.offload
    if o.local not in (0, 1):
        r.error("offload.local", f"must be 0 or 1 (got {o.local})")
    _unit(r, "offload.client_share", o.client_share, "client_share")
    _positive(r, "offload.task_total", o.task_total)
    _nonneg(r, "offload.local_result_latency", o.local_result_latency)
    _nonneg(r, "offload.result_bytes", o.result_bytes)
    share_sum = o.client_share + sum(o.edge_shares)
    if _finite(share_sum) and _finite(o.task_total) and abs(share_sum - o.task_total) > SHARE_TOL * max(1.0, abs(o.task_total)):
        r.error("offload", f"client share + edge shares = {share_sum:.6g}, expected task_total {o.task_total:.6g}")
    if o.local == 0 and not spec.edges:
        r.error("edges", "remote inference selected but no edge server configured")


def _volumetric(r: ValidationReport, spec: ScenarioSpec) -> None:
    if spec.volumetric is not None:
        _positive(r, "volumetric.scene_area", spec.volumetric.scene_area)
        _positive(r, "volumetric.scene_bytes", spec.volumetric.scene_bytes)


def _near_negative(model, var: str, clock: float) -> bool:
    roots = quadratic_roots(model, var)
    if roots is None:
        return False
    lo, hi = roots
    negative_between = model.predict({var: (lo + hi) / 2}) < 0 if hi > lo else False
    if negative_between:
        return lo - CLOCK_MARGIN <= clock <= hi + CLOCK_MARGIN
    # regression opens downward: negative outside the roots
    return clock <= lo + CLOCK_MARGIN or clock >= hi - CLOCK_MARGIN


def _regression_domain(r: ValidationReport, spec: ScenarioSpec, coeffs: CoefficientSet) -> None:
    a = spec.device.allocation
    if not (_finite(a.cpu_clock) and _finite(a.gpu_clock) and _finite(a.cpu_share)):
        return
    if a.cpu_share > 0 and _near_negative(coeffs["compute_cpu"], "f_c", a.cpu_clock):
        r.warn("device.cpu_clock", "cpu compute regression near non-positive region")
    if a.cpu_share < 1 and _near_negative(coeffs["compute_gpu"], "f_g", a.gpu_clock):
        r.warn("device.gpu_clock", "gpu compute regression near non-positive region")
    cpu, gpu = compute_branches(a, coeffs)
    c = a.cpu_share * cpu + (1 - a.cpu_share) * gpu
    if c <= 0:
        r.warn("device", f"compute regression gives {c:.4g}; evaluation clamps it")
    p = mean_power_raw(a, coeffs)
    if p < 0:
        r.warn("device", f"power regression gives {p:.4g} W; evaluation clamps it to base power")
    if spec.offload.local == 0 and encoding_latency_raw(spec.encoder, spec.frames, coeffs) < 0:
        r.warn("encoder", "encoding regression negative; evaluation clamps it to 0")


_CHECKS: tuple[Callable[[ValidationReport, ScenarioSpec], None], ...] = (
    _device,
    _frames,
    _encoder,
    _network,
    _edges,
    _sensors,
    _buffers,
    _offload,
    _volumetric,
)


def validate_scenario(spec: ScenarioSpec, coeffs: CoefficientSet = PAPER) -> ValidationReport:
    """Check every physical and model constraint of ``spec``.

    Never raises: a check that itself fails is reported as an ERROR.
    """
    report = ValidationReport()
    for check in _CHECKS:
        try:
            check(report, spec)
        except Exception as exc:  # noqa: BLE001 - validation must be total
            report.error(check.__name__.lstrip("_"), f"check failed: {exc!r}")
    if report.ok:
        try:
            _regression_domain(report, spec, coeffs)
        except Exception as exc:  # noqa: BLE001
            report.error("regression", f"check failed: {exc!r}")
    return report
