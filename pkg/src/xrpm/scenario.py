"""Domain types for an XR scenario and the JSON scenario loader.

Unit conventions used everywhere in the package:

* frame and scene areas in Mpixel (10^6 pixels)
* data sizes in MB (10^6 bytes); 1 MB = 8 Mb for transfer math
* memory bandwidth in MB/s, wireless throughput in Mbps
* compute in the unitless "model compute units" emitted by the
  compute-resource regression
* all latencies in seconds internally; reports convert to ms
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Sequence

from .errors import ScenarioError

SPEED_OF_LIGHT = 3.0e8
MB_TO_MBIT = 8.0
EDGE_COMPUTE_RATIO = 11.76
DEFAULT_DECODE_DISCOUNT = 1.0 / 3.0
DEFAULT_RESULT_BYTES = 0.01
DEFAULT_THERMAL_FRACTION = 0.05
DISPLAY_ALLOWANCE_W = 0.5

BUFFER_CLASSES = ("frame", "volumetric", "external")
SEGMENTS = ("fg", "vol", "ext", "ren", "fc", "en", "loc", "rem", "tr", "ho", "coop")


@dataclass(frozen=True)
class FrameConfig:
    frame_rate: float
    frame_area: float
    frame_bytes: float
    converted_area: float
    converted_bytes: float
    encoded_bytes: float
    frame_count: int = 1
    updates_per_frame: int = 1
    # fixes the AoI request rate instead of deriving it as N / L_tot
    request_rate: float | None = None


@dataclass(frozen=True)
class ComputeAllocation:
    cpu_clock: float
    gpu_clock: float
    cpu_share: float

    @property
    def gpu_share(self) -> float:
        return 1.0 - self.cpu_share


@dataclass(frozen=True)
class CnnProfile:
    depth: float
    size: float
    depth_scale: float = 0.0


@dataclass(frozen=True)
class DeviceProfile:
    allocation: ComputeAllocation
    memory_bandwidth: float
    cnn: CnnProfile
    wait_power: float = DISPLAY_ALLOWANCE_W
    base_power: float = 0.0
    thermal_fraction: float = DEFAULT_THERMAL_FRACTION


@dataclass(frozen=True)
class EdgeProfile:
    memory_bandwidth: float
    cnn: CnnProfile
    task_share: float
    distance: float = 0.0
    # None means "derive as EDGE_COMPUTE_RATIO * c_client"
    compute: float | None = None


@dataclass(frozen=True)
class EncoderConfig:
    i_interval: float = 0.0
    b_interval: float = 0.0
    bitrate: float = 0.0
    quantization: float = 0.0
    # encoded frame area s_f3; None means same as the captured frame area
    output_area: float | None = None
    unit_scale: float = 1.0
    decode_discount: float = DEFAULT_DECODE_DISCOUNT


@dataclass(frozen=True)
class SensorProfile:
    frequency: float
    distances: tuple[float, ...]
    arrival_rate: float | None = None
    name: str = ""
    # optional per-frame distance table; row q-1 holds the distances for frame q
    trajectory: tuple[tuple[float, ...], ...] | None = None

    def distances_at(self, q: int) -> tuple[float, ...]:
        if self.trajectory is not None:
            return self.trajectory[q - 1]
        return self.distances


@dataclass(frozen=True)
class BufferConfig:
    arrival_rate: float
    service_rate: float


@dataclass(frozen=True)
class OffloadPlan:
    local: int
    client_share: float
    edge_shares: tuple[float, ...]
    task_total: float = 1.0
    include_coop: bool = False
    local_result_latency: float = 0.0
    result_bytes: float = DEFAULT_RESULT_BYTES

    @property
    def remote(self) -> int:
        return 1 - self.local


@dataclass(frozen=True)
class NetworkProfile:
    throughput: float
    propagation_speed: float = SPEED_OF_LIGHT
    handoff_latency: float = 0.0
    handoff_probability: float = 0.0
    coop_distance: float = 0.0
    coop_bytes: float = 0.0


@dataclass(frozen=True)
class VolumetricConfig:
    scene_area: float
    scene_bytes: float


@dataclass(frozen=True)
class ScenarioSpec:
    device: DeviceProfile
    frames: FrameConfig
    encoder: EncoderConfig
    network: NetworkProfile
    offload: OffloadPlan
    buffers: Mapping[str, BufferConfig]
    edges: tuple[EdgeProfile, ...] = ()
    sensors: tuple[SensorProfile, ...] = ()
    volumetric: VolumetricConfig | None = None
    segment_power: Mapping[str, float] = field(default_factory=dict)

    @property
    def external_buffer(self) -> BufferConfig | None:
        return self.buffers.get("external")


# --------------------------------------------------------------------------
# loading


class _Section:
    """Key access over one JSON object that reports the offending path."""

    def __init__(self, data: Any, path: str):
        if not isinstance(data, Mapping):
            raise ScenarioError(f"{path}: expected an object, got {type(data).__name__}")
        self.data = data
        self.path = path
        self.seen: set[str] = set()

    def num(self, key: str, default: Any = ...) -> float:
        self.seen.add(key)
        if key not in self.data:
            if default is ...:
                raise ScenarioError(f"{self.path}.{key}: missing required field")
            return default
        value = self.data[key]
        if value is None and default is None:
            return None
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ScenarioError(f"{self.path}.{key}: expected a number, got {value!r}")
        return float(value)

    def int_(self, key: str, default: Any = ...) -> int:
        value = self.num(key, default)
        if value is None:
            return None
        if not math.isfinite(value) or value != int(value):
            raise ScenarioError(f"{self.path}.{key}: expected an integer, got {value!r}")
        return int(value)

    def sub(self, key: str) -> "_Section":
        self.seen.add(key)
        if key not in self.data:
            raise ScenarioError(f"{self.path}.{key}: missing required section")
        return _Section(self.data[key], f"{self.path}.{key}")

    def raw(self, key: str, default: Any = None) -> Any:
        self.seen.add(key)
        return self.data.get(key, default)

    def finish(self) -> None:
        extra = set(self.data) - self.seen
        if extra:
            raise ScenarioError(f"{self.path}: unknown field(s) {sorted(extra)}")


def _numbers(value: Any, path: str) -> tuple[float, ...]:
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return (float(value),)
    if not isinstance(value, Sequence) or isinstance(value, str):
        raise ScenarioError(f"{path}: expected a number or list of numbers")
    out = []
    for i, v in enumerate(value):
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ScenarioError(f"{path}[{i}]: expected a number, got {v!r}")
        out.append(float(v))
    return tuple(out)


def _cnn(sec: _Section) -> CnnProfile:
    cnn = CnnProfile(
        depth=sec.num("depth", 0.0),
        size=sec.num("size"),
        depth_scale=sec.num("depth_scale", 0.0),
    )
    sec.finish()
    return cnn


def scenario_from_dict(doc: Mapping[str, Any]) -> ScenarioSpec:
    """Build a :class:`ScenarioSpec` from a parsed scenario document.

    Only structural problems (missing keys, wrong types, unknown fields)
    raise :class:`ScenarioError`. Physical constraints are left to
    :func:`xrpm.validation.validate_scenario`.
    """
    top = _Section(doc, "$")

    dev = top.sub("device")
    alloc = ComputeAllocation(
        cpu_clock=dev.num("cpu_clock"),
        gpu_clock=dev.num("gpu_clock"),
        cpu_share=dev.num("cpu_share"),
    )
    memory_bandwidth = dev.num("memory_bandwidth")
    device_cnn = _cnn(dev.sub("cnn"))
    dev.finish()

    pw = top.sub("power")
    base_power = pw.num("base_power", 0.0)
    wait_power = pw.num("wait_power", base_power + DISPLAY_ALLOWANCE_W)
    thermal = pw.num("thermal_fraction", DEFAULT_THERMAL_FRACTION)
    seg_raw = pw.raw("segment_power", {}) or {}
    seg = _Section(seg_raw, f"{pw.path}.segment_power")
    segment_power = {k: seg.num(k) for k in seg_raw}
    unknown = set(segment_power) - set(SEGMENTS)
    if unknown:
        raise ScenarioError(f"{seg.path}: unknown segment(s) {sorted(unknown)}")
    pw.finish()

    device = DeviceProfile(
        allocation=alloc,
        memory_bandwidth=memory_bandwidth,
        cnn=device_cnn,
        wait_power=wait_power,
        base_power=base_power,
        thermal_fraction=thermal,
    )

    fr = top.sub("frames")
    frames = FrameConfig(
        frame_rate=fr.num("frame_rate"),
        frame_area=fr.num("frame_area"),
        frame_bytes=fr.num("frame_bytes"),
        converted_area=fr.num("converted_area"),
        converted_bytes=fr.num("converted_bytes"),
        encoded_bytes=fr.num("encoded_bytes"),
        frame_count=fr.int_("frame_count", 1),
        updates_per_frame=fr.int_("updates_per_frame", 1),
        request_rate=fr.num("request_rate", None),
    )
    fr.finish()

    en = top.sub("encoder")
    encoder = EncoderConfig(
        i_interval=en.num("i_interval", 0.0),
        b_interval=en.num("b_interval", 0.0),
        bitrate=en.num("bitrate", 0.0),
        quantization=en.num("quantization", 0.0),
        output_area=en.num("output_area", None),
        unit_scale=en.num("unit_scale", 1.0),
        decode_discount=en.num("decode_discount", DEFAULT_DECODE_DISCOUNT),
    )
    en.finish()

    nw = top.sub("network")
    network = NetworkProfile(
        throughput=nw.num("throughput"),
        propagation_speed=nw.num("propagation_speed", SPEED_OF_LIGHT),
        handoff_latency=nw.num("handoff_latency", 0.0),
        handoff_probability=nw.num("handoff_probability", 0.0),
        coop_distance=nw.num("coop_distance", 0.0),
        coop_bytes=nw.num("coop_bytes", 0.0),
    )
    nw.finish()

    edges_raw = top.raw("edges", [])
    if not isinstance(edges_raw, Sequence) or isinstance(edges_raw, str):
        raise ScenarioError("$.edges: expected an array")
    edges = []
    for i, e in enumerate(edges_raw):
        es = _Section(e, f"$.edges[{i}]")
        edges.append(
            EdgeProfile(
                memory_bandwidth=es.num("memory_bandwidth"),
                cnn=_cnn(es.sub("cnn")),
                task_share=es.num("task_share"),
                distance=es.num("distance", 0.0),
                compute=es.num("compute", None),
            )
        )
        es.finish()

    sensors_raw = top.raw("sensors", [])
    if not isinstance(sensors_raw, Sequence) or isinstance(sensors_raw, str):
        raise ScenarioError("$.sensors: expected an array")
    sensors = []
    for i, s in enumerate(sensors_raw):
        ss = _Section(s, f"$.sensors[{i}]")
        dist_raw = ss.raw("distances", ss.raw("distance", 0.0))
        traj_raw = ss.raw("trajectory")
        trajectory = None
        if traj_raw is not None:
            if not isinstance(traj_raw, Sequence):
                raise ScenarioError(f"{ss.path}.trajectory: expected an array of arrays")
            trajectory = tuple(
                _numbers(row, f"{ss.path}.trajectory[{j}]") for j, row in enumerate(traj_raw)
            )
        sensors.append(
            SensorProfile(
                frequency=ss.num("frequency"),
                distances=_numbers(dist_raw, f"{ss.path}.distances"),
                arrival_rate=ss.num("arrival_rate", None),
                name=str(ss.raw("id", f"s{i}")),
                trajectory=trajectory,
            )
        )
        ss.finish()

    buf = top.sub("buffer")
    buffers = {}
    for cls in BUFFER_CLASSES:
        if cls not in buf.data:
            buf.seen.add(cls)
            continue
        bs = buf.sub(cls)
        arrival = bs.num("arrival_rate", None)
        if arrival is None and cls == "external" and sensors:
            arrival = sum(s.arrival_rate if s.arrival_rate is not None else s.frequency for s in sensors)
        if arrival is None:
            raise ScenarioError(f"{bs.path}.arrival_rate: missing required field")
        buffers[cls] = BufferConfig(arrival_rate=arrival, service_rate=bs.num("service_rate"))
        bs.finish()
    buf.finish()

    off = top.sub("offload")
    local = off.num("local")
    include_coop = off.raw("include_coop", False)
    if not isinstance(include_coop, bool):
        raise ScenarioError(f"{off.path}.include_coop: expected true/false")
    offload = OffloadPlan(
        local=int(local) if local in (0.0, 1.0) else local,
        client_share=off.num("client_share", 1.0 if local == 1.0 else 0.0),
        edge_shares=tuple(e.task_share for e in edges),
        task_total=off.num("task_total", 1.0),
        include_coop=include_coop,
        local_result_latency=off.num("local_result_latency", 0.0),
        result_bytes=off.num("result_bytes", DEFAULT_RESULT_BYTES),
    )
    off.finish()

    volumetric = None
    if top.raw("volumetric") is not None:
        vs = top.sub("volumetric")
        volumetric = VolumetricConfig(scene_area=vs.num("scene_area"), scene_bytes=vs.num("scene_bytes"))
        vs.finish()

    top.finish()
    return ScenarioSpec(
        device=device,
        frames=frames,
        encoder=encoder,
        network=network,
        offload=offload,
        buffers=buffers,
        edges=tuple(edges),
        sensors=tuple(sensors),
        volumetric=volumetric,
        segment_power=segment_power,
    )


def load_scenario(path: str | Path) -> ScenarioSpec:
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ScenarioError(f"{path}: invalid JSON ({exc})") from exc
    return scenario_from_dict(doc)
