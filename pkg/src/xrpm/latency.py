"""Per-segment latency models and end-to-end composition for one frame.

All functions return seconds.  Segment functions are plain arithmetic over
their inputs; :func:`compose_frame_latency` wires them to a scenario and
applies the local/remote gate.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .errors import NoEdgeConfigured, UnstableQueue
from .regression import (
    PAPER,
    CoefficientSet,
    cnn_complexity,
    compute_resource,
    encoding_latency_raw,
)
from .scenario import (
    EDGE_COMPUTE_RATIO,
    MB_TO_MBIT,
    BufferConfig,
    CnnProfile,
    EdgeProfile,
    EncoderConfig,
    FrameConfig,
    NetworkProfile,
    OffloadPlan,
    ScenarioSpec,
    SensorProfile,
    VolumetricConfig,
)

LATENCY_FIELDS = ("fg", "vol", "ext", "ren", "fc", "en", "loc", "rem", "tr", "ho", "coop")


@dataclass(frozen=True)
class LatencyBreakdown:
    """Gated per-segment contributions for frame ``q`` (seconds).

    Gated-off segments hold 0, so ``total`` is both the plain sum of the
    fields and the gated end-to-end sum.
    """

    q: int
    fg: float
    vol: float
    ext: float
    ren: float
    fc: float
    en: float
    loc: float
    rem: float
    tr: float
    ho: float
    coop: float
    total: float
    local: int
    include_coop: bool
    c_client: float
    warnings: tuple[str, ...] = field(default=())

    def segments(self) -> dict[str, float]:
        return {name: getattr(self, name) for name in LATENCY_FIELDS}

    def recompute_total(self) -> float:
        return gated_total(self.segments(), self.local, self.include_coop)


def gated_total(seg: dict[str, float], local: int, include_coop: bool) -> float:
    remote = 1 - local
    return (
        seg["fg"]
        + seg["vol"]
        + seg["ext"]
        + seg["ren"]
        + local * seg["fc"]
        + remote * seg["en"]
        + local * seg["loc"]
        + remote * seg["rem"]
        + remote * seg["tr"]
        + remote * seg["ho"]
        + (seg["coop"] if include_coop else 0.0)
    )


def _compute_and_memory(area: float, data: float, c: float, m: float) -> float:
    return area / c + data / m


def frame_generation(frames: FrameConfig, c_client: float, m_client: float) -> float:
    return 1.0 / frames.frame_rate + _compute_and_memory(
        frames.frame_area, frames.frame_bytes, c_client, m_client
    )


def volumetric_generation(vol: VolumetricConfig, c_client: float, m_client: float) -> float:
    return _compute_and_memory(vol.scene_area, vol.scene_bytes, c_client, m_client)


def external_sensor_latency(
    sensors: Sequence[SensorProfile], n_updates: int, c_prop: float, q: int = 1
) -> float:
    """Slowest sensor's summed generation-plus-propagation time over N updates.

    An empty sensor list gives 0.
    """
    worst = 0.0
    for s in sensors:
        dist = s.distances_at(q)
        total = 0.0
        for n in range(n_updates):
            d = dist[n] if len(dist) > 1 else dist[0]
            total += 1.0 / s.frequency + d / c_prop
        worst = max(worst, total)
    return worst


def sojourn(buf: BufferConfig) -> float:
    if buf.service_rate <= buf.arrival_rate:
        raise UnstableQueue(
            f"service rate {buf.service_rate} does not exceed arrival rate {buf.arrival_rate}"
        )
    return 1.0 / (buf.service_rate - buf.arrival_rate)


def buffering_delay(buffers: Sequence[BufferConfig]) -> float:
    return sum(sojourn(b) for b in buffers)


def rendering_latency(
    frames: FrameConfig,
    c_client: float,
    m_client: float,
    t_buff: float,
    plan: OffloadPlan,
    l_tr_rem: float,
) -> float:
    """Full rendering latency including result delivery to the renderer.

    :func:`compose_frame_latency` does not use this value directly; it keeps
    the compute and buffer terms and counts remote delivery once through the
    transmission segment.
    """
    return (
        _compute_and_memory(frames.frame_area, frames.frame_bytes, c_client, m_client)
        + t_buff
        + plan.local * plan.local_result_latency
        + plan.remote * l_tr_rem
    )


def frame_conversion(frames: FrameConfig, c_client: float, m_client: float) -> float:
    return _compute_and_memory(frames.frame_area, frames.frame_bytes, c_client, m_client)


def encoding_latency(
    enc: EncoderConfig,
    frames: FrameConfig,
    c_client: float,
    m_client: float,
    coeffs: CoefficientSet = PAPER,
    warnings: list[str] | None = None,
) -> float:
    raw = encoding_latency_raw(enc, frames, coeffs)
    if raw < 0.0:
        if warnings is not None:
            warnings.append(f"encoding regression negative ({raw:.4g}); clamped to 0")
        raw = 0.0
    # regression output is read as milliseconds
    return raw / c_client / 1000.0 + frames.frame_bytes / m_client


def local_inference(
    frames: FrameConfig,
    c_client: float,
    m_client: float,
    cnn_local: CnnProfile,
    plan: OffloadPlan,
    coeffs: CoefficientSet = PAPER,
) -> float:
    complexity = cnn_complexity(cnn_local, coeffs)
    return plan.client_share * (
        frames.converted_area / (c_client * complexity) + frames.converted_bytes / m_client
    )


def decoding_latency(l_en: float, c_client: float, c_edge: float, discount: float) -> float:
    return l_en * c_client * discount / c_edge


def edge_compute(edge: EdgeProfile, c_client: float) -> float:
    return edge.compute if edge.compute is not None else EDGE_COMPUTE_RATIO * c_client


def remote_inference(
    frames: FrameConfig,
    edges: Sequence[EdgeProfile],
    plan: OffloadPlan,
    l_en: float,
    c_client: float,
    discount: float,
    encoded_area: float | None = None,
    coeffs: CoefficientSet = PAPER,
) -> float:
    """Slowest edge's weighted decode-plus-inference time.

    Each edge's share scales its own bracket once; the result is the max
    over edges, since edges run their parts in parallel.
    """
    if not edges:
        raise NoEdgeConfigured("remote inference requires at least one edge server")
    s_f3 = frames.frame_area if encoded_area is None else encoded_area
    worst = 0.0
    for edge in edges:
        c_e = edge_compute(edge, c_client)
        per_edge = (
            s_f3 / (c_e * cnn_complexity(edge.cnn, coeffs))
            + frames.encoded_bytes / edge.memory_bandwidth
            + decoding_latency(l_en, c_client, c_e, discount)
        )
        worst = max(worst, edge.task_share * per_edge)
    return worst


def transmission_latency(data_mb: float, net: NetworkProfile, distance: float) -> float:
    return data_mb * MB_TO_MBIT / net.throughput + distance / net.propagation_speed


def handoff_latency(net: NetworkProfile) -> float:
    return net.handoff_latency * net.handoff_probability


def cooperation_latency(net: NetworkProfile) -> float:
    return transmission_latency(net.coop_bytes, net, net.coop_distance)


def round_trip_latency(spec: ScenarioSpec) -> float:
    """Uplink frame plus downlink result over r_w, plus one round-trip propagation.

    Propagation uses the farthest edge that has a nonzero share.
    """
    net = spec.network
    active = [e.distance for e in spec.edges if e.task_share > 0.0]
    d = max(active, default=0.0)
    payload = spec.frames.encoded_bytes + spec.offload.result_bytes
    return payload * MB_TO_MBIT / net.throughput + 2.0 * d / net.propagation_speed


def compose_frame_latency(
    spec: ScenarioSpec, q: int = 1, coeffs: CoefficientSet = PAPER
) -> LatencyBreakdown:
    """End-to-end latency of frame ``q`` with every segment broken out."""
    warns: list[str] = []
    dev = spec.device
    frames = spec.frames
    plan = spec.offload
    c = compute_resource(dev.allocation, coeffs, warns)
    m = dev.memory_bandwidth

    fg = frame_generation(frames, c, m)
    vol = volumetric_generation(spec.volumetric, c, m) if spec.volumetric else 0.0
    ext = external_sensor_latency(
        spec.sensors, frames.updates_per_frame, spec.network.propagation_speed, q
    )
    t_buff = buffering_delay([spec.buffers[k] for k in sorted(spec.buffers)])
    ren = _compute_and_memory(frames.frame_area, frames.frame_bytes, c, m) + t_buff

    fc = loc = en = rem = tr = ho = coop = 0.0
    if plan.local == 1:
        fc = frame_conversion(frames, c, m)
        loc = local_inference(frames, c, m, dev.cnn, plan, coeffs)
    else:
        en = encoding_latency(spec.encoder, frames, c, m, coeffs, warns)
        rem = remote_inference(
            frames,
            spec.edges,
            plan,
            en,
            c,
            spec.encoder.decode_discount,
            spec.encoder.output_area,
            coeffs,
        )
        tr = round_trip_latency(spec)
        ho = handoff_latency(spec.network)
    if plan.include_coop:
        coop = cooperation_latency(spec.network)

    seg = dict(fg=fg, vol=vol, ext=ext, ren=ren, fc=fc, en=en, loc=loc, rem=rem, tr=tr, ho=ho, coop=coop)
    return LatencyBreakdown(
        q=q,
        **seg,
        total=gated_total(seg, plan.local, plan.include_coop),
        local=plan.local,
        include_coop=plan.include_coop,
        c_client=c,
        warnings=tuple(warns),
    )
