"""Per-frame energy from a latency breakdown, under constant power per segment."""

from __future__ import annotations

from dataclasses import dataclass, field

from .latency import LATENCY_FIELDS, LatencyBreakdown
from .regression import PAPER, CoefficientSet, mean_power
from .scenario import ScenarioSpec

# segments during which the device mostly waits on the network or the edge
IDLE_SEGMENTS = frozenset({"rem", "tr", "ho"})


@dataclass(frozen=True)
class EnergyBreakdown:
    """Per-segment energy for frame ``q`` in joules."""

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
    thermal: float
    base: float
    total: float
    thermal_fraction: float
    warnings: tuple[str, ...] = field(default=())

    def segments(self) -> dict[str, float]:
        return {name: getattr(self, name) for name in LATENCY_FIELDS}

    def subtotal(self) -> float:
        return sum(self.segments().values())

    def recompute_total(self) -> float:
        return self.subtotal() + self.thermal + self.base


def segment_energy(power: float, latency: float) -> float:
    return power * latency


def segment_powers(
    spec: ScenarioSpec, coeffs: CoefficientSet = PAPER, warnings: list[str] | None = None
) -> dict[str, float]:
    """Power drawn by the device in each segment (W), overrides applied."""
    dev = spec.device
    active = mean_power(dev.allocation, floor=dev.base_power, coeffs=coeffs, warnings=warnings)
    powers = {
        name: dev.wait_power if name in IDLE_SEGMENTS else active for name in LATENCY_FIELDS
    }
    powers.update(spec.segment_power)
    return powers


def compose_frame_energy(
    spec: ScenarioSpec, breakdown: LatencyBreakdown, coeffs: CoefficientSet = PAPER
) -> EnergyBreakdown:
    """Energy for the frame described by ``breakdown``.

    Gating is inherited from the latency breakdown: a gated-off segment has
    zero latency and so zero energy.  Thermal loss is a fixed fraction of
    the segment subtotal; base energy is base power over the frame's total
    latency.
    """
    warns: list[str] = []
    powers = segment_powers(spec, coeffs, warns)
    lat = breakdown.segments()
    seg = {name: segment_energy(powers[name], lat[name]) for name in LATENCY_FIELDS}
    subtotal = sum(seg.values())
    eta = spec.device.thermal_fraction
    thermal = eta * subtotal
    base = segment_energy(spec.device.base_power, breakdown.total)
    return EnergyBreakdown(
        q=breakdown.q,
        **seg,
        thermal=thermal,
        base=base,
        total=subtotal + thermal + base,
        thermal_fraction=eta,
        warnings=tuple(warns),
    )
