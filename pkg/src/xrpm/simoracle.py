"""Seeded discrete-event simulation used as ground truth for the analytic model.

Randomness comes from numpy's PCG64 bit generator.  Every random stream is
derived from the user seed through ``SeedSequence(seed, spawn_key=key)``
with a fixed key per purpose (M/M/1 arrivals, M/M/1 services, one pair per
sensor), so adding a sensor never shifts the draws of another.

Simultaneous events are ordered request < generate < arrive <
service_start < service_end, then by id.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .scenario import BufferConfig, SensorProfile

KIND_ORDER = {"request": 0, "generate": 1, "arrive": 2, "service_start": 3, "service_end": 4}

_MM1_ARRIVALS = (0,)
_MM1_SERVICES = (1,)
_SENSOR_STREAM = 2
_REQUEST_ID = -1


def stream(seed: int, key: tuple[int, ...]) -> np.random.Generator:
    """Independent PCG64 generator for ``key`` under the 64-bit ``seed``."""
    if not 0 <= seed < 2**64:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=key)))


class Event(NamedTuple):
    time: float
    kind: str
    id: tuple[int, int]

    def sort_key(self):
        return (self.time, KIND_ORDER[self.kind], self.id)


@dataclass(frozen=True)
class EventTimeline:
    events: tuple[Event, ...]
    seed: int
    horizon: int

    @classmethod
    def build(cls, events: Iterable[Event], seed: int, horizon: int) -> "EventTimeline":
        return cls(tuple(sorted(events, key=Event.sort_key)), seed, horizon)

    def to_ndjson(self) -> str:
        lines = [
            json.dumps({"time": repr(e.time), "kind": e.kind, "id": f"{e.id[0]}:{e.id[1]}"})
            for e in self.events
        ]
        return "\n".join(lines) + ("\n" if lines else "")


@dataclass(frozen=True)
class MM1Result:
    mean_sojourn: float
    utilization: float
    samples: int
    timeline: EventTimeline | None = None


def _fifo(arrivals: np.ndarray, services: np.ndarray) -> tuple[list[float], list[float]]:
    """Service start and end times of a single FIFO server."""
    starts, ends = [], []
    free_at = 0.0
    for a, s in zip(arrivals.tolist(), services.tolist()):
        start = a if a > free_at else free_at
        free_at = start + s
        starts.append(start)
        ends.append(free_at)
    return starts, ends


def mm1_sojourns(
    arrival_rate: float, service_rate: float, customers: int, rng_a, rng_s
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Arrival, service-start, service-end times and service draws for one sample path."""
    inter = rng_a.exponential(1.0 / arrival_rate, customers)
    service = rng_s.exponential(1.0 / service_rate, customers)
    arrivals = np.cumsum(inter)
    starts, ends = _fifo(arrivals, service)
    return arrivals, np.asarray(starts), np.asarray(ends), service


def simulate_mm1(
    arrival_rate: float,
    service_rate: float,
    customers: int,
    seed: int,
    warmup: int = 0,
    record_events: bool = False,
) -> MM1Result:
    """Mean time in system of a FIFO M/M/1 queue over ``customers`` arrivals.

    Unstable inputs are simulated as given; the mean then grows with the
    horizon. ``warmup`` customers are dropped from the statistics.
    """
    if arrival_rate <= 0 or service_rate <= 0 or customers < 1:
        raise ValueError("rates must be positive and customers >= 1")
    if not 0 <= warmup < customers:
        raise ValueError("warmup must be in [0, customers)")
    arrivals, starts, ends, service = mm1_sojourns(
        arrival_rate,
        service_rate,
        customers,
        stream(seed, _MM1_ARRIVALS),
        stream(seed, _MM1_SERVICES),
    )
    soj = ends[warmup:] - arrivals[warmup:]
    mean = math.fsum(soj.tolist()) / soj.size
    utilization = math.fsum(service.tolist()) / float(ends[-1])
    timeline = None
    if record_events:
        events = []
        for k in range(customers):
            events.append(Event(float(arrivals[k]), "arrive", (0, k)))
            events.append(Event(float(starts[k]), "service_start", (0, k)))
            events.append(Event(float(ends[k]), "service_end", (0, k)))
        timeline = EventTimeline.build(events, seed, customers)
    return MM1Result(mean_sojourn=mean, utilization=utilization, samples=int(soj.size), timeline=timeline)


@dataclass(frozen=True)
class AoiSimResult:
    samples: dict[str, list[float]]
    sojourns: dict[str, list[float]]
    timeline: EventTimeline | None = None

    def mean_sojourn(self) -> float:
        pooled = [x for v in self.sojourns.values() for x in v]
        return math.fsum(pooled) / len(pooled)


@dataclass(frozen=True)
class _Packet:
    n: int
    generated: float
    arrive: float
    start: float
    delivered: float
    sojourn: float


def _sensor_packets(
    m: int,
    sensor: SensorProfile,
    count: int,
    c_prop: float,
    buffer: BufferConfig,
    seed: int,
    stochastic: bool,
    warmup: int,
    q: int,
) -> list[_Packet]:
    dist = sensor.distances_at(q)
    if stochastic:
        q_arr, q_start, q_end, _ = mm1_sojourns(
            buffer.arrival_rate,
            buffer.service_rate,
            count + warmup,
            stream(seed, (_SENSOR_STREAM, m, 0)),
            stream(seed, (_SENSOR_STREAM, m, 1)),
        )
        waits = (q_start - q_arr)[warmup:].tolist()
        sojourns = (q_end - q_arr)[warmup:].tolist()
    else:
        stable = buffer.service_rate > buffer.arrival_rate
        t_bar = 1.0 / (buffer.service_rate - buffer.arrival_rate) if stable else math.inf
        waits = [0.0] * count
        sojourns = [t_bar] * count
    packets = []
    for n in range(1, count + 1):
        d = dist[min(n, len(dist)) - 1]
        generated = n / sensor.frequency
        prop = d / c_prop
        arrive = generated + prop
        packets.append(
            _Packet(
                n,
                generated,
                arrive,
                arrive + waits[n - 1],
                generated + (prop + sojourns[n - 1]),
                sojourns[n - 1],
            )
        )
    return packets


def _freshest(packets: Sequence[_Packet], requests: Sequence[float]) -> list[float]:
    """Age at use of the newest packet delivered by each request time.

    ``requests`` must be increasing. With nothing delivered yet, the device
    waits for the earliest delivery.
    """
    by_delivery = sorted(packets, key=lambda p: (p.delivered, p.n))
    ages = []
    i = 0
    newest = None
    for t in requests:
        while i < len(by_delivery) and by_delivery[i].delivered <= t:
            p = by_delivery[i]
            if newest is None or p.generated > newest.generated:
                newest = p
            i += 1
        if newest is not None:
            ages.append(t - newest.generated)
        else:
            first = by_delivery[0]
            ages.append(first.delivered - first.generated)
    return ages


def simulate_aoi(
    sensors: Sequence[SensorProfile],
    f_req: float,
    n_updates: int,
    buffer: BufferConfig,
    c_prop: float,
    seed: int = 0,
    policy: str = "paper",
    sojourn: str = "fixed",
    warmup: int = 0,
    q: int = 1,
    record_events: bool = False,
) -> AoiSimResult:
    """Replay sensor generation, propagation, buffering and request ticks.

    Args:
        policy: ``"paper"`` serves request n with packet n and reports
            delivery time minus request time; ``"freshest"`` serves each
            request with the newest delivered packet and reports its age
            at use.
        sojourn: ``"fixed"`` holds every packet in the buffer for the
            mean M/M/1 sojourn; ``"stochastic"`` takes each packet's
            wait and service from a simulated M/M/1 sample path.
    """
    if policy not in ("paper", "freshest"):
        raise ValueError(f"unknown policy {policy!r}")
    if sojourn not in ("fixed", "stochastic"):
        raise ValueError(f"unknown sojourn mode {sojourn!r}")
    if n_updates < 1:
        raise ValueError("n_updates must be >= 1")
    stochastic = sojourn == "stochastic"
    requests = [n / f_req for n in range(1, n_updates + 1)]
    samples: dict[str, list[float]] = {}
    sojourns: dict[str, list[float]] = {}
    events: list[Event] = []
    if record_events:
        events += [Event(t, "request", (_REQUEST_ID, n)) for n, t in enumerate(requests, 1)]

    for m, sensor in enumerate(sensors):
        if policy == "paper":
            count = n_updates
        else:
            # enough ticks to pass the last request by one period
            count = max(n_updates, math.floor(requests[-1] * sensor.frequency) + 2)
        packets = _sensor_packets(m, sensor, count, c_prop, buffer, seed, stochastic, warmup, q)
        name = sensor.name or f"s{m}"
        if policy == "paper":
            samples[name] = [p.delivered - t for p, t in zip(packets, requests)]
        else:
            samples[name] = _freshest(packets, requests)
        sojourns[name] = [p.sojourn for p in packets]
        if record_events:
            for p in packets:
                events.append(Event(p.generated, "generate", (m, p.n)))
                events.append(Event(p.arrive, "arrive", (m, p.n)))
                events.append(Event(p.start, "service_start", (m, p.n)))
                events.append(Event(p.delivered, "service_end", (m, p.n)))

    timeline = EventTimeline.build(events, seed, n_updates) if record_events else None
    return AoiSimResult(samples=samples, sojourns=sojourns, timeline=timeline)
