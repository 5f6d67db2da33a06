import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_doc
from xrpm.energy import IDLE_SEGMENTS, compose_frame_energy, segment_energy, segment_powers
from xrpm.latency import LATENCY_FIELDS, compose_frame_latency
from xrpm.regression import mean_power
from xrpm.scenario import ComputeAllocation, scenario_from_dict


def _spec(seed, **kw):
    return scenario_from_dict(random_doc(np.random.default_rng(seed), **kw))


def _uniform_power(spec, p):
    dev = dataclasses.replace(spec.device, thermal_fraction=0.0, base_power=0.0, wait_power=p)
    return dataclasses.replace(spec, device=dev, segment_power={k: p for k in LATENCY_FIELDS})


def test_segment_energy_examples():
    assert segment_energy(3.0, 0.1) == pytest.approx(0.3, abs=1e-15)
    assert segment_energy(3.0, 0.0) == 0.0
    p = mean_power(ComputeAllocation(2.84, 0.6, 1.0))
    assert segment_energy(p, 0.05) == pytest.approx(0.1717608, abs=1e-12)
    assert round(segment_energy(p, 0.05), 5) == 0.17176


def test_powers_active_and_idle(remote_spec):
    p = segment_powers(remote_spec)
    active = mean_power(remote_spec.device.allocation, floor=remote_spec.device.base_power)
    for name in LATENCY_FIELDS:
        want = remote_spec.device.wait_power if name in IDLE_SEGMENTS else active
        assert p[name] == want


def test_power_override(remote_spec):
    spec = dataclasses.replace(remote_spec, segment_power={"en": 9.0})
    lat = compose_frame_latency(spec)
    e = compose_frame_energy(spec, lat)
    assert e.en == 9.0 * lat.en


def test_resummation_oracle(remote_spec):
    lat = compose_frame_latency(remote_spec)
    e = compose_frame_energy(remote_spec, lat)
    dev = remote_spec.device
    p = mean_power(dev.allocation, floor=dev.base_power)
    seg = lat.segments()
    active = sum(v for k, v in seg.items() if k not in IDLE_SEGMENTS)
    idle = sum(v for k, v in seg.items() if k in IDLE_SEGMENTS)
    sub = p * active + dev.wait_power * idle
    want = sub * (1 + dev.thermal_fraction) + dev.base_power * lat.total
    assert e.total == pytest.approx(want, rel=1e-12)
    assert e.recompute_total() == pytest.approx(e.total, rel=1e-12)


def test_local_gating_mirror(local_spec):
    e = compose_frame_energy(local_spec, compose_frame_latency(local_spec))
    assert e.en == e.rem == e.tr == e.ho == 0.0
    assert e.fc > 0 and e.loc > 0


def test_negative_power_is_clamped_to_base(remote_spec):
    alloc = ComputeAllocation(2.84, 1.0, 0.0)
    dev = dataclasses.replace(remote_spec.device, allocation=alloc, base_power=0.3)
    spec = dataclasses.replace(remote_spec, device=dev)
    lat = compose_frame_latency(spec)
    e = compose_frame_energy(spec, lat)
    assert e.fg == pytest.approx(0.3 * lat.fg)
    assert any("power" in w for w in e.warnings)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.1, 10.0))
def test_constant_power_identity(seed, p):
    spec = _uniform_power(_spec(seed), p)
    lat = compose_frame_latency(spec)
    e = compose_frame_energy(spec, lat)
    assert math.isclose(e.total, p * lat.total, rel_tol=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_gating_and_zero_pattern(seed):
    spec = _spec(seed)
    lat = compose_frame_latency(spec)
    e = compose_frame_energy(spec, lat)
    for name in LATENCY_FIELDS:
        if getattr(lat, name) == 0.0:
            assert getattr(e, name) == 0.0
    if spec.offload.local:
        assert e.en == e.rem == e.tr == e.ho == 0.0
    else:
        assert e.fc == e.loc == 0.0


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_thermal_and_base(seed):
    spec = _spec(seed)
    lat = compose_frame_latency(spec)
    e = compose_frame_energy(spec, lat)
    eta = spec.device.thermal_fraction
    assert e.thermal == eta * e.subtotal()
    assert math.isclose(e.total, (1 + eta) * e.subtotal() + e.base, rel_tol=1e-12)
    assert e.base == spec.device.base_power * lat.total
    assert all(v >= 0 for v in e.segments().values())
