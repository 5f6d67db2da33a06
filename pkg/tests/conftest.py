import copy
import json
from pathlib import Path

import numpy as np
import pytest

from xrpm.scenario import scenario_from_dict

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"


def load_doc(name: str) -> dict:
    return json.loads((SCENARIOS / name).read_text())


def with_changes(doc: dict, **sections) -> dict:
    """Deep copy of ``doc`` with top-level sections shallow-updated."""
    new = copy.deepcopy(doc)
    for key, value in sections.items():
        if isinstance(value, dict) and isinstance(new.get(key), dict):
            new[key].update(value)
        else:
            new[key] = value
    return new


def random_doc(rng: np.random.Generator, local: int | None = None, n_edges: int | None = None) -> dict:
    """A random scenario that passes validation with the built-in coefficients.

    Clocks stay inside the regions where the compute and power regressions
    are positive, so no clamping happens.
    """
    if local is None:
        local = int(rng.integers(0, 2))
    if n_edges is None:
        n_edges = int(rng.integers(1, 4))
    frame_bytes = rng.uniform(0.5, 8.0)
    n_updates = int(rng.integers(1, 6))
    edge_w = rng.dirichlet(np.ones(n_edges)) if n_edges else np.array([])
    client = 1.0 if local else 0.0
    edges = [
        {
            "memory_bandwidth": rng.uniform(1e4, 2e5),
            "cnn": {"depth": float(rng.integers(10, 700)), "size": rng.uniform(1, 250)},
            "task_share": float(w) * (0.0 if local else 1.0),
            "distance": rng.uniform(0, 500),
        }
        for w in edge_w
    ]
    sensors = [
        {
            "id": f"s{i}",
            "frequency": rng.uniform(20, 400),
            "distances": [rng.uniform(0, 1000) for _ in range(n_updates)],
        }
        for i in range(int(rng.integers(0, 4)))
    ]
    return {
        "device": {
            "cpu_clock": rng.uniform(1.7, 3.2),
            "gpu_clock": rng.uniform(0.56, 0.64),
            "cpu_share": rng.uniform(0.0, 1.0),
            "memory_bandwidth": rng.uniform(5e3, 6e4),
            "cnn": {"depth": float(rng.integers(10, 200)), "size": rng.uniform(1, 30)},
        },
        "power": {
            "base_power": rng.uniform(0, 0.5),
            "thermal_fraction": rng.uniform(0, 0.2),
            "wait_power": rng.uniform(0.2, 1.5),
        },
        "frames": {
            "frame_rate": rng.uniform(10, 90),
            "frame_area": rng.uniform(0.1, 8.0),
            "frame_bytes": frame_bytes,
            "converted_area": rng.uniform(0.05, 1.0),
            "converted_bytes": rng.uniform(0.05, 1.0),
            "encoded_bytes": frame_bytes * rng.uniform(0.01, 0.5),
            "frame_count": int(rng.integers(1, 4)),
            "updates_per_frame": n_updates,
        },
        "encoder": {
            "i_interval": float(rng.integers(1, 60)),
            "b_interval": float(rng.integers(0, 4)),
            "bitrate": rng.uniform(1, 20),
            "quantization": float(rng.integers(10, 40)),
        },
        "edges": edges,
        "network": {
            "throughput": rng.uniform(5, 500),
            "handoff_latency": rng.uniform(0, 0.3),
            "handoff_probability": rng.uniform(0, 1),
            "coop_distance": rng.uniform(0, 100),
            "coop_bytes": rng.uniform(0, 2),
        },
        "sensors": sensors,
        "buffer": {
            "frame": {"arrival_rate": rng.uniform(1, 100), "service_rate": rng.uniform(150, 2000)},
            "volumetric": {"arrival_rate": rng.uniform(1, 100), "service_rate": rng.uniform(150, 2000)},
            "external": {"arrival_rate": rng.uniform(1, 100), "service_rate": rng.uniform(150, 2000)},
        },
        "offload": {
            "local": local,
            "client_share": client,
            "task_total": 1.0,
            "include_coop": bool(rng.integers(0, 2)),
            "local_result_latency": rng.uniform(0, 0.01),
        },
        "volumetric": {"scene_area": rng.uniform(0.1, 4), "scene_bytes": rng.uniform(0.1, 4)},
    }


@pytest.fixture
def remote_doc():
    return load_doc("remote.json")


@pytest.fixture
def local_doc():
    return load_doc("local.json")


@pytest.fixture
def remote_spec(remote_doc):
    return scenario_from_dict(remote_doc)


@pytest.fixture
def local_spec(local_doc):
    return scenario_from_dict(local_doc)
