"""Fitted linear models: compute resource, mean power, CNN complexity, encoding.

Each model is a :class:`LinearModel` over named features.  A feature name
``"x^k"`` means the k-th power of the base variable ``x``; when a feature
column is absent from an observation it is derived from its base variable,
so measurement CSVs only need the raw regressors.

The published coefficient set is registered as ``"paper"``.  Refits can be
stored as named :class:`CoefficientSet` files and selected at evaluation
time.
"""

from __future__ import annotations

import csv
import json
import math
import os
import re
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
from scipy.linalg import qr, solve_triangular

from .errors import InsufficientData, RankDeficient
from .scenario import CnnProfile, ComputeAllocation, EncoderConfig, FrameConfig

COMPUTE_FLOOR = 1e-3
RANK_TOL = 1e-10

_POWER_RE = re.compile(r"^(?P<base>.+)\^(?P<exp>\d+)$")


@dataclass(frozen=True)
class LinearModel:
    intercept: float
    coefficients: tuple[float, ...]
    feature_names: tuple[str, ...]
    r_squared: float | None = None

    def __post_init__(self):
        if len(self.coefficients) != len(self.feature_names):
            raise ValueError(
                f"{len(self.coefficients)} coefficients for {len(self.feature_names)} features"
            )
        if self.r_squared is not None and not 0.0 <= self.r_squared <= 1.0:
            raise ValueError(f"r_squared {self.r_squared} outside [0, 1]")

    def predict(self, values: Mapping[str, float]) -> float:
        total = self.intercept
        for coef, name in zip(self.coefficients, self.feature_names):
            total += coef * feature_value(values, name)
        return total

    def to_dict(self) -> dict:
        return {
            "intercept": self.intercept,
            "coefficients": list(self.coefficients),
            "feature_names": list(self.feature_names),
            "r_squared": self.r_squared,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "LinearModel":
        return cls(
            intercept=float(d["intercept"]),
            coefficients=tuple(float(c) for c in d["coefficients"]),
            feature_names=tuple(d["feature_names"]),
            r_squared=None if d.get("r_squared") is None else float(d["r_squared"]),
        )


def feature_value(values: Mapping[str, float], name: str) -> float:
    if name in values:
        return values[name]
    m = _POWER_RE.match(name)
    if m and m["base"] in values:
        return values[m["base"]] ** int(m["exp"])
    raise KeyError(name)


@dataclass(frozen=True)
class CoefficientSet:
    """Named bundle of every regression model the latency/energy code uses."""

    name: str
    models: Mapping[str, LinearModel]
    version: int = 1

    def __getitem__(self, key: str) -> LinearModel:
        return self.models[key]

    def with_model(self, key: str, model: LinearModel, name: str | None = None) -> "CoefficientSet":
        if key not in MODEL_NAMES:
            raise KeyError(f"unknown model {key!r}; expected one of {MODEL_NAMES}")
        models = dict(self.models)
        models[key] = model
        return replace(self, name=name or self.name, models=models)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "version": self.version,
            "models": {k: m.to_dict() for k, m in self.models.items()},
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "CoefficientSet":
        models = dict(PAPER.models)
        models.update({k: LinearModel.from_dict(v) for k, v in d["models"].items()})
        return cls(name=d["name"], models=models, version=int(d.get("version", 1)))


PAPER = CoefficientSet(
    name="paper",
    models={
        "compute_cpu": LinearModel(18.24, (1.84, -6.02), ("f_c^2", "f_c"), 0.87),
        "compute_gpu": LinearModel(193.67, (400.96, -558.29), ("f_g^2", "f_g"), 0.87),
        "power_cpu": LinearModel(-20.74, (18.85, -3.64), ("f_c", "f_c^2"), 0.863),
        "power_gpu": LinearModel(-62.197, (187.48, -135.11), ("f_g", "f_g^2"), 0.863),
        "cnn_complexity": LinearModel(
            2.45, (0.0025, 0.03, 0.0029), ("d_cnn", "s_cnn", "d_scale"), 0.844
        ),
        "encoding": LinearModel(
            -574.36,
            (-7.71, 142.61, 53.38, 1.43, 163.65, 3.62),
            ("n_i", "n_b", "n_bitrate", "s_f1", "n_fps", "n_quant"),
            0.79,
        ),
    },
)
MODEL_NAMES = tuple(PAPER.models)


# --------------------------------------------------------------------------
# model evaluation


def _note(sink: list[str] | None, msg: str) -> None:
    if sink is not None and msg not in sink:
        sink.append(msg)


def compute_branches(alloc: ComputeAllocation, coeffs: CoefficientSet = PAPER) -> tuple[float, float]:
    """Raw CPU and GPU branch values of the compute regression."""
    cpu = coeffs["compute_cpu"].predict({"f_c": alloc.cpu_clock})
    gpu = coeffs["compute_gpu"].predict({"f_g": alloc.gpu_clock})
    return cpu, gpu


def compute_resource_raw(alloc: ComputeAllocation, coeffs: CoefficientSet = PAPER) -> float:
    cpu, gpu = compute_branches(alloc, coeffs)
    return alloc.cpu_share * cpu + (1.0 - alloc.cpu_share) * gpu


def compute_resource(
    alloc: ComputeAllocation, coeffs: CoefficientSet = PAPER, warnings: list[str] | None = None
) -> float:
    """Allocated compute c for a CPU/GPU split, floored at ``COMPUTE_FLOOR``."""
    c = compute_resource_raw(alloc, coeffs)
    if c <= 0.0:
        _note(warnings, f"compute regression non-positive ({c:.4g}); clamped to {COMPUTE_FLOOR}")
        return COMPUTE_FLOOR
    return c


def mean_power_raw(alloc: ComputeAllocation, coeffs: CoefficientSet = PAPER) -> float:
    cpu = coeffs["power_cpu"].predict({"f_c": alloc.cpu_clock})
    gpu = coeffs["power_gpu"].predict({"f_g": alloc.gpu_clock})
    return alloc.cpu_share * cpu + (1.0 - alloc.cpu_share) * gpu


def mean_power(
    alloc: ComputeAllocation,
    floor: float = 0.0,
    coeffs: CoefficientSet = PAPER,
    warnings: list[str] | None = None,
) -> float:
    """Mean device power in W.

    A negative regression value is replaced by ``floor`` (the device base
    power when called from the energy model) and a warning is recorded.
    """
    p = mean_power_raw(alloc, coeffs)
    if p < 0.0:
        _note(warnings, f"power regression negative ({p:.4g} W); clamped to {floor:.4g} W")
        return floor
    return p


def cnn_complexity(cnn: CnnProfile, coeffs: CoefficientSet = PAPER) -> float:
    return coeffs["cnn_complexity"].predict(
        {"d_cnn": cnn.depth, "s_cnn": cnn.size, "d_scale": cnn.depth_scale}
    )


def encoding_latency_raw(
    enc: EncoderConfig, frames: FrameConfig, coeffs: CoefficientSet = PAPER
) -> float:
    """Numerator of the encoding regression, in ms-scaled model units.

    The caller divides by c_client and adds the buffer read term.
    """
    return coeffs["encoding"].predict(
        {
            "n_i": enc.i_interval,
            "n_b": enc.b_interval,
            "n_bitrate": enc.bitrate,
            "s_f1": frames.frame_area * enc.unit_scale,
            "n_fps": frames.frame_rate,
            "n_quant": enc.quantization,
        }
    )


def quadratic_roots(model: LinearModel, var: str) -> tuple[float, float] | None:
    """Real roots of a model of the form a*x^2 + b*x + k, or None."""
    a = b = 0.0
    for coef, name in zip(model.coefficients, model.feature_names):
        if name == f"{var}^2":
            a = coef
        elif name == var:
            b = coef
    k = model.intercept
    if a == 0.0:
        return None if b == 0.0 else (-k / b, -k / b)
    disc = b * b - 4 * a * k
    if disc < 0:
        return None
    r = math.sqrt(disc)
    lo, hi = sorted(((-b - r) / (2 * a), (-b + r) / (2 * a)))
    return lo, hi


# --------------------------------------------------------------------------
# fitting


def fit_linear_model(
    rows: Sequence[Mapping[str, float]],
    target_column: str,
    feature_names: Sequence[str] | None = None,
) -> LinearModel:
    """Ordinary least squares with an intercept.

    Args:
        rows: observations, each a mapping of column name to value.
        target_column: name of the response column.
        feature_names: regressors in order. Defaults to every non-target
            column of the first row. ``"x^k"`` names are derived from
            ``x`` when missing.

    Returns:
        The fitted model with its in-sample R^2. A zero-variance target
        gets R^2 = 1 by convention.

    Raises:
        InsufficientData: fewer rows than unknowns.
        RankDeficient: the design matrix loses column rank.
    """
    if feature_names is None:
        if not rows:
            raise InsufficientData("no observations")
        feature_names = [k for k in rows[0] if k != target_column]
    feature_names = tuple(feature_names)
    p = len(feature_names) + 1
    if len(rows) < p:
        raise InsufficientData(f"{len(rows)} rows for {p} unknowns")

    X = np.empty((len(rows), p))
    y = np.empty(len(rows))
    X[:, 0] = 1.0
    for i, row in enumerate(rows):
        for j, name in enumerate(feature_names):
            X[i, j + 1] = feature_value(row, name)
        y[i] = row[target_column]

    beta = _lstsq(X, y)
    resid = y - X @ beta
    ss_res = float(resid @ resid)
    centered = y - y.mean()
    ss_tot = float(centered @ centered)
    if ss_tot == 0.0:
        r2 = 1.0
    else:
        r2 = min(1.0, max(0.0, 1.0 - ss_res / ss_tot))
    return LinearModel(
        intercept=float(beta[0]),
        coefficients=tuple(float(b) for b in beta[1:]),
        feature_names=feature_names,
        r_squared=r2,
    )


def _lstsq(X: np.ndarray, y: np.ndarray) -> np.ndarray:
    # column-pivoted QR: |R_kk| decreasing, so rank is read off the diagonal
    Q, R, piv = qr(X, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    if diag[0] == 0.0 or diag[-1] <= RANK_TOL * diag[0]:
        raise RankDeficient(
            f"design matrix is rank deficient (|R| ratio {diag[-1] / diag[0] if diag[0] else 0.0:.3g})"
        )
    z = solve_triangular(R, Q.T @ y)
    beta = np.empty_like(z)
    beta[piv] = z
    return beta


def read_observations(path: str | Path) -> list[dict[str, float]]:
    """Read a measurement CSV (header row, one observation per line)."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        rows = []
        for lineno, rec in enumerate(reader, start=2):
            try:
                rows.append({k.strip(): float(v) for k, v in rec.items()})
            except (TypeError, ValueError) as exc:
                raise ValueError(f"{path}:{lineno}: non-numeric value ({exc})") from exc
    return rows


# --------------------------------------------------------------------------
# registry


def default_registry_dir() -> Path:
    return Path(os.environ.get("XRPM_REGISTRY", Path.home() / ".xrpm" / "registry"))


def save_coefficients(cs: CoefficientSet, registry: str | Path | None = None) -> Path:
    if cs.name == "paper":
        raise ValueError("the built-in 'paper' set cannot be overwritten")
    directory = Path(registry) if registry is not None else default_registry_dir()
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / f"{cs.name}.json"
    path.write_text(json.dumps(cs.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def load_coefficients(name: str, registry: str | Path | None = None) -> CoefficientSet:
    if name == "paper":
        return PAPER
    directory = Path(registry) if registry is not None else default_registry_dir()
    path = directory / f"{name}.json"
    if not path.exists():
        raise FileNotFoundError(f"no coefficient set named {name!r} in {directory}")
    return CoefficientSet.from_dict(json.loads(path.read_text(encoding="utf-8")))


def list_coefficients(registry: str | Path | None = None) -> list[str]:
    directory = Path(registry) if registry is not None else default_registry_dir()
    names = ["paper"]
    if directory.is_dir():
        names += sorted(p.stem for p in directory.glob("*.json"))
    return names
