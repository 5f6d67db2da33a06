"""Command-line front end.

Subcommands: evaluate, sweep, simulate, fit, validate.
Exit codes: 0 success, 1 I/O or parse failure, 2 validation or model error.
"""

from __future__ import annotations

import argparse
import copy
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any, Sequence

from . import output
from .aoi import aoi_samples, average_aoi, mean_sojourn
from .errors import InsufficientData, RankDeficient, ScenarioError, XrpmError
from .evaluate import evaluate_frame, evaluate_frames
from .latency import LATENCY_FIELDS, compose_frame_latency
from .regression import (
    MODEL_NAMES,
    PAPER,
    fit_linear_model,
    load_coefficients,
    read_observations,
    save_coefficients,
)
from .scenario import scenario_from_dict
from .simoracle import simulate_aoi, simulate_mm1
from .validation import validate_scenario

EXIT_OK, EXIT_IO, EXIT_MODEL = 0, 1, 2


class UsageError(Exception):
    """Bad flag values; reported with exit code 1."""


def _err(msg: str) -> None:
    print(f"xrpm: {msg}", file=sys.stderr)


def _out_dir(args) -> Path:
    out = Path(os.environ.get("XRPM_OUT") or args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write(path: Path, text: str) -> None:
    path.write_text(text, encoding="utf-8")


def _load_doc(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}: invalid JSON ({exc})") from exc


def parse_frames(text: str | None, frame_count: int) -> list[int]:
    if not text:
        return list(range(1, frame_count + 1))
    try:
        if ".." in text:
            a, b = text.split("..", 1)
            lo, hi = int(a), int(b)
        else:
            lo = hi = int(text)
    except ValueError:
        raise UsageError(f"bad frame range {text!r}; expected a..b") from None
    if lo < 1 or hi < lo:
        raise UsageError(f"bad frame range {text!r}")
    return list(range(lo, hi + 1))


def _check(spec, coeffs) -> bool:
    report = validate_scenario(spec, coeffs)
    for issue in report.issues:
        print(str(issue), file=sys.stderr)
    return report.ok


# --------------------------------------------------------------------------
# evaluate / validate


def cmd_validate(args) -> int:
    spec = scenario_from_dict(_load_doc(args.scenario))
    report = validate_scenario(spec, load_coefficients(args.coefficients, args.registry))
    for issue in report.issues:
        print(str(issue))
    if report.ok:
        print(f"ok ({len(report.warnings)} warning(s))")
        return EXIT_OK
    return EXIT_MODEL


def cmd_evaluate(args) -> int:
    spec = scenario_from_dict(_load_doc(args.scenario))
    coeffs = load_coefficients(args.coefficients, args.registry)
    if not _check(spec, coeffs):
        return EXIT_MODEL
    results = evaluate_frames(spec, parse_frames(args.frames, spec.frames.frame_count), coeffs, args.jobs)
    out = _out_dir(args)
    _write(out / "latency.csv", output.latency_csv(results))
    _write(out / "energy.csv", output.energy_csv(results))
    _write(out / "aoi.csv", output.aoi_csv(results))
    _write(out / "aoi_summary.csv", output.aoi_summary_csv(results))
    summary = output.summary_text(results, Path(args.scenario).name, coeffs.name)
    _write(out / "summary.txt", summary)
    if not args.quiet:
        print(summary, end="")
    return EXIT_OK


# --------------------------------------------------------------------------
# sweep


def _resolve(doc: Any, path: str) -> tuple[Any, str | int]:
    parts = path.split(".")
    node = doc
    for part in parts[:-1]:
        node = node[int(part)] if isinstance(node, list) else node[part]
    last: str | int = int(parts[-1]) if isinstance(node, list) else parts[-1]
    return node, last


def set_path(doc: dict, path: str, value: float) -> dict:
    """Copy of ``doc`` with the numeric field at dotted ``path`` replaced."""
    new = copy.deepcopy(doc)
    try:
        node, key = _resolve(new, path)
        current = node[key]
    except (KeyError, IndexError, ValueError, TypeError):
        raise UsageError(f"sweep target {path!r} does not exist in the scenario") from None
    if isinstance(current, bool) or not isinstance(current, (int, float)):
        raise UsageError(f"sweep target {path!r} is not a numeric scalar")
    node[key] = value
    return new


def sweep_values(values: str | None, range_: str | None) -> list[float]:
    if values is not None:
        try:
            vals = [float(v) for v in values.split(",") if v.strip()]
        except ValueError:
            raise UsageError(f"bad value list {values!r}") from None
    elif range_ is not None:
        try:
            start, stop, step = (float(x) for x in range_.split(":"))
        except ValueError:
            raise UsageError(f"bad range {range_!r}; expected start:stop:step") from None
        if step <= 0 or stop < start:
            raise UsageError(f"bad range {range_!r}")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        vals = [start + i * step for i in range(count)]
    else:
        raise UsageError("sweep needs --values or --range")
    if not vals:
        raise UsageError("empty sweep value list")
    return sorted(vals)


def cmd_sweep(args) -> int:
    doc = _load_doc(args.scenario)
    coeffs = load_coefficients(args.coefficients, args.registry)
    values = sweep_values(args.values, args.range)
    specs = []
    for v in values:
        spec = scenario_from_dict(set_path(doc, args.param, v))
        report = validate_scenario(spec, coeffs)
        if not report.ok:
            for issue in report.errors:
                _err(f"{args.param}={v:g}: {issue}")
            return EXIT_MODEL
        specs.append(spec)

    def run(spec):
        return evaluate_frame(spec, args.frame, coeffs)

    if args.jobs > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(run, specs))
    else:
        results = [run(s) for s in specs]

    header = (
        [args.param, "q", "c_client"]
        + [f"L_{k}_ms" for k in LATENCY_FIELDS]
        + ["L_tot_ms", "E_tot_mJ", "warnings"]
    )
    rows = []
    for v, r in zip(values, results):
        lat = r.latency
        rows.append(
            [output.fmt(v), str(lat.q), output.fmt(lat.c_client)]
            + [output.fmt(getattr(lat, k) * 1e3) for k in LATENCY_FIELDS]
            + [output.fmt(lat.total * 1e3), output.fmt(r.energy.total * 1e3)]
            + ["; ".join(dict.fromkeys(lat.warnings + r.energy.warnings))]
        )
    text = output.write_csv(header, rows)
    out = _out_dir(args)
    _write(out / "sweep.csv", text)
    if not args.quiet:
        print(f"wrote {len(rows)} rows to {out / 'sweep.csv'}")
    return EXIT_OK


# --------------------------------------------------------------------------
# simulate


def _rel_err(sim: float, ref: float) -> float:
    if ref == 0.0:
        return 0.0 if sim == 0.0 else math.inf
    return (sim - ref) / ref


def cmd_simulate(args) -> int:
    spec = scenario_from_dict(_load_doc(args.scenario))
    out = _out_dir(args)
    if args.buffer not in spec.buffers:
        raise UsageError(f"scenario has no buffer class {args.buffer!r}")
    buf = spec.buffers[args.buffer]
    stats: dict[str, Any] = {"mode": args.mode, "seed": args.seed}
    rows: list[list[str]] = []

    if args.mode == "mm1":
        customers = args.horizon or 1_000_000
        res = simulate_mm1(
            buf.arrival_rate, buf.service_rate, customers, args.seed, args.warmup, bool(args.events)
        )
        stable = buf.service_rate > buf.arrival_rate
        analytic = 1.0 / (buf.service_rate - buf.arrival_rate) if stable else math.inf
        rho = buf.arrival_rate / buf.service_rate
        stats.update(
            arrival_rate=buf.arrival_rate,
            service_rate=buf.service_rate,
            customers=customers,
            warmup=args.warmup,
            samples=res.samples,
            mean_sojourn=res.mean_sojourn,
            analytic_mean_sojourn=analytic,
            utilization=res.utilization,
        )
        header = ["quantity", "analytic", "simulated", "rel_err"]
        rows.append(["mean_sojourn_s", output.fmt(analytic), output.fmt(res.mean_sojourn), output.fmt(_rel_err(res.mean_sojourn, analytic))])
        rows.append(["utilization", output.fmt(rho), output.fmt(res.utilization), output.fmt(_rel_err(res.utilization, rho))])
        timeline = res.timeline
    else:
        if not spec.sensors:
            raise XrpmError("scenario has no sensors to simulate")
        n = args.horizon or spec.frames.updates_per_frame
        for s in spec.sensors:
            if len(s.distances_at(1)) > 1 and len(s.distances_at(1)) < n:
                raise XrpmError(f"sensor {s.name}: {len(s.distances_at(1))} distances for {n} updates")
        lat = compose_frame_latency(spec, 1, load_coefficients(args.coefficients, args.registry))
        f_req = spec.frames.request_rate or spec.frames.updates_per_frame / lat.total
        c_prop = spec.network.propagation_speed
        t_bar = mean_sojourn(buf)
        sim = simulate_aoi(
            spec.sensors,
            f_req,
            n,
            buf,
            c_prop,
            seed=args.seed,
            policy=args.policy,
            sojourn=args.sojourn,
            warmup=args.warmup,
            record_events=bool(args.events),
        )
        header = ["sensor", "analytic_mean_ms", "simulated_mean_ms", "rel_err", "max_abs_dev_ms"]
        per_sensor = {}
        for s in spec.sensors:
            ana = aoi_samples(s, n, f_req, t_bar, c_prop)
            got = sim.samples[s.name]
            dev = max(abs(a - b) for a, b in zip(ana, got))
            a_mean, s_mean = average_aoi(ana), average_aoi(got)
            rows.append([s.name, output.fmt(a_mean * 1e3), output.fmt(s_mean * 1e3), output.fmt(_rel_err(s_mean, a_mean)), output.fmt(dev * 1e3)])
            per_sensor[s.name] = {"analytic_mean": a_mean, "simulated_mean": s_mean, "max_abs_dev": dev}
        soj = sim.mean_sojourn()
        rows.append(["buffer_sojourn", output.fmt(t_bar * 1e3), output.fmt(soj * 1e3), output.fmt(_rel_err(soj, t_bar)), ""])
        stats.update(
            policy=args.policy,
            sojourn=args.sojourn,
            updates=n,
            request_rate=f_req,
            analytic_mean_sojourn=t_bar,
            mean_sojourn=soj,
            sensors=per_sensor,
        )
        timeline = sim.timeline

    _write(out / "sim_stats.json", json.dumps(stats, indent=2, sort_keys=True) + "\n")
    table = output.write_csv(header, rows)
    _write(out / "comparison.csv", table)
    if args.events and timeline is not None:
        _write(out / "events.ndjson", timeline.to_ndjson())
    if not args.quiet:
        print(table, end="")
    return EXIT_OK


# --------------------------------------------------------------------------
# fit


def cmd_fit(args) -> int:
    if args.model not in MODEL_NAMES:
        raise UsageError(f"unknown model {args.model!r}; choose from {', '.join(MODEL_NAMES)}")
    rows = read_observations(args.csv)
    features = PAPER[args.model].feature_names
    try:
        model = fit_linear_model(rows, args.target, features)
    except KeyError as exc:
        raise UsageError(f"column {exc} missing from {args.csv}") from None
    print(f"model: {args.model}  (target {args.target}, {len(rows)} rows)")
    print(f"  intercept  {model.intercept:.10g}")
    for name, coef in zip(model.feature_names, model.coefficients):
        print(f"  {name:<10} {coef:.10g}")
    print(f"  R^2        {model.r_squared:.10g}")
    if args.export:
        Path(args.export).write_text(json.dumps(model.to_dict(), indent=2) + "\n", encoding="utf-8")
    if args.register:
        try:
            base = load_coefficients(args.register, args.registry)
        except FileNotFoundError:
            base = PAPER
        path = save_coefficients(base.with_model(args.model, model, name=args.register), args.registry)
        print(f"registered as {args.register!r} ({path})")
    return EXIT_OK


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="xrpm", description="XR pipeline latency, energy and AoI model")
    sub = p.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default="xrpm_out", help="output directory (XRPM_OUT overrides)")
    common.add_argument("--coefficients", default="paper", help="coefficient set name")
    common.add_argument("--registry", default=None, help="coefficient registry directory")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--frames", default=None, help="frame range a..b (1-based, inclusive)")
    common.add_argument("--jobs", type=int, default=1)
    common.add_argument("--quiet", action="store_true")

    ev = sub.add_parser("evaluate", parents=[common], help="latency/energy/AoI for each frame")
    ev.add_argument("--scenario", required=True)
    ev.set_defaults(func=cmd_evaluate)

    va = sub.add_parser("validate", parents=[common], help="check a scenario")
    va.add_argument("--scenario", required=True)
    va.set_defaults(func=cmd_validate)

    sw = sub.add_parser("sweep", parents=[common], help="vary one numeric field")
    sw.add_argument("--scenario", required=True)
    sw.add_argument("--param", required=True, help="dotted path, e.g. device.cpu_clock or edges.0.distance")
    sw.add_argument("--values", default=None, help="comma-separated values")
    sw.add_argument("--range", default=None, help="start:stop:step, stop inclusive")
    sw.add_argument("--frame", type=int, default=1)
    sw.set_defaults(func=cmd_sweep)

    si = sub.add_parser("simulate", parents=[common], help="run the discrete-event oracle")
    si.add_argument("--scenario", required=True)
    si.add_argument("--mode", choices=("mm1", "aoi"), required=True)
    si.add_argument("--horizon", type=int, default=None, help="customers (mm1) or requests (aoi)")
    si.add_argument("--buffer", default="external", help="buffer class to simulate")
    si.add_argument("--sojourn", choices=("fixed", "stochastic"), default="fixed")
    si.add_argument("--policy", choices=("paper", "freshest"), default="paper")
    si.add_argument("--warmup", type=int, default=0)
    si.add_argument("--events", action="store_true", help="also write events.ndjson")
    si.set_defaults(func=cmd_simulate)

    fi = sub.add_parser("fit", parents=[common], help="refit a regression model from a CSV")
    fi.add_argument("--csv", required=True)
    fi.add_argument("--model", required=True, help=f"one of {', '.join(MODEL_NAMES)}")
    fi.add_argument("--target", required=True)
    fi.add_argument("--register", default=None, help="store the refit under this coefficient-set name")
    fi.add_argument("--export", default=None, help="write the fitted model as JSON")
    fi.set_defaults(func=cmd_fit)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (RankDeficient, InsufficientData) as exc:
        _err(f"{type(exc).__name__}: {exc}")
        return EXIT_MODEL
    except ScenarioError as exc:
        _err(str(exc))
        return EXIT_IO
    except XrpmError as exc:
        _err(f"{type(exc).__name__}: {exc}")
        return EXIT_MODEL
    except (OSError, UsageError, ValueError) as exc:
        _err(str(exc))
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
