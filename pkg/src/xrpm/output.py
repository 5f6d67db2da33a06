"""CSV and text emission for evaluation results.

CSV numbers carry 9 significant digits, human reports 4.
"""

from __future__ import annotations

import csv
import io
import math
from typing import Sequence

from .evaluate import FrameResult
from .latency import LATENCY_FIELDS


def fmt(x: float) -> str:
    if isinstance(x, float) and math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.9g}"


def short(x: float) -> str:
    return f"{x:.4g}"


def write_csv(header: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def latency_csv(results: Sequence[FrameResult]) -> str:
    header = ["q", "c_client"] + [f"L_{k}_ms" for k in LATENCY_FIELDS] + ["L_tot_ms", "warnings"]
    rows = []
    for r in results:
        lat = r.latency
        rows.append(
            [str(lat.q), fmt(lat.c_client)]
            + [fmt(getattr(lat, k) * 1e3) for k in LATENCY_FIELDS]
            + [fmt(lat.total * 1e3), "; ".join(lat.warnings)]
        )
    return write_csv(header, rows)


def energy_csv(results: Sequence[FrameResult]) -> str:
    header = (
        ["q"]
        + [f"E_{k}_mJ" for k in LATENCY_FIELDS]
        + ["E_thermal_mJ", "E_base_mJ", "E_tot_mJ", "warnings"]
    )
    rows = []
    for r in results:
        e = r.energy
        rows.append(
            [str(e.q)]
            + [fmt(getattr(e, k) * 1e3) for k in LATENCY_FIELDS]
            + [fmt(e.thermal * 1e3), fmt(e.base * 1e3), fmt(e.total * 1e3), "; ".join(e.warnings)]
        )
    return write_csv(header, rows)


def aoi_csv(results: Sequence[FrameResult]) -> str:
    rows = []
    for r in results:
        for s in r.aoi.sensors:
            for n, (t, raw) in enumerate(zip(s.samples, s.raw_samples), start=1):
                flag = "negative-clamped" if raw < 0 else ""
                rows.append([str(r.aoi.q), s.sensor, str(n), fmt(t * 1e3), flag])
    return write_csv(["q", "sensor", "n", "t_sample_ms", "flags"], rows)


def aoi_summary_csv(results: Sequence[FrameResult]) -> str:
    rows = []
    for r in results:
        for s in r.aoi.sensors:
            rows.append(
                [
                    str(r.aoi.q),
                    s.sensor,
                    fmt(s.average * 1e3),
                    fmt(s.processed_frequency),
                    fmt(s.required_frequency),
                    fmt(s.roi),
                    str(s.fresh).lower(),
                    "; ".join(s.flags),
                ]
            )
    return write_csv(["q", "sensor", "A_ms", "f_processed_hz", "f_req_hz", "roi", "fresh", "flags"], rows)


def summary_text(results: Sequence[FrameResult], scenario_name: str, coeff_name: str) -> str:
    lines = [f"scenario: {scenario_name}", f"coefficients: {coeff_name}", f"frames: {len(results)}"]
    for r in results:
        lat, en = r.latency, r.energy
        mode = "local" if lat.local == 1 else "remote"
        lines.append("")
        lines.append(f"frame {lat.q} ({mode} inference), c_client = {short(lat.c_client)}")
        for k in LATENCY_FIELDS:
            lines.append(f"  L_{k:<5} {short(getattr(lat, k) * 1e3):>10} ms   E_{k:<5} {short(getattr(en, k) * 1e3):>10} mJ")
        lines.append(f"  L_tot   {short(lat.total * 1e3):>10} ms   E_tot   {short(en.total * 1e3):>10} mJ")
        lines.append(f"  E_thermal {short(en.thermal * 1e3)} mJ, E_base {short(en.base * 1e3)} mJ")
        for s in r.aoi.sensors:
            state = "fresh" if s.fresh else "stale"
            flags = f" [{', '.join(s.flags)}]" if s.flags else ""
            lines.append(
                f"  AoI {s.sensor}: A = {short(s.average * 1e3)} ms, RoI = {short(s.roi)} ({state}){flags}"
            )
        for w in dict.fromkeys(lat.warnings + en.warnings):
            lines.append(f"  warning: {w}")
    return "\n".join(lines) + "\n"
