import csv
import io
import json
import math
from pathlib import Path

import numpy as np
import pytest

from conftest import SCENARIOS, load_doc, with_changes
from xrpm.cli import main, parse_frames, set_path, sweep_values, UsageError
from xrpm.latency import LATENCY_FIELDS

REMOTE = str(SCENARIOS / "remote.json")
LOCAL = str(SCENARIOS / "local.json")
TRIO = str(SCENARIOS / "aoi_trio.json")


@pytest.fixture(autouse=True)
def _no_env_out(monkeypatch, tmp_path):
    monkeypatch.delenv("XRPM_OUT", raising=False)
    monkeypatch.setenv("XRPM_REGISTRY", str(tmp_path / "registry"))


def rows(path):
    return list(csv.DictReader(io.StringIO(Path(path).read_text())))


def run(*argv):
    return main([str(a) for a in argv])


def write_doc(tmp_path, doc, name="s.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return p


class TestEvaluate:
    def test_local_gating_in_output(self, tmp_path, capsys):
        assert run("evaluate", "--scenario", LOCAL, "--out", tmp_path) == 0
        r = rows(tmp_path / "latency.csv")[0]
        assert float(r["L_fc_ms"]) > 0 and float(r["L_loc_ms"]) > 0
        for k in ("en", "rem", "tr", "ho"):
            assert float(r[f"L_{k}_ms"]) == 0.0
        assert "L_loc" in capsys.readouterr().out

    def test_unstable_buffer_exit_2(self, tmp_path, capsys):
        doc = load_doc("remote.json")
        doc["buffer"]["frame"] = {"arrival_rate": 80, "service_rate": 80}
        assert run("evaluate", "--scenario", write_doc(tmp_path, doc), "--out", tmp_path / "o") == 2
        err = capsys.readouterr().err
        assert "buffer.frame" in err and "unstable queue" in err

    def test_csv_resums_to_total(self, tmp_path):
        assert run("evaluate", "--scenario", REMOTE, "--out", tmp_path, "--quiet") == 0
        for r in rows(tmp_path / "latency.csv"):
            parts = sum(float(r[f"L_{k}_ms"]) for k in LATENCY_FIELDS)
            assert parts == pytest.approx(float(r["L_tot_ms"]), rel=1e-8)
        for r in rows(tmp_path / "energy.csv"):
            parts = sum(float(v) for k, v in r.items() if k.startswith("E_") and k != "E_tot_mJ")
            assert parts == pytest.approx(float(r["E_tot_mJ"]), rel=1e-8)

    def test_output_files(self, tmp_path):
        run("evaluate", "--scenario", TRIO, "--out", tmp_path, "--quiet")
        for name in ("latency.csv", "energy.csv", "aoi.csv", "aoi_summary.csv", "summary.txt"):
            assert (tmp_path / name).is_file()
        summary = rows(tmp_path / "aoi_summary.csv")
        assert {r["sensor"] for r in summary} == {"s5ms", "s10ms", "s15ms"}
        assert len(rows(tmp_path / "aoi.csv")) == 18

    def test_frame_range(self, tmp_path):
        doc = with_changes(load_doc("remote.json"), frames={"frame_count": 5})
        p = write_doc(tmp_path, doc)
        assert run("evaluate", "--scenario", p, "--out", tmp_path / "o", "--frames", "2..4", "--quiet") == 0
        assert [r["q"] for r in rows(tmp_path / "o" / "latency.csv")] == ["2", "3", "4"]

    def test_jobs_do_not_change_output(self, tmp_path):
        doc = with_changes(load_doc("remote.json"), frames={"frame_count": 6})
        p = write_doc(tmp_path, doc)
        run("evaluate", "--scenario", p, "--out", tmp_path / "a", "--quiet")
        run("evaluate", "--scenario", p, "--out", tmp_path / "b", "--quiet", "--jobs", "4")
        assert (tmp_path / "a" / "latency.csv").read_bytes() == (tmp_path / "b" / "latency.csv").read_bytes()

    def test_missing_file_exit_1(self, tmp_path):
        assert run("evaluate", "--scenario", tmp_path / "nope.json", "--out", tmp_path) == 1

    def test_bad_json_exit_1(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text("{")
        assert run("evaluate", "--scenario", p, "--out", tmp_path) == 1

    def test_env_overrides_out(self, tmp_path, monkeypatch):
        monkeypatch.setenv("XRPM_OUT", str(tmp_path / "env"))
        assert run("evaluate", "--scenario", REMOTE, "--out", tmp_path / "flag", "--quiet") == 0
        assert (tmp_path / "env" / "latency.csv").is_file()
        assert not (tmp_path / "flag").exists()

    def test_validate(self, capsys):
        assert run("validate", "--scenario", REMOTE) == 0
        assert "ok" in capsys.readouterr().out


class TestSweep:
    def test_cpu_clock_sweep(self, tmp_path):
        assert run("sweep", "--scenario", REMOTE, "--param", "device.cpu_clock", "--range", "1.0:3.0:0.5",
                   "--out", tmp_path, "--quiet") == 0
        r = rows(tmp_path / "sweep.csv")
        assert [float(x["device.cpu_clock"]) for x in r] == [1.0, 1.5, 2.0, 2.5, 3.0]
        # compute grows with f_c only past the vertex of the CPU branch
        vertex = 6.02 / (2 * 1.84)
        clean = [float(x["L_tot_ms"]) for x in r if not x["warnings"] and float(x["device.cpu_clock"]) >= vertex]
        assert len(clean) >= 3
        assert all(b <= a for a, b in zip(clean, clean[1:]))

    def test_cpu_share_sweep_is_linear_in_c(self, tmp_path):
        assert run("sweep", "--scenario", REMOTE, "--param", "device.cpu_share", "--range", "0:1:0.25",
                   "--out", tmp_path, "--quiet") == 0
        r = rows(tmp_path / "sweep.csv")
        w = np.array([float(x["device.cpu_share"]) for x in r])
        c = np.array([float(x["c_client"]) for x in r])
        assert len(w) == 5
        line = c[0] + w * (c[-1] - c[0])
        assert np.allclose(c, line, rtol=1e-8)

    def test_empty_values_exit_1(self, tmp_path):
        assert run("sweep", "--scenario", REMOTE, "--param", "device.cpu_clock", "--values", "",
                   "--out", tmp_path) == 1

    def test_unknown_param_exit_1(self, tmp_path):
        assert run("sweep", "--scenario", REMOTE, "--param", "device.turbo", "--values", "1",
                   "--out", tmp_path) == 1

    def test_list_index_path(self, tmp_path):
        assert run("sweep", "--scenario", REMOTE, "--param", "edges.0.distance", "--values", "10,1000",
                   "--out", tmp_path, "--quiet") == 0
        r = rows(tmp_path / "sweep.csv")
        assert float(r[1]["L_tr_ms"]) > float(r[0]["L_tr_ms"])

    def test_invalid_point_exit_2(self, tmp_path):
        assert run("sweep", "--scenario", REMOTE, "--param", "device.cpu_share", "--values", "0.5,1.5",
                   "--out", tmp_path) == 2

    def test_rows_sorted(self, tmp_path):
        run("sweep", "--scenario", REMOTE, "--param", "network.throughput", "--values", "300,50,100",
            "--out", tmp_path, "--quiet", "--jobs", "3")
        assert [float(x["network.throughput"]) for x in rows(tmp_path / "sweep.csv")] == [50, 100, 300]

    def test_helpers(self):
        assert sweep_values(None, "1:2:0.5") == [1.0, 1.5, 2.0]
        assert parse_frames("3", 5) == [3]
        assert parse_frames(None, 2) == [1, 2]
        with pytest.raises(UsageError):
            parse_frames("4..2", 5)
        with pytest.raises(UsageError):
            sweep_values(None, "2:1:0.5")
        doc = set_path({"a": {"b": [1.0, 2.0]}}, "a.b.1", 7.0)
        assert doc == {"a": {"b": [1.0, 7.0]}}


class TestSimulate:
    def test_mm1(self, tmp_path):
        doc = load_doc("remote.json")
        doc["buffer"]["external"] = {"arrival_rate": 50, "service_rate": 100}
        p = write_doc(tmp_path, doc)
        assert run("simulate", "--scenario", p, "--mode", "mm1", "--horizon", "1000000", "--seed", "7",
                   "--out", tmp_path / "o", "--quiet") == 0
        r = {x["quantity"]: x for x in rows(tmp_path / "o" / "comparison.csv")}
        assert abs(float(r["mean_sojourn_s"]["rel_err"])) <= 0.02
        stats = json.loads((tmp_path / "o" / "sim_stats.json").read_text())
        assert stats["analytic_mean_sojourn"] == pytest.approx(0.02)

    def test_aoi_fixed_zero_deviation(self, tmp_path):
        assert run("simulate", "--scenario", TRIO, "--mode", "aoi", "--out", tmp_path, "--quiet") == 0
        for r in rows(tmp_path / "comparison.csv"):
            if r["sensor"] != "buffer_sojourn":
                assert float(r["max_abs_dev_ms"]) <= 1e-9

    def test_repeat_is_byte_identical(self, tmp_path):
        for d in ("a", "b"):
            run("simulate", "--scenario", TRIO, "--mode", "aoi", "--sojourn", "stochastic", "--horizon", "200",
                "--seed", "5", "--events", "--out", tmp_path / d, "--quiet")
        for name in ("sim_stats.json", "comparison.csv", "events.ndjson"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_missing_buffer_exit_1(self, tmp_path):
        assert run("simulate", "--scenario", TRIO, "--mode", "mm1", "--buffer", "nope", "--out", tmp_path) == 1


def _cnn_csv(path, coef=(2.45, 0.0025, 0.03, 0.0029), rank_deficient=False, n=40):
    rng = np.random.default_rng(0)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["d_cnn", "s_cnn", "d_scale", "complexity"])
        for _ in range(n):
            d, s = rng.uniform(0, 300), rng.uniform(1, 250)
            sc = 0.0 if rank_deficient else rng.uniform(0, 400)
            w.writerow([repr(d), repr(s), repr(sc), repr(coef[0] + coef[1] * d + coef[2] * s + coef[3] * sc)])
    return path


class TestFit:
    def test_round_trip(self, tmp_path, capsys):
        p = _cnn_csv(tmp_path / "cnn.csv")
        assert run("fit", "--csv", p, "--model", "cnn_complexity", "--target", "complexity",
                   "--export", tmp_path / "m.json") == 0
        model = json.loads((tmp_path / "m.json").read_text())
        got = [model["intercept"], *model["coefficients"]]
        for g, want in zip(got, (2.45, 0.0025, 0.03, 0.0029)):
            assert g == pytest.approx(want, rel=1e-6)
        assert model["r_squared"] == pytest.approx(1.0)
        out = capsys.readouterr().out
        printed = [float(line.split()[-1]) for line in out.splitlines()[1:5]]
        assert printed == pytest.approx([2.45, 0.0025, 0.03, 0.0029], rel=1e-6)

    def test_rank_deficient_exit_2(self, tmp_path, capsys):
        p = _cnn_csv(tmp_path / "cnn.csv", rank_deficient=True)
        assert run("fit", "--csv", p, "--model", "cnn_complexity", "--target", "complexity") == 2
        assert "RankDeficient" in capsys.readouterr().err

    def test_unknown_model_exit_1(self, tmp_path):
        p = _cnn_csv(tmp_path / "cnn.csv")
        assert run("fit", "--csv", p, "--model", "magic", "--target", "complexity") == 1

    def test_registered_set_changes_only_cnn_users(self, tmp_path):
        p = _cnn_csv(tmp_path / "cnn.csv", coef=(4.0, 0.01, 0.05, 0.002))
        reg = tmp_path / "reg"
        assert run("fit", "--csv", p, "--model", "cnn_complexity", "--target", "complexity",
                   "--register", "mine", "--registry", reg) == 0
        run("evaluate", "--scenario", REMOTE, "--out", tmp_path / "paper", "--quiet")
        assert run("evaluate", "--scenario", REMOTE, "--out", tmp_path / "mine", "--quiet",
                   "--coefficients", "mine", "--registry", reg) == 0
        a = rows(tmp_path / "paper" / "latency.csv")[0]
        b = rows(tmp_path / "mine" / "latency.csv")[0]
        changed = {k for k in a if a[k] != b[k]}
        assert changed == {"L_rem_ms", "L_tot_ms"}

        run("evaluate", "--scenario", LOCAL, "--out", tmp_path / "lp", "--quiet")
        run("evaluate", "--scenario", LOCAL, "--out", tmp_path / "lm", "--quiet",
            "--coefficients", "mine", "--registry", reg)
        a = rows(tmp_path / "lp" / "latency.csv")[0]
        b = rows(tmp_path / "lm" / "latency.csv")[0]
        assert {k for k in a if a[k] != b[k]} == {"L_loc_ms", "L_tot_ms"}

    def test_unknown_coefficient_set_exit_1(self, tmp_path):
        assert run("evaluate", "--scenario", REMOTE, "--out", tmp_path, "--coefficients", "ghost",
                   "--registry", tmp_path / "empty") == 1


def test_determinism_across_commands(tmp_path):
    cmds = {
        "evaluate": ["evaluate", "--scenario", REMOTE],
        "sweep": ["sweep", "--scenario", REMOTE, "--param", "device.cpu_clock", "--range", "1.8:3.0:0.4"],
        "simulate": ["simulate", "--scenario", TRIO, "--mode", "mm1", "--horizon", "20000", "--seed", "3", "--events"],
    }
    for name, argv in cmds.items():
        for d in ("a", "b"):
            assert run(*argv, "--out", tmp_path / name / d, "--quiet") == 0
        files = sorted(f.name for f in (tmp_path / name / "a").iterdir())
        assert files
        for f in files:
            assert (tmp_path / name / "a" / f).read_bytes() == (tmp_path / name / "b" / f).read_bytes()
    assert not math.isnan(float(rows(tmp_path / "sweep" / "a" / "sweep.csv")[0]["L_tot_ms"]))
