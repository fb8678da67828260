#!/usr/bin/env python3

import json

import polars as pl
import pytest

from optopix import __version__
from optopix.cli import atomic_write, main, manifest_path, write_together
from optopix.fitting import synthesize_rc_trace


def read_json(path):
    with open(path, encoding="utf-8") as handle:
        return json.load(handle)


def test_simulate_writes_trace_and_manifest(tmp_path, capsys):
    out = tmp_path / "trace.csv"
    code = main(["--out", str(out), "simulate", "--power", "2.47",
                 "--pulse", "0.05"])
    assert code == 0
    trace = pl.read_csv(out)
    assert trace.columns == ["t_s", "T_abs_K", "T_air_K",
                             "P_Pa", "F_N", "z_m"]
    # observed peak of 527 C
    peak_celsius = trace["T_abs_K"].max() - 273.15
    assert peak_celsius == pytest.approx(527.0, rel=0.1)
    manifest = read_json(manifest_path(out))
    assert manifest["command"] == "simulate"
    assert manifest["tool_version"] == __version__
    assert manifest["outputs"] == [str(out)]
    assert manifest["overrides"]["power"] == 2.47
    assert "peak T_abs" in capsys.readouterr().out


def test_fit_round_trip(tmp_path, capsys):
    trace_path = tmp_path / "heating.csv"
    synthesize_rc_trace(95.0, 102e-6, 1.63).write_csv(trace_path)
    out = tmp_path / "fit.json"
    code = main(["--seed", "3", "--out", str(out), "fit", str(trace_path),
                 "--power", "1.63"])
    assert code == 0
    result = read_json(out)
    assert result["parameters"]["r_abs"] == pytest.approx(95.0, rel=1e-4)
    assert result["provenance"]["seed"] == 3
    assert "R=95 K/W" in capsys.readouterr().out


def test_fit_short_trace_exit_code(tmp_path, capsys):
    trace_path = tmp_path / "short.csv"
    synthesize_rc_trace(95.0, 102e-6, 1.63, window=5e-3).write_csv(
        trace_path)
    out = tmp_path / "fit.json"
    code = main(["--out", str(out), "fit", str(trace_path),
                 "--power", "1.63"])
    assert code == 2
    assert "error=insufficient-data" in capsys.readouterr().err
    assert not out.exists()
    assert not manifest_path(out).exists()


def test_sweep_command(tmp_path):
    out = tmp_path / "widths.csv"
    code = main(["--out", str(out), "sweep", "--kind", "scanrate",
                 "--start", "100e-6", "--stop", "200e-6", "--num", "2"])
    assert code == 0
    assert pl.read_csv(out).height == 2


def write_pattern(path, document):
    path.write_text(json.dumps(document))
    return path


def test_schedule_and_conflict(tmp_path, capsys):
    train = {"P_W": 2.5, "tp_s": 0.01}
    good = write_pattern(tmp_path / "good.json", {
        "layout": {"rows": 1, "cols": 2},
        "events": [{"pixel": 0, "t0_s": 0.0, "train": train},
                   {"pixel": 1, "t0_s": 0.02, "train": train}]})
    out = tmp_path / "schedule.csv"
    assert main(["--out", str(out), "schedule", str(good)]) == 0
    assert pl.read_csv(out)["pixel"].to_list() == [0, 1]

    bad = write_pattern(tmp_path / "bad.json", {
        "layout": {"rows": 1, "cols": 2},
        "events": [{"pixel": 0, "t0_s": 0.0, "train": train},
                   {"pixel": 1, "t0_s": 0.005, "train": train}]})
    assert main(["--out", str(out), "schedule", str(bad)]) == 4
    assert "error=schedule-conflict" in capsys.readouterr().err
    assert main(["--out", str(out), "schedule", str(bad),
                 "--no-single-beam"]) == 0


def test_render_builtin_pattern(tmp_path):
    pattern = write_pattern(tmp_path / "magnitude.json", {
        "layout": {"rows": 3, "cols": 3,
                   "pixel_config": "paper_pixel_w040"},
        "builtin": {"name": "magnitude", "power": 1.0,
                    "duration": 0.1}})
    out = tmp_path / "field.parquet"
    code = main(["--out", str(out), "render", str(pattern),
                 "--sample-period", "0.01", "--with-force"])
    assert code == 0
    field = pl.read_parquet(out)
    assert field.columns == ["t_s", "pixel", "row", "col", "z_m", "F_N"]
    assert field.height == 9 * 11
    manifest = read_json(manifest_path(out))
    assert any("paper_pixel_w040" in p for p in manifest["config_paths"])


def test_analyze_operating_point(tmp_path, capsys):
    out = tmp_path / "report.json"
    code = main(["--out", str(out), "analyze", "--force", "0.055",
                 "--displacement", "0.97e-3", "--pulse", "0.05",
                 "--power", "2.4697", "--cavity-volume", "7.8e-9"])
    assert code == 0
    report = read_json(out)
    assert report["stroke_efficiency"] == pytest.approx(3.27e-4, rel=0.01)
    assert report["operating_point"]["peak_force_N"] == 0.055
    assert "eta_s=" in capsys.readouterr().out


def test_analyze_needs_inputs(tmp_path, capsys):
    code = main(["--out", str(tmp_path / "r.json"), "analyze",
                 "--force", "0.055", "--pulse", "0.05", "--power", "2.5"])
    assert code == 2
    assert "error=validation" in capsys.readouterr().err


def test_missing_config_exit_code(tmp_path, capsys):
    code = main(["--config", "no_such_pixel", "--out",
                 str(tmp_path / "t.csv"), "simulate", "--power", "1",
                 "--pulse", "0.01"])
    assert code == 2
    assert "error=config" in capsys.readouterr().err


def test_atomic_write_leaves_nothing_on_failure(tmp_path):
    target = tmp_path / "out.csv"

    def failing(path):
        with open(path, "w") as handle:
            handle.write("partial")
        raise RuntimeError("disk full")

    with pytest.raises(RuntimeError):
        atomic_write(target, failing)
    assert list(tmp_path.iterdir()) == []


def test_write_together_is_all_or_nothing(tmp_path):
    def content(tmp):
        with open(tmp, "w") as handle:
            handle.write("t_s\n0.0\n")

    def failing(tmp):
        raise OSError("disk full")

    with pytest.raises(OSError):
        write_together([(tmp_path / "a.csv", content),
                        (tmp_path / "a.csv.manifest.json", failing)])
    assert list(tmp_path.iterdir()) == []
    write_together([(tmp_path / "a.csv", content),
                    (tmp_path / "b.csv", content)])
    assert sorted(p.name for p in tmp_path.iterdir()) == ["a.csv", "b.csv"]


def good_schedule(tmp_path):
    train = {"P_W": 2.5, "tp_s": 0.01}
    return write_pattern(tmp_path / "good.json", {
        "layout": {"rows": 1, "cols": 2},
        "events": [{"pixel": 0, "t0_s": 0.0, "train": train},
                   {"pixel": 1, "t0_s": 0.02, "train": train}]})


def test_failed_manifest_leaves_no_output(tmp_path, capsys, monkeypatch):
    pattern = good_schedule(tmp_path)
    out = tmp_path / "runs" / "schedule.csv"

    def failing(payload):
        raise OSError("no space left on device")

    monkeypatch.setattr("optopix.cli.json_text", failing)
    code = main(["--out", str(out), "schedule", str(pattern)])
    assert code == 2
    assert "error=validation" in capsys.readouterr().err
    assert not out.exists()
    assert not manifest_path(out).exists()
    assert list(out.parent.iterdir()) == []


def test_quiet_suppresses_summary(tmp_path, capsys):
    pattern = good_schedule(tmp_path)
    out = tmp_path / "schedule.csv"
    assert main(["--quiet", "--out", str(out), "schedule",
                 str(pattern)]) == 0
    assert capsys.readouterr().out == ""
    assert out.exists()
    assert manifest_path(out).exists()
    assert main(["--out", str(out), "schedule", str(pattern)]) == 0
    assert "2 intervals" in capsys.readouterr().out
