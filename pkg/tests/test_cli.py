import json

import pytest

from sqpc.cli import main
from sqpc.output import read_trace, write_trace
from sqpc.sweep import detect_plateaus

from conftest import staircase


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_params_prints_lambda(tmp_path, capsys):
    code, out, _ = run(capsys, "params", "--out", tmp_path)
    assert code == 0
    info = json.loads(out)
    assert info["lambda_F_nm"] == pytest.approx(53.0, abs=0.1)
    rec = json.loads((tmp_path / "run.json").read_text())
    assert set(rec["outputs"]) == {"params.json"}
    assert {"config", "version", "timestamp"} <= set(rec)


def test_trace_normal_staircase(tmp_path, capsys):
    code, _, _ = run(capsys, "trace", "--device", 5, "--delta0", 0, "--out", tmp_path)
    assert code == 0
    tr = read_trace(tmp_path / "trace.csv")
    heights = [p.height for p in detect_plateaus(tr) if p.height > 0.05][:4]
    assert heights == pytest.approx([1, 2, 3, 4], abs=0.01)
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["H1"] == pytest.approx(1.0, abs=0.01)


def test_rerun_checksums_identical(tmp_path, capsys):
    for d in ("a", "b"):
        assert run(capsys, "trace", "--delta0", 0, "--out", tmp_path / d)[0] == 0
    a = json.loads((tmp_path / "a" / "run.json").read_text())
    b = json.loads((tmp_path / "b" / "run.json").read_text())
    assert a["outputs"] == b["outputs"]


def test_analyze_fixture(tmp_path, capsys):
    csv = write_trace(staircase(), tmp_path / "s.csv")
    code, out, _ = run(capsys, "analyze", csv, "--out", tmp_path / "an")
    assert code == 0
    heights = [p["height"] for p in json.loads(out)["plateaus"]]
    assert heights == pytest.approx([0, 1, 2, 3], abs=1e-9)


def test_map_command(tmp_path, capsys):
    cfg = tmp_path / "c.toml"
    cfg.write_text("[sweep]\nV_start = -0.5\nV_stop = -0.6\nV_step = 0.05\n"
                   "B_start = 0.0\nB_stop = 1.0\nB_step = 0.5\n")
    code, _, _ = run(capsys, "map", "--config", cfg, "--out", tmp_path)
    assert code == 0
    assert len((tmp_path / "map.csv").read_text().splitlines()) == 1 + 3 * 3


def test_band_command(tmp_path, capsys):
    code, out, _ = run(capsys, "band", "--out", tmp_path)
    assert code == 0
    assert json.loads(out)["sheet_density_cm2"] == pytest.approx(2.1e11, rel=0.2)
    assert (tmp_path / "band.csv").exists()


def test_plot_output(tmp_path, capsys):
    pytest.importorskip("matplotlib")
    code, _, _ = run(capsys, "trace", "--plot", "--out", tmp_path)
    assert code == 0 and (tmp_path / "trace.png").exists()


def test_error_line_and_status(tmp_path, capsys):
    code, _, err = run(capsys, "params", "--device", 9, "--out", tmp_path)
    assert code == 1
    line = json.loads(err.strip().splitlines()[-1])
    assert line["error"] == "ValidationError" and line["field"] == "device"


def test_missing_config(tmp_path, capsys):
    code, _, err = run(capsys, "params", "--config", tmp_path / "nope.toml")
    assert code == 1 and "error" in json.loads(err)


def test_unknown_subcommand(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["bogus"])
    assert exc.value.code == 2
    assert "usage" in capsys.readouterr().err
