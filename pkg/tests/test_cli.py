"""Command-line interface."""

import csv
import io
import json
from pathlib import Path

import pytest
from typer.testing import CliRunner

from src.analysis.calibration import REFERENCE_MODEL, invert
from src.cli import app
from src.rf.touchstone import parse_touchstone

CONFIGS = Path(__file__).parent.parent / "configs"

runner = CliRunner()


def invoke(*args):
    return runner.invoke(app, [str(a) for a in args])


def csv_rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_version():
    result = invoke("--version")
    assert result.exit_code == 0
    assert result.stdout.strip() == "metasense 1.0.0"


def test_inspect_json(notch_trace_path):
    result = invoke("inspect", notch_trace_path, "--format", "json")
    assert result.exit_code == 0, result.output

    summary = json.loads(result.stdout)
    assert summary["points"] == 21
    assert summary["s21_min_at_hz"] == pytest.approx(3.98e9)
    assert summary["s21_min_db"] == pytest.approx(-13.62576)


def test_inspect_rejects_empty_file(tmp_path):
    path = tmp_path / "empty.s2p"
    path.write_text("# GHz S RI R 50\n")
    result = invoke("inspect", path)
    assert result.exit_code == 1
    assert "no data points" in result.output


def test_malformed_file_reports_line(tmp_path):
    path = tmp_path / "bad.s2p"
    path.write_text("# GHz S RI R 50\n1 0 0 1 0\n")
    result = invoke("resonances", path)
    assert result.exit_code == 1
    assert "error: line 2:" in result.output


def test_resonances_csv(notch_trace_path):
    result = invoke("resonances", notch_trace_path, "--format", "csv")
    assert result.exit_code == 0, result.output

    (row,) = csv_rows(result.stdout)
    assert row["mode"] == "transmission"
    assert float(row["frequency_ghz"]) == pytest.approx(3.98)
    assert float(row["depth_db"]) == pytest.approx(-13.62576)
    assert float(row["q"]) == pytest.approx(55.2778, rel=1e-4)


def test_resonances_empty_keeps_header(notch_trace_path):
    result = invoke("resonances", notch_trace_path, "--threshold-db", -20, "--format", "csv")
    assert result.exit_code == 0
    assert result.stdout.splitlines() == ["mode,frequency_hz,frequency_ghz,depth_db,q,grid_index"]


def test_simulate_then_detect(tmp_path):
    out = tmp_path / "lc.s2p"
    result = invoke(
        "simulate", CONFIGS / "lc_notch.yml", "--fmin", 1, "--fmax", 10, "--points", 901, "--output", out
    )
    assert result.exit_code == 0, result.output
    resp = parse_touchstone(out.read_text())
    assert len(resp) == 901

    result = invoke("resonances", out, "--format", "json", "--no-q")
    (notch,) = json.loads(result.stdout)
    assert notch["frequency_ghz"] == pytest.approx(5.0329, abs=0.02)
    assert notch["q"] is None


def test_simulate_csv_to_stdout():
    result = invoke("simulate", CONFIGS / "lc_notch.yml", "--points", 3, "--format", "csv")
    assert result.exit_code == 0
    lines = result.stdout.splitlines()
    assert lines[0].startswith("freq_hz,s11_re")
    assert len(lines) == 4


def test_dual_notch_example_shows_both_resonances(tmp_path):
    out = tmp_path / "dual.s2p"
    result = invoke("simulate", CONFIGS / "dual_notch_example.yml", "--points", 2801, "--output", out)
    assert result.exit_code == 0, result.output

    result = invoke("resonances", out, "--threshold-db", -5, "--format", "json", "--no-q")
    assert result.exit_code == 0, result.output
    low, high = json.loads(result.stdout)
    assert low["frequency_ghz"] == pytest.approx(4.0, abs=0.1)
    # the neighbouring resonator and the series inductors pull the upper notch
    assert high["frequency_ghz"] == pytest.approx(11.57, abs=0.5)


def test_calibrate_then_extract(tmp_path):
    model_path = tmp_path / "model.yml"
    result = invoke("calibrate", CONFIGS / "calibration_samples.csv", "--output", model_path, "--format", "json")
    assert result.exit_code == 0, result.output

    (model,) = json.loads(result.stdout)
    assert model["x1_ghz"] == 3.99
    assert model["x2_ghz"] == pytest.approx(0.3512, abs=0.002)
    assert model_path.exists()

    result = invoke("extract", "--freq-ghz", 3.6017, "--model", model_path, "--format", "json")
    (row,) = json.loads(result.stdout)
    assert row["permittivity"] == pytest.approx(2.2, abs=0.01)


def test_extract_with_preset():
    result = invoke("extract", "--freq-ghz", 3.2185, "--format", "json")
    assert result.exit_code == 0
    (row,) = json.loads(result.stdout)
    assert row["permittivity"] == pytest.approx(3.66, abs=1e-3)


def test_extract_from_trace(notch_trace_path):
    result = invoke("extract", notch_trace_path, "--format", "json")
    assert result.exit_code == 0, result.output
    (row,) = json.loads(result.stdout)
    assert row["frequency_ghz"] == pytest.approx(3.98)
    assert row["permittivity"] == pytest.approx(invert(REFERENCE_MODEL, row["frequency_ghz"]))


@pytest.mark.parametrize(
    "args",
    [
        ("extract", "--freq-ghz", 4.5),
        ("extract",),
        ("extract", "--freq-ghz", 3.5, "--preset", "nope"),
    ],
)
def test_extract_errors(args):
    result = invoke(*args)
    assert result.exit_code == 1
    assert "error:" in result.output


def test_report_text_is_deterministic():
    first = invoke("report")
    second = invoke("report")
    assert first.exit_code == 0, first.output
    assert first.stdout == second.stdout

    text = first.stdout
    assert "3.6017" in text
    assert "3.9077" in text
    assert "9.448 %" in text
    assert "claimed 9.55 %" in text
    assert "claimed 9.13 %" in text
    assert "not derivable" in text


def test_report_json_sections():
    result = invoke("report", "--sections", "errors,sensitivity", "--format", "json")
    assert result.exit_code == 0
    data = json.loads(result.stdout)

    assert set(data) == {"model", "errors", "sensitivity", "saturation"}
    assert [round(r["abs_relative_error_pct"], 2) for r in data["errors"]] == [0.0, 0.05, 0.05, 0.05]
    by_basis = {(r["basis"], r["mode"]): r["s_av_pct"] for r in data["sensitivity"]}
    assert by_basis[("standard materials 1-4.3", "transmission")] == 6.911
    assert by_basis[("standard materials 1-4.3", "reflection")] == 3.966
    sat = {(r["mode"], r["tol_ghz"]): r["saturation_mm"] for r in data["saturation"]}
    assert sat[("transmission", 0.02)] == 2.0


def test_report_csv_and_bad_section():
    result = invoke("report", "--sections", "peaks", "--format", "csv")
    assert result.exit_code == 0
    rows = csv_rows(result.stdout)
    assert {r["section"] for r in rows} == {"peaks"}

    result = invoke("report", "--sections", "peaks,figures")
    assert result.exit_code == 1
    assert "figures" in result.output


def test_sensitivity_command(tmp_path):
    thickness = tmp_path / "thickness.csv"
    thickness.write_text(
        "control_kind,control_value,resonance_ghz\n"
        "thickness,1.0,3.66\nthickness,1.5,3.62\nthickness,2.0,3.61\nthickness,3.0,3.60\n"
    )
    result = invoke("sensitivity", thickness, "--format", "json")
    assert result.exit_code == 0, result.output
    assert json.loads(result.stdout)[0]["saturation_mm"] == 1.5

    permittivity = tmp_path / "eps.csv"
    permittivity.write_text(
        "control_kind,control_value,resonance_ghz\n"
        "permittivity,1,4.168\npermittivity,6,2.199\n"
    )
    result = invoke("sensitivity", permittivity, "--format", "csv")
    rows = csv_rows(result.stdout)
    assert rows[-1]["kind"] == "endpoint"
    assert float(rows[-1]["s_av"]) == pytest.approx(9.4482, abs=1e-4)


def test_perturb_command(tmp_path):
    cols = [f"{f}{a}_{p}" for f in ("e0", "e1") for a in "xyz" for p in ("re", "im")]
    grid = tmp_path / "grid.csv"
    grid.write_text(
        "# cell_volume=1 eps0=1 mu0=1\n"
        + ",".join(cols + ["delta_eps"]) + "\n"
        + ",".join(["1"] + ["0"] * 5 + ["1"] + ["0"] * 5 + ["1"]) + "\n"
    )
    result = invoke("perturb", grid, "--format", "json")
    assert result.exit_code == 0, result.output
    (row,) = json.loads(result.stdout)
    assert row["shift_full"] == -1.0
    assert row["cells"] == 1


def test_fit_circuit_command(tmp_path):
    target = tmp_path / "target.s2p"
    template = tmp_path / "truth.yml"
    template.write_text(
        "elements:\n  - {topology: shunt, kind: RLC_S, r_ohm: 2.0, l_h: 1.0e-9, c_f: 1.0e-12}\n"
    )
    result = invoke("simulate", template, "--fmin", 1, "--fmax", 10, "--points", 401, "--output", target)
    assert result.exit_code == 0, result.output

    fitted = tmp_path / "fitted.yml"
    result = invoke(
        "fit-circuit", CONFIGS / "rlc_fit_template.yml", target,
        "--restarts", 1, "--seed", 3, "--output", fitted, "--format", "json",
    )
    assert result.exit_code == 0, result.output
    params = json.loads(result.stdout)["parameters"]
    assert params["e0.r_ohm"] == pytest.approx(2.0, rel=0.02)
    assert "RLC_S" in fitted.read_text()


def _strict_constant(name):
    raise ValueError(f"non-standard JSON constant {name}")


def test_inspect_json_on_a_through_line(tmp_path):
    path = tmp_path / "through.s2p"
    path.write_text("# GHz S RI R 50\n1 0 0 1 0 1 0 0 0\n2 0 0 1 0 1 0 0 0\n")
    result = invoke("inspect", path, "--format", "json")
    assert result.exit_code == 0, result.output

    summary = json.loads(result.stdout, parse_constant=_strict_constant)
    assert summary["s11_min_db"] == -400.0
    assert summary["s22_min_db"] == -400.0
    assert summary["s21_min_db"] == pytest.approx(0.0)
