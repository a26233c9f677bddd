"""Command-line interface for metasense."""

import csv
import io
import json
from contextlib import contextmanager
from enum import Enum
from pathlib import Path
from typing import Optional

import numpy as np
import typer
from rich.console import Console
from rich.table import Table

from . import __version__
from . import fixtures
from .analysis import calibration, perturbation, resonance, sensitivity
from .analysis.resonance import Mode
from .config import settings
from .errors import MetasenseError
from .fitting import FitOptions, FitProblem, fit_netlist
from .rf import netlist as netlist_io
from .rf import network, touchstone
from .utils import get_logger

logger = get_logger(__name__)

app = typer.Typer(
    name="metasense",
    help="Resonant metamaterial permittivity sensor: S-parameter analysis, calibration and circuit fitting",
    add_completion=False,
)

console = Console()
err_console = Console(stderr=True)


class OutputFormat(str, Enum):
    csv = "csv"
    json = "json"
    table = "table"


class ReportFormat(str, Enum):
    text = "text"
    csv = "csv"
    json = "json"


class ResponseFormat(str, Enum):
    s2p = "s2p"
    csv = "csv"
    json = "json"


REPORT_SECTIONS = ("peaks", "errors", "correction", "sensitivity")


@contextmanager
def handle_errors():
    """Turn library errors into a one-line diagnostic and exit code 1."""
    try:
        yield
    except (MetasenseError, ValueError, OSError, KeyError) as e:
        err_console.print(f"error: {e}", style="red", markup=False, highlight=False, soft_wrap=True)
        raise typer.Exit(1)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return f"{value:.10g}"
    return str(value)


def emit(rows: list[dict], columns: list[str], fmt: OutputFormat, title: str = "") -> None:
    """Write rows to stdout as CSV, JSON or a rich table."""
    if fmt == OutputFormat.json:
        typer.echo(json.dumps(rows, indent=2, sort_keys=True))
        return

    if fmt == OutputFormat.csv:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(row.get(c)) for c in columns])
        typer.echo(buffer.getvalue(), nl=False)
        return

    table = Table(title=title or None)
    for c in columns:
        table.add_column(c, style="cyan" if c == columns[0] else None)
    for row in rows:
        table.add_row(*[_fmt(row.get(c)) for c in columns])
    console.print(table)


def _default_format(fmt: Optional[OutputFormat]) -> OutputFormat:
    return fmt or OutputFormat(settings.output_format)


def version_callback(value: bool):
    if value:
        typer.echo(f"metasense {__version__}")
        raise typer.Exit()


@app.callback()
def main(
    version: bool = typer.Option(
        False, "--version", callback=version_callback, is_eager=True, help="Print version and exit"
    ),
):
    """Resonant permittivity sensor toolkit."""


@app.command()
def inspect(
    file: Path = typer.Argument(..., exists=True, dir_okay=False, help=".s2p or .csv response file"),
    format: Optional[OutputFormat] = typer.Option(None, "--format", "-f", help="csv, json or table"),
):
    """Summarize a frequency-response file."""
    with handle_errors():
        resp = touchstone.read_response(file)
        if len(resp) == 0:
            raise touchstone.TouchstoneError(f"{file.name} contains no data points")

        summary = {
            "file": file.name,
            "points": len(resp),
            "fmin_hz": float(resp.freqs[0]),
            "fmax_hz": float(resp.freqs[-1]),
            "z0_ohm": resp.z0,
        }
        for name in ("s11", "s21", "s12", "s22"):
            db = np.maximum(resp.channel_db(name), touchstone.DB_FLOOR)
            i = int(db.argmin())
            summary[f"{name}_min_db"] = float(db[i])
            summary[f"{name}_min_at_hz"] = float(resp.freqs[i])

    fmt = _default_format(format)
    if fmt == OutputFormat.json:
        typer.echo(json.dumps(summary, indent=2, sort_keys=True))
    else:
        emit(
            [{"field": k, "value": v} for k, v in summary.items()],
            ["field", "value"],
            fmt,
            title=f"Response: {file.name}",
        )


RESONANCE_COLUMNS = ["mode", "frequency_hz", "frequency_ghz", "depth_db", "q", "grid_index"]


@app.command()
def resonances(
    file: Path = typer.Argument(..., exists=True, dir_okay=False, help=".s2p or .csv response file"),
    mode: str = typer.Option("transmission", "--mode", "-m", help="transmission (S21) or reflection (S11)"),
    threshold_db: Optional[float] = typer.Option(None, "--threshold-db", help="Notch must dip below this (dB)"),
    min_sep_hz: Optional[float] = typer.Option(None, "--min-sep-hz", help="Merge notches closer than this (Hz)"),
    q: bool = typer.Option(True, "--q/--no-q", help="Measure Q at the offset above each notch"),
    q_offset_db: Optional[float] = typer.Option(None, "--q-offset-db", help="Q bandwidth offset above the notch floor"),
    format: Optional[OutputFormat] = typer.Option(None, "--format", "-f", help="csv, json or table"),
):
    """Detect resonance notches."""
    with handle_errors():
        resp = touchstone.read_response(file)
        found = resonance.find_notches(resp, mode, threshold_db, min_sep_hz)
        if q:
            found = resonance.annotate_q(resp, found, q_offset_db)

    rows = []
    for r in found:
        row = r.to_dict()
        row["frequency_hz"] = r.frequency
        row["frequency_ghz"] = r.frequency / 1e9
        row["depth_db"] = r.depth
        rows.append(row)
    emit(rows, RESONANCE_COLUMNS, _default_format(format), title=f"Notches in {file.name}")


MODEL_COLUMNS = ["x1_ghz", "x2_ghz", "x3_ghz", "eps_min", "eps_max", "mode", "provenance"]


@app.command()
def calibrate(
    samples: Path = typer.Argument(..., exists=True, dir_okay=False, help="CSV: name,permittivity,resonance_ghz,mode"),
    anchor_air: bool = typer.Option(True, "--anchor-air/--no-anchor-air", help="Pin x1 to the air resonance"),
    output: Optional[Path] = typer.Option(None, "--output", "-o", help="Write the model YAML here"),
    format: Optional[OutputFormat] = typer.Option(None, "--format", "-f", help="csv, json or table"),
):
    """Fit the permittivity calibration model."""
    with handle_errors():
        data = calibration.load_samples(samples)
        model = calibration.fit(data, anchor_air=anchor_air, provenance=f"fit of {samples.name}")
        if output:
            calibration.save_model(model, output)
            logger.info(f"Model saved to {output}")

    emit([model.to_dict()], MODEL_COLUMNS, _default_format(format), title="Calibration model")


def _resolve_model(model_file: Optional[Path], preset: str) -> calibration.CalibrationModel:
    if model_file:
        return calibration.load_model(model_file)
    if preset not in calibration.PRESETS:
        raise calibration.CalibrationError(
            f"unknown preset {preset!r}; known: {', '.join(calibration.PRESETS)}"
        )
    return calibration.PRESETS[preset]


def _notch_in_model_range(resp, model) -> float:
    """Deepest notch (GHz) that the model can invert."""
    found = resonance.find_notches(resp, model.mode)
    usable = [r for r in found if model.f_min <= r.frequency / 1e9 <= model.f_max]
    if not usable:
        raise calibration.CalibrationError(
            f"no {model.mode.channel} notch between {model.f_min:.4f} and {model.f_max:.4f} GHz"
        )
    return min(usable, key=lambda r: r.depth).frequency / 1e9


@app.command()
def extract(
    file: Optional[Path] = typer.Argument(None, exists=True, dir_okay=False, help="Response file to read the notch from"),
    freq_ghz: Optional[float] = typer.Option(None, "--freq-ghz", help="Notch frequency in GHz"),
    model_file: Optional[Path] = typer.Option(None, "--model", exists=True, dir_okay=False, help="Model YAML from calibrate"),
    preset: str = typer.Option("reference-s21", "--preset", help="Built-in model when --model is not given"),
    format: Optional[OutputFormat] = typer.Option(None, "--format", "-f", help="csv, json or table"),
):
    """Recover permittivity from a notch frequency."""
    with handle_errors():
        if (file is None) == (freq_ghz is None):
            raise calibration.CalibrationError("give exactly one of --freq-ghz or a response file")
        model = _resolve_model(model_file, preset)
        if file is not None:
            freq_ghz = _notch_in_model_range(touchstone.read_response(file), model)
        eps = calibration.invert(model, freq_ghz)

    emit(
        [{"frequency_ghz": freq_ghz, "permittivity": eps, "mode": model.mode.value}],
        ["frequency_ghz", "permittivity", "mode"],
        _default_format(format),
        title="Extracted permittivity",
    )


def _report_data(model: calibration.CalibrationModel) -> dict:
    peaks_rows = fixtures.load_table("calculated_peaks")
    published_re = {row["name"]: row["relative_error"] for row in fixtures.load_table("relative_error")}
    samples = fixtures.simulated_peak_samples()

    peaks = []
    errors = []
    correction = []
    for row, err in zip(peaks_rows, calibration.relative_error_table(model, samples)):
        peaks.append({
            "name": err.name,
            "permittivity": err.permittivity,
            "simulated_ghz": err.simulated,
            "calculated_ghz": round(err.calculated, 4),
            "published_ghz": float(row["calculated_ghz"]),
        })
        errors.append({
            "name": err.name,
            "permittivity": err.permittivity,
            "relative_error_pct": round(err.relative_error, 4) + 0.0,
            "abs_relative_error_pct": round(err.abs_relative_error, 2),
            "published": published_re.get(err.name, ""),
        })
        correction.append({
            "permittivity": err.permittivity,
            "implemented_ghz": round(calibration.evaluate(model, err.permittivity), 4),
            "printed_form_ghz": round(calibration.evaluate_printed_form(model, err.permittivity), 4),
            "published_ghz": float(row["calculated_ghz"]),
        })

    sweep = fixtures.permittivity_points()
    s21_sweep = sensitivity.sensitivity_report(sweep).endpoint
    s21_std = fixtures.standard_samples(Mode.TRANSMISSION)
    s11_std = fixtures.standard_samples(Mode.REFLECTION)

    def span(samples_):
        lo, hi = samples_[0], samples_[-1]
        return sensitivity.normalized_average_sensitivity(
            lo.resonance, hi.resonance, lo.permittivity, hi.permittivity
        )

    claim_s21 = fixtures.claimed_sensitivity(Mode.TRANSMISSION)
    claim_s11 = fixtures.claimed_sensitivity(Mode.REFLECTION)
    sens = [
        {
            "basis": "permittivity sweep 1-6",
            "mode": "transmission",
            "s_av_pct": round(s21_sweep.s_av, 3),
            "claimed_pct": claim_s21,
        },
        {
            "basis": "standard materials 1-4.3",
            "mode": "transmission",
            "s_av_pct": round(span(s21_std), 3),
            "claimed_pct": None,
        },
        {
            "basis": "standard materials 1-4.3",
            "mode": "reflection",
            "s_av_pct": round(span(s11_std), 3),
            "claimed_pct": claim_s11,
        },
    ]
    for row in sens:
        claimed = row["claimed_pct"]
        row["note"] = (
            "claimed value not derivable from tabulated frequencies"
            if claimed is not None and abs(claimed - row["s_av_pct"]) >= 0.005
            else ""
        )

    saturation = [
        {
            "mode": mode.value,
            "tol_ghz": tol,
            "saturation_mm": sensitivity.thickness_saturation(fixtures.thickness_points(mode), tol),
        }
        for mode in (Mode.TRANSMISSION, Mode.REFLECTION)
        for tol in (0.02, 0.05)
    ]

    return {
        "model": model.to_dict(),
        "peaks": peaks,
        "errors": errors,
        "correction": correction,
        "sensitivity": sens,
        "saturation": saturation,
    }


def _report_text(data: dict, sections: list[str]) -> str:
    m = data["model"]
    lines = [
        f"model: f = {m['x1_ghz']:.4f} - {m['x2_ghz']:.4f}*(eps-1) + {m['x3_ghz']:.4f}*(eps-1)^2 GHz "
        f"[{m['mode']}, eps {m['eps_min']:g}-{m['eps_max']:g}]",
    ]
    if "peaks" in sections:
        lines += ["", "Calculated peaks", f"{'material':<16}{'eps':>6}{'simulated':>11}{'calculated':>12}{'published':>11}"]
        for r in data["peaks"]:
            lines.append(
                f"{r['name']:<16}{r['permittivity']:>6.2f}{r['simulated_ghz']:>11.4f}"
                f"{r['calculated_ghz']:>12.4f}{r['published_ghz']:>11.4f}"
            )
    if "errors" in sections:
        lines += ["", "Relative error (reference = simulated)", f"{'material':<16}{'eps':>6}{'RE %':>10}{'|RE| %':>9}{'published':>11}"]
        for r in data["errors"]:
            lines.append(
                f"{r['name']:<16}{r['permittivity']:>6.2f}{r['relative_error_pct']:>10.4f}"
                f"{r['abs_relative_error_pct']:>9.2f}{r['published']:>11}"
            )
    if "correction" in sections:
        lines += [
            "",
            "Squared term: (eps-1)^2 implemented, (eps^2-1)^2 as printed",
            f"{'eps':>6}{'(eps-1)^2':>12}{'(eps^2-1)^2':>14}{'published':>11}",
        ]
        for r in data["correction"]:
            lines.append(
                f"{r['permittivity']:>6.2f}{r['implemented_ghz']:>12.4f}"
                f"{r['printed_form_ghz']:>14.4f}{r['published_ghz']:>11.4f}"
            )
    if "sensitivity" in sections:
        lines += ["", "Normalized average sensitivity"]
        for r in data["sensitivity"]:
            line = f"{r['mode']:<13}{r['basis']:<26}{r['s_av_pct']:>8.3f} %"
            if r["claimed_pct"] is not None:
                line += f"   claimed {r['claimed_pct']:.2f} %"
            if r["note"]:
                line += f" ({r['note']})"
            lines.append(line)
        lines += ["", "Thickness saturation"]
        for r in data["saturation"]:
            lines.append(f"{r['mode']:<13}tol {r['tol_ghz']:.2f} GHz{r['saturation_mm']:>8.1f} mm")
    return "\n".join(lines) + "\n"


def _report_rows(data: dict, sections: list[str]) -> list[dict]:
    rows = []
    for section in sections:
        entries = data[section] + (data["saturation"] if section == "sensitivity" else [])
        for entry in entries:
            for key, value in entry.items():
                label = entry.get("name") or entry.get("basis") or _fmt(entry.get("permittivity"))
                if section == "sensitivity" and "tol_ghz" in entry:
                    label = f"saturation tol {entry['tol_ghz']:.2f}"
                rows.append({
                    "section": section,
                    "item": f"{label} [{entry['mode']}]" if "mode" in entry else label,
                    "field": key,
                    "value": value,
                })
    return rows


@app.command()
def report(
    sections: str = typer.Option(",".join(REPORT_SECTIONS), "--sections", "-s", help="Comma list: peaks,errors,correction,sensitivity"),
    model_file: Optional[Path] = typer.Option(None, "--model", exists=True, dir_okay=False, help="Model YAML (default: reference preset)"),
    format: ReportFormat = typer.Option(ReportFormat.text, "--format", "-f", help="text, csv or json"),
):
    """Reproduce calculated peaks, relative errors and sensitivity figures."""
    with handle_errors():
        wanted = [s.strip() for s in sections.split(",") if s.strip()]
        unknown = [s for s in wanted if s not in REPORT_SECTIONS]
        if unknown or not wanted:
            raise calibration.CalibrationError(
                f"unknown report sections {unknown}; choose from {', '.join(REPORT_SECTIONS)}"
            )
        model = _resolve_model(model_file, "reference-s21")
        data = _report_data(model)

    if format == ReportFormat.text:
        typer.echo(_report_text(data, wanted), nl=False)
    elif format == ReportFormat.json:
        payload = {"model": data["model"]}
        for s in wanted:
            payload[s] = data[s]
        if "sensitivity" in wanted:
            payload["saturation"] = data["saturation"]
        typer.echo(json.dumps(payload, indent=2, sort_keys=True))
    else:
        emit(_report_rows(data, wanted), ["section", "item", "field", "value"], OutputFormat.csv)


@app.command()
def simulate(
    netlist_file: Path = typer.Argument(..., exists=True, dir_okay=False, help="Netlist YAML"),
    fmin: float = typer.Option(1.0, "--fmin", help="Start frequency (GHz)"),
    fmax: float = typer.Option(15.0, "--fmax", help="Stop frequency (GHz)"),
    points: Optional[int] = typer.Option(None, "--points", "-n", help="Number of sweep points"),
    output: Optional[Path] = typer.Option(None, "--output", "-o", help="Write here instead of stdout"),
    format: ResponseFormat = typer.Option(ResponseFormat.s2p, "--format", "-f", help="s2p, csv or json"),
):
    """Simulate a ladder netlist and write its S-parameters."""
    with handle_errors():
        net, free = netlist_io.load_netlist(netlist_file)
        if free:
            logger.warning(f"{len(free)} free parameters simulated at their initial values")
        freqs = network.linear_sweep(fmin * 1e9, fmax * 1e9, points)
        resp = network.simulate(net, freqs)

    if format == ResponseFormat.s2p:
        text = touchstone.write_touchstone(resp, touchstone.OptionLine(freq_unit=1e9, format="RI", resistance=resp.z0))
    elif format == ResponseFormat.csv:
        text = touchstone.write_csv_response(resp)
    else:
        text = json.dumps(
            {
                "z0_ohm": resp.z0,
                "freq_hz": resp.freqs.tolist(),
                **{
                    name: {"re": resp.channel(name).real.tolist(), "im": resp.channel(name).imag.tolist()}
                    for name in ("s11", "s21", "s12", "s22")
                },
            },
            indent=2,
            sort_keys=True,
        ) + "\n"

    if output:
        output.write_text(text)
        logger.info(f"Wrote {len(resp)} points to {output}")
    else:
        typer.echo(text, nl=False)


@app.command("fit-circuit")
def fit_circuit(
    template: Path = typer.Argument(..., exists=True, dir_okay=False, help="Netlist YAML with ?init:lower:upper values"),
    target: Path = typer.Argument(..., exists=True, dir_okay=False, help="Target .s2p or .csv response"),
    seed: Optional[int] = typer.Option(None, "--seed", help="Seed for restart points"),
    restarts: Optional[int] = typer.Option(None, "--restarts", help="Extra random starts"),
    max_iters: Optional[int] = typer.Option(None, "--max-iters", help="Simplex iterations per start"),
    channels: str = typer.Option("s21", "--channels", help="Comma list of s21,s11"),
    output: Optional[Path] = typer.Option(None, "--output", "-o", help="Write the fitted netlist YAML here"),
    format: Optional[OutputFormat] = typer.Option(None, "--format", "-f", help="csv, json or table"),
):
    """Fit free netlist values to a target response."""
    with handle_errors():
        net, free = netlist_io.load_netlist(template)
        resp = touchstone.read_response(target)
        problem = FitProblem(
            template=net,
            free=free,
            target=resp,
            channels=tuple(c.strip() for c in channels.split(",") if c.strip()),
        )
        opts = FitOptions(
            max_iters=max_iters if max_iters is not None else settings.fit_max_iters,
            tol=settings.fit_tol,
            restarts=restarts if restarts is not None else settings.fit_restarts,
            seed=seed if seed is not None else settings.fit_seed,
        )
        result = fit_netlist(problem, opts)
        if output:
            output.write_text(netlist_io.render_netlist(result.netlist))
            logger.info(f"Fitted netlist saved to {output}")

    fmt = _default_format(format)
    if fmt == OutputFormat.json:
        typer.echo(json.dumps(result.to_dict(), indent=2, sort_keys=True))
        return
    rows = [
        {"name": p.name, "value": float(v), "lower": p.lower, "upper": p.upper}
        for p, v in zip(free, result.values)
    ]
    rows += [
        {"name": "residual_db_rms", "value": result.residual},
        {"name": "iterations", "value": result.iterations},
        {"name": "converged", "value": result.converged},
        {"name": "restart", "value": result.restart},
    ]
    emit(rows, ["name", "value", "lower", "upper"], fmt, title="Circuit fit")


@app.command("sensitivity")
def sensitivity_cmd(
    sweep_file: Path = typer.Argument(..., exists=True, dir_okay=False, help="CSV: control_kind,control_value,resonance_ghz,depth_db"),
    tol_ghz: float = typer.Option(0.02, "--tol-ghz", help="Saturation tolerance for thickness sweeps"),
    format: Optional[OutputFormat] = typer.Option(None, "--format", "-f", help="csv, json or table"),
):
    """Sensitivity of a permittivity sweep, or saturation of a thickness sweep."""
    with handle_errors():
        points = sensitivity.load_sweep(sweep_file)
        kinds = {p.control_kind for p in points}
        if kinds == {sensitivity.ControlKind.THICKNESS}:
            rows = [{
                "kind": "saturation",
                "tol_ghz": tol_ghz,
                "saturation_mm": sensitivity.thickness_saturation(points, tol_ghz),
            }]
            columns = ["kind", "tol_ghz", "saturation_mm"]
        else:
            rep = sensitivity.sensitivity_report(points)
            rows = [
                {"kind": "pair", **vars(p)} for p in rep.pairs
            ] + [{"kind": "endpoint", **vars(rep.endpoint)}]
            columns = ["kind", "eps_low", "eps_high", "f_low_eps", "f_high_eps", "s_av"]

    emit(rows, columns, _default_format(format), title="Sensitivity")


@app.command()
def perturb(
    grid_file: Path = typer.Argument(..., exists=True, dir_okay=False, help="Field grid CSV"),
    format: Optional[OutputFormat] = typer.Option(None, "--format", "-f", help="csv, json or table"),
):
    """Fractional frequency shift from a voxelized field grid."""
    with handle_errors():
        grid = perturbation.load_field_grid(grid_file)
        rows = [{
            "cells": len(grid),
            "shift_full": perturbation.frequency_shift_full(grid),
            "shift_electric": perturbation.frequency_shift_electric(grid),
        }]

    emit(rows, ["cells", "shift_full", "shift_electric"], _default_format(format), title="Perturbation")


if __name__ == "__main__":
    app()
