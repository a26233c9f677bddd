"""
Reference data tables.

CSV transcriptions of the published sensor tables, kept verbatim with a
`source` column, plus a synthetic notch trace for pipeline checks. The
files are only ever read; anything derived from them is computed fresh.

Set METASENSE_FIXTURE_DIR to read the tables from another directory.
"""

import csv
from dataclasses import dataclass
from pathlib import Path

from ..analysis.calibration import MaterialSample
from ..analysis.resonance import Mode
from ..analysis.sensitivity import ControlKind, SweepPoint
from ..config import settings

BUNDLED_DIR = Path(__file__).parent / "data"

TABLES = {
    "sensor_geometry": "sensor_geometry.csv",
    "thickness_sweep": "thickness_sweep.csv",
    "permittivity_sweep": "permittivity_sweep.csv",
    "standard_materials": "standard_materials.csv",
    "calculated_peaks": "calculated_peaks.csv",
    "relative_error": "relative_error.csv",
    "headline_resonances": "headline_resonances.csv",
    "published_claims": "published_claims.csv",
}

NOTCH_TRACE = "unloaded_s21_notch.s2p"


def fixture_dir() -> Path:
    """Directory the tables are read from."""
    return Path(settings.fixture_dir) if settings.fixture_dir else BUNDLED_DIR


def fixture_path(filename: str) -> Path:
    return fixture_dir() / filename


def load_table(name: str) -> list[dict[str, str]]:
    """Rows of a named table as raw strings, exactly as stored."""
    if name not in TABLES:
        raise KeyError(f"unknown fixture table {name!r}; known: {', '.join(sorted(TABLES))}")
    with open(fixture_path(TABLES[name]), newline="") as f:
        return [dict(row) for row in csv.DictReader(f)]


@dataclass(frozen=True)
class FixtureSet:
    """All tables, loaded once."""
    sensor_geometry: list[dict[str, str]]
    thickness_sweep: list[dict[str, str]]
    permittivity_sweep: list[dict[str, str]]
    standard_materials: list[dict[str, str]]
    calculated_peaks: list[dict[str, str]]
    relative_error: list[dict[str, str]]
    headline_resonances: list[dict[str, str]]
    published_claims: list[dict[str, str]]

    @classmethod
    def load(cls) -> "FixtureSet":
        return cls(**{name: load_table(name) for name in TABLES})


def thickness_points(mode=Mode.TRANSMISSION) -> list[SweepPoint]:
    """Thickness sweep as sweep points for one channel."""
    prefix = Mode.parse(mode).channel
    return [
        SweepPoint(
            control_kind=ControlKind.THICKNESS,
            control=float(row["thickness_mm"]),
            resonance=float(row[f"{prefix}_ghz"]),
            depth=float(row[f"{prefix}_db"]),
        )
        for row in load_table("thickness_sweep")
    ]


def permittivity_points() -> list[SweepPoint]:
    """Permittivity sweep (S21) as sweep points."""
    return [
        SweepPoint(
            control_kind=ControlKind.PERMITTIVITY,
            control=float(row["permittivity"]),
            resonance=float(row["s21_ghz"]),
        )
        for row in load_table("permittivity_sweep")
    ]


def standard_samples(mode=Mode.TRANSMISSION) -> list[MaterialSample]:
    """Standard materials with their notch for one channel."""
    mode = Mode.parse(mode)
    return [
        MaterialSample(
            name=row["name"],
            permittivity=float(row["permittivity"]),
            resonance=float(row[f"{mode.channel}_ghz"]),
            mode=mode,
        )
        for row in load_table("standard_materials")
    ]


def simulated_peak_samples() -> list[MaterialSample]:
    """The simulated-peak column of the calculated-peaks table."""
    return [
        MaterialSample(
            name=row["name"],
            permittivity=float(row["permittivity"]),
            resonance=float(row["simulated_ghz"]),
            mode=Mode.TRANSMISSION,
        )
        for row in load_table("calculated_peaks")
    ]


def claimed_sensitivity(mode=Mode.TRANSMISSION) -> float:
    """Published sensitivity figure (percent) for a mode."""
    mode = Mode.parse(mode)
    for row in load_table("published_claims"):
        if row["mode"] == mode.value:
            return float(row["value_pct"])
    raise KeyError(f"no published sensitivity claim for {mode.value}")
