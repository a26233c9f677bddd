"""
Permittivity calibration.

A constrained parabola maps relative permittivity to notch frequency:

    f(eps) = x1 - x2*(eps - 1) + x3*(eps - 1)**2        [GHz]

x1 is the unloaded (air) resonance. The model is fitted to materials of
known permittivity, evaluated forward, and inverted on its decreasing
branch to read permittivity off a measured notch.

The squared term is (eps - 1)**2. Writing it as (eps**2 - 1)**2 gives
3.908 GHz at eps = 2.2 instead of the tabulated 3.6017 GHz;
evaluate_printed_form keeps that variant around for comparison only.
"""

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np
import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from ..errors import CalibrationError
from ..utils import get_logger
from .resonance import Mode

logger = get_logger(__name__)

SAMPLE_COLUMNS = ("name", "permittivity", "resonance_ghz", "mode")


@dataclass(frozen=True)
class MaterialSample:
    """A material of known permittivity and its measured notch."""
    name: str
    permittivity: float
    resonance: float  # GHz
    mode: Mode = Mode.TRANSMISSION

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode.parse(self.mode))
        if not self.permittivity >= 1:
            raise CalibrationError(f"{self.name}: permittivity must be >= 1, got {self.permittivity}")
        if not self.resonance > 0:
            raise CalibrationError(f"{self.name}: resonance must be > 0, got {self.resonance}")


@dataclass(frozen=True)
class CalibrationModel:
    """Constants of the permittivity parabola and its validity range."""
    x1: float  # GHz, unloaded resonance
    x2: float  # GHz per unit permittivity
    x3: float  # GHz per unit permittivity squared
    eps_min: float = 1.0
    eps_max: float = 6.0
    mode: Mode = Mode.TRANSMISSION
    provenance: str = ""

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode.parse(self.mode))
        if not self.x1 > 0:
            raise CalibrationError(f"x1 must be > 0, got {self.x1}")
        if not self.x3 >= 0:
            raise CalibrationError(f"x3 must be >= 0 (convex model), got {self.x3}")
        if not self.x2 > 0:
            raise CalibrationError(f"x2 must be > 0 for a decreasing model, got {self.x2}")
        if not 1 <= self.eps_min < self.eps_max:
            raise CalibrationError(
                f"validity range must satisfy 1 <= eps_min < eps_max, "
                f"got [{self.eps_min}, {self.eps_max}]"
            )
        if self.eps_max >= self.eps_vertex:
            raise CalibrationError(
                f"eps_max {self.eps_max} reaches the parabola vertex at "
                f"{self.eps_vertex:.6g}; model is not monotone on its range"
            )

    @property
    def eps_vertex(self) -> float:
        """Permittivity where the parabola turns (inf when x3 == 0)."""
        if self.x3 == 0:
            return float("inf")
        return 1.0 + self.x2 / (2.0 * self.x3)

    @property
    def f_min(self) -> float:
        """Lowest frequency the model can invert (at eps_max)."""
        return _polynomial(self, self.eps_max)

    @property
    def f_max(self) -> float:
        """Highest frequency the model can invert (at eps_min)."""
        return _polynomial(self, self.eps_min)

    def to_dict(self) -> dict:
        return {
            "x1_ghz": self.x1,
            "x2_ghz": self.x2,
            "x3_ghz": self.x3,
            "eps_min": self.eps_min,
            "eps_max": self.eps_max,
            "mode": self.mode.value,
            "provenance": self.provenance,
        }


# Published transmission-mode constants, valid over the 1-6 sensing range.
REFERENCE_MODEL = CalibrationModel(
    x1=3.99,
    x2=0.3512,
    x3=0.0230,
    eps_min=1.0,
    eps_max=6.0,
    mode=Mode.TRANSMISSION,
    provenance="published S21 calibration constants",
)

PRESETS = {
    "reference-s21": REFERENCE_MODEL,
}


def _polynomial(m: CalibrationModel, eps: float) -> float:
    u = eps - 1.0
    return m.x1 - m.x2 * u + m.x3 * u * u


def evaluate(m: CalibrationModel, eps: float) -> float:
    """
    Notch frequency (GHz) for a permittivity inside the validity range.

    Raises:
        CalibrationError: eps outside [eps_min, eps_max].
    """
    if not m.eps_min <= eps <= m.eps_max:
        raise CalibrationError(
            f"permittivity {eps} outside model range [{m.eps_min}, {m.eps_max}]"
        )
    return _polynomial(m, eps)


def evaluate_printed_form(m: CalibrationModel, eps: float) -> float:
    """x1 - x2*(eps - 1) + x3*(eps**2 - 1)**2, kept to show why it is not used."""
    return m.x1 - m.x2 * (eps - 1.0) + m.x3 * (eps * eps - 1.0) ** 2


def invert(m: CalibrationModel, f: float) -> float:
    """
    Permittivity for a notch frequency (GHz) on the decreasing branch.

    Uses eps = 1 + 2*(x1 - f) / (x2 + sqrt(x2**2 - 4*x3*(x1 - f))), which
    equals 1 + (x2 - sqrt(...)) / (2*x3) but stays accurate as x3 -> 0 and
    reduces to 1 + (x1 - f)/x2 at x3 == 0.

    Raises:
        CalibrationError: f outside [evaluate(eps_max), evaluate(eps_min)]
            or a negative discriminant.
    """
    lo, hi = m.f_min, m.f_max
    if not lo <= f <= hi:
        raise CalibrationError(
            f"frequency {f} GHz outside invertible range [{lo:.6g}, {hi:.6g}] GHz"
        )
    shift = m.x1 - f
    disc = m.x2 * m.x2 - 4.0 * m.x3 * shift
    if disc < 0:
        raise CalibrationError(f"negative discriminant {disc:.3g} inverting {f} GHz")
    return 1.0 + 2.0 * shift / (m.x2 + np.sqrt(disc))


def fit(
    samples: Sequence[MaterialSample],
    anchor_air: bool = True,
    provenance: str = "",
) -> CalibrationModel:
    """
    Least-squares fit of the calibration parabola.

    Anchored (default): x1 is the air sample's resonance and (x2, x3) solve
    the linear problem over the basis [-(eps - 1), (eps - 1)**2] against
    f - x1. Unanchored: all three constants by least squares. The validity
    range spans the sample permittivities.

    Raises:
        CalibrationError: fewer than 3 samples, mixed modes, anchoring
            without exactly one air sample, a rank-deficient design, or a
            result that is not a valid (convex, decreasing) model.
    """
    samples = list(samples)
    if len(samples) < 3:
        raise CalibrationError(f"need at least 3 samples to fit, got {len(samples)}")
    modes = {s.mode for s in samples}
    if len(modes) != 1:
        raise CalibrationError("samples mix reflection and transmission modes")
    mode = modes.pop()

    eps = np.array([s.permittivity for s in samples], dtype=float)
    freq = np.array([s.resonance for s in samples], dtype=float)
    u = eps - 1.0

    if anchor_air:
        air = [s for s in samples if s.permittivity == 1]
        if len(air) != 1:
            raise CalibrationError(
                f"anchored fit needs exactly one air sample (permittivity 1), got {len(air)}"
            )
        x1 = air[0].resonance
        design = np.column_stack([-u, u * u])
        target = freq - x1
    else:
        design = np.column_stack([np.ones_like(u), -u, u * u])
        target = freq

    solution, _, rank, _ = np.linalg.lstsq(design, target, rcond=None)
    if rank < design.shape[1]:
        raise CalibrationError(
            f"rank-deficient design matrix (rank {rank} of {design.shape[1]}); "
            "samples need at least 3 distinct permittivities"
        )

    if anchor_air:
        x2, x3 = solution
    else:
        x1, x2, x3 = solution

    model = CalibrationModel(
        x1=float(x1),
        x2=float(x2),
        x3=float(x3),
        eps_min=float(eps.min()),
        eps_max=float(eps.max()),
        mode=mode,
        provenance=provenance or f"{'anchored' if anchor_air else 'unanchored'} fit of {len(samples)} samples",
    )
    logger.info(
        f"Calibration fit ({'anchored' if anchor_air else 'unanchored'}): "
        f"x1={model.x1:.6g} x2={model.x2:.6g} x3={model.x3:.6g}"
    )
    return model


def objective(model: CalibrationModel, samples: Sequence[MaterialSample]) -> float:
    """Sum of squared frequency residuals (GHz^2) of a model over samples."""
    return float(sum((_polynomial(model, s.permittivity) - s.resonance) ** 2 for s in samples))


def relative_error(simulated: float, calculated: float, measured: Optional[float] = None) -> float:
    """
    (simulated - calculated) / measured * 100, in percent.

    Without a physical measurement, measured defaults to simulated.

    Raises:
        CalibrationError: measured == 0.
    """
    measured = simulated if measured is None else measured
    if measured == 0:
        raise CalibrationError("relative error undefined for a zero reference value")
    return (simulated - calculated) / measured * 100.0 + 0.0


def absolute_relative_error(simulated: float, calculated: float, measured: Optional[float] = None) -> float:
    """|relative_error|, as tabulated."""
    return abs(relative_error(simulated, calculated, measured))


@dataclass(frozen=True)
class ErrorRow:
    """One material compared against a model."""
    name: str
    permittivity: float
    simulated: float  # GHz
    calculated: float  # GHz
    relative_error: float  # percent
    abs_relative_error: float  # percent


def relative_error_table(model: CalibrationModel, samples: Sequence[MaterialSample]) -> list[ErrorRow]:
    """Model prediction and relative error for every sample."""
    rows = []
    for s in samples:
        calculated = evaluate(model, s.permittivity)
        re = relative_error(s.resonance, calculated)
        rows.append(ErrorRow(
            name=s.name,
            permittivity=s.permittivity,
            simulated=s.resonance,
            calculated=calculated,
            relative_error=re,
            abs_relative_error=abs(re),
        ))
    return rows


def parse_samples(text: str) -> list[MaterialSample]:
    """
    Parse a sample CSV (name,permittivity,resonance_ghz,mode).

    Extra columns are ignored; mode may be empty (transmission).
    """
    reader = csv.DictReader(text.splitlines())
    fields = [f.strip() for f in (reader.fieldnames or [])]
    missing = [c for c in SAMPLE_COLUMNS[:3] if c not in fields]
    if missing:
        raise CalibrationError(f"sample file missing columns: {', '.join(missing)}")

    samples = []
    for lineno, row in enumerate(reader, start=2):
        row = {k.strip(): (v or "").strip() for k, v in row.items() if k}
        try:
            samples.append(MaterialSample(
                name=row["name"],
                permittivity=float(row["permittivity"]),
                resonance=float(row["resonance_ghz"]),
                mode=row.get("mode") or Mode.TRANSMISSION,
            ))
        except ValueError as e:
            raise CalibrationError(f"line {lineno}: {e}") from None
    return samples


def load_samples(path: Union[str, Path]) -> list[MaterialSample]:
    """Read a sample CSV file."""
    return parse_samples(Path(path).read_text())


class ModelFile(BaseModel):
    """YAML schema of a saved calibration model."""
    model_config = ConfigDict(extra="forbid")

    x1_ghz: float
    x2_ghz: float
    x3_ghz: float = Field(ge=0)
    eps_min: float = 1.0
    eps_max: float = 6.0
    mode: str = Mode.TRANSMISSION.value
    provenance: str = ""


def render_model(m: CalibrationModel) -> str:
    """Serialize a model to YAML."""
    return yaml.safe_dump(m.to_dict(), sort_keys=False)


def parse_model(text: str) -> CalibrationModel:
    """Parse a model YAML document."""
    try:
        data = yaml.safe_load(text)
        spec = ModelFile.model_validate(data)
    except (yaml.YAMLError, ValidationError) as e:
        raise CalibrationError(f"invalid calibration model file: {e}") from None
    return CalibrationModel(
        x1=spec.x1_ghz,
        x2=spec.x2_ghz,
        x3=spec.x3_ghz,
        eps_min=spec.eps_min,
        eps_max=spec.eps_max,
        mode=spec.mode,
        provenance=spec.provenance,
    )


def save_model(m: CalibrationModel, path: Union[str, Path]) -> None:
    Path(path).write_text(render_model(m))


def load_model(path: Union[str, Path]) -> CalibrationModel:
    return parse_model(Path(path).read_text())
