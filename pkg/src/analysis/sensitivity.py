"""
Sensor sensitivity figures of merit.

Normalized average sensitivity of a notch to permittivity, adjacent-pair
reports over permittivity sweeps, and the thickness at which added
material stops moving the notch.
"""

import csv
from dataclasses import asdict, dataclass, field
from enum import Enum
from pathlib import Path
from typing import Optional, Sequence, Union

from ..errors import SensitivityError
from ..utils import get_logger

logger = get_logger(__name__)

SWEEP_COLUMNS = ("control_kind", "control_value", "resonance_ghz", "depth_db")

# Absolute slack (GHz) so values printed to two decimals that sit exactly
# on the tolerance boundary count as inside it.
SATURATION_SLACK_GHZ = 1e-9


class ControlKind(str, Enum):
    """What a sweep varies."""
    PERMITTIVITY = "permittivity"  # relative, dimensionless
    THICKNESS = "thickness"  # mm


@dataclass(frozen=True)
class SweepPoint:
    """One step of a permittivity or thickness sweep."""
    control_kind: ControlKind
    control: float
    resonance: float  # GHz
    depth: Optional[float] = None  # dB

    def __post_init__(self):
        object.__setattr__(self, "control_kind", ControlKind(self.control_kind))
        if not self.resonance > 0:
            raise SensitivityError(f"resonance must be > 0, got {self.resonance}")


@dataclass(frozen=True)
class PairSensitivity:
    eps_low: float
    eps_high: float
    f_low_eps: float  # GHz
    f_high_eps: float  # GHz
    s_av: float  # percent


@dataclass
class SensitivityReport:
    """Sensitivity of every adjacent pair plus the full span."""
    pairs: list[PairSensitivity] = field(default_factory=list)
    endpoint: Optional[PairSensitivity] = None

    def to_dict(self) -> dict:
        return {
            "pairs": [asdict(p) for p in self.pairs],
            "endpoint": asdict(self.endpoint) if self.endpoint else None,
        }


def normalized_average_sensitivity(
    f_low_eps: float,
    f_high_eps: float,
    eps_low: float,
    eps_high: float,
) -> float:
    """
    S_av = |f_low_eps - f_high_eps| / (f_low_eps * (eps_high - eps_low)) * 100.

    f_low_eps is the notch at eps_low and normalizes the shift. The result
    is a positive percent per unit permittivity and does not depend on the
    frequency unit.

    Raises:
        SensitivityError: eps_high <= eps_low, eps_low < 1, or a
            non-positive frequency.
    """
    if not eps_high > eps_low:
        raise SensitivityError(f"eps_high ({eps_high}) must exceed eps_low ({eps_low})")
    if not eps_low >= 1:
        raise SensitivityError(f"eps_low must be >= 1, got {eps_low}")
    if not (f_low_eps > 0 and f_high_eps > 0):
        raise SensitivityError("resonance frequencies must be positive")
    return abs(f_low_eps - f_high_eps) / (f_low_eps * (eps_high - eps_low)) * 100.0


# Average sensitivity and its normalized form share one formula.
average_sensitivity = normalized_average_sensitivity


def frequency_shift(f_loaded: float, f_unloaded: float) -> float:
    """Notch shift f_r - f_0 caused by loading the sensor (same unit as inputs)."""
    return f_loaded - f_unloaded


def _pair(a: SweepPoint, b: SweepPoint) -> PairSensitivity:
    return PairSensitivity(
        eps_low=a.control,
        eps_high=b.control,
        f_low_eps=a.resonance,
        f_high_eps=b.resonance,
        s_av=normalized_average_sensitivity(a.resonance, b.resonance, a.control, b.control),
    )


def sensitivity_report(points: Sequence[SweepPoint]) -> SensitivityReport:
    """
    S_av for every adjacent pair and for the full span of a permittivity sweep.

    Points are ordered by permittivity first.

    Raises:
        SensitivityError: fewer than 2 points, thickness points, or
            duplicate permittivities.
    """
    points = list(points)
    if len(points) < 2:
        raise SensitivityError(f"need at least 2 sweep points, got {len(points)}")
    if any(p.control_kind is not ControlKind.PERMITTIVITY for p in points):
        raise SensitivityError("sensitivity report needs permittivity-tagged points")

    ordered = sorted(points, key=lambda p: p.control)
    for a, b in zip(ordered, ordered[1:]):
        if a.control == b.control:
            raise SensitivityError(f"duplicate permittivity {a.control}")

    report = SensitivityReport(
        pairs=[_pair(a, b) for a, b in zip(ordered, ordered[1:])],
        endpoint=_pair(ordered[0], ordered[-1]),
    )
    logger.debug(f"sensitivity over {len(ordered)} points: endpoint {report.endpoint.s_av:.4f}%")
    return report


def thickness_saturation(points: Sequence[SweepPoint], tol: float) -> float:
    """
    Smallest thickness (mm) from which every notch stays within +-tol GHz
    of the notch at the largest thickness.

    Returns the largest thickness when nothing saturates earlier. A larger
    tol never gives a larger result.

    Raises:
        SensitivityError: empty input, tol <= 0, non-thickness points, or
            thicknesses not strictly ascending.
    """
    points = list(points)
    if not points:
        raise SensitivityError("thickness sweep is empty")
    if not tol > 0:
        raise SensitivityError(f"tol must be > 0, got {tol}")
    if any(p.control_kind is not ControlKind.THICKNESS for p in points):
        raise SensitivityError("saturation analysis needs thickness-tagged points")
    for a, b in zip(points, points[1:]):
        if not b.control > a.control:
            raise SensitivityError("thicknesses must be strictly ascending")

    reference = points[-1].resonance
    saturated = points[-1].control
    for p in reversed(points[:-1]):
        if abs(p.resonance - reference) <= tol + SATURATION_SLACK_GHZ:
            saturated = p.control
        else:
            break
    return saturated


def parse_sweep(text: str) -> list[SweepPoint]:
    """Parse a sweep CSV (control_kind,control_value,resonance_ghz,depth_db)."""
    reader = csv.DictReader(text.splitlines())
    fields = [f.strip() for f in (reader.fieldnames or [])]
    missing = [c for c in SWEEP_COLUMNS[:3] if c not in fields]
    if missing:
        raise SensitivityError(f"sweep file missing columns: {', '.join(missing)}")

    points = []
    for lineno, row in enumerate(reader, start=2):
        row = {k.strip(): (v or "").strip() for k, v in row.items() if k}
        depth = row.get("depth_db") or None
        try:
            points.append(SweepPoint(
                control_kind=row["control_kind"].lower(),
                control=float(row["control_value"]),
                resonance=float(row["resonance_ghz"]),
                depth=float(depth) if depth is not None else None,
            ))
        except ValueError as e:
            raise SensitivityError(f"line {lineno}: {e}") from None
    return points


def load_sweep(path: Union[str, Path]) -> list[SweepPoint]:
    """Read a sweep CSV file."""
    return parse_sweep(Path(path).read_text())
