"""
Cavity perturbation frequency shift.

Evaluates the first-order shift of a resonance when material changes the
permittivity (and optionally permeability) inside the field region:

    df/f = -sum(de * Re(E1 . conj(E0)) + dmu * Re(H1 . conj(H0))) dv
           / sum(eps0 |E0|^2 + mu0 |H0|^2) dv

The leading minus makes added permittivity lower the frequency. Sums are
numpy pairwise reductions over contiguous float64 arrays in cell order,
so results are bit-stable for a given grid.
"""

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

import numpy as np
from scipy import constants

from ..errors import PerturbationError
from ..utils import get_logger

logger = get_logger(__name__)

VECTOR_FIELDS = ("e0", "e1", "h0", "h1")
AXES = ("x", "y", "z")


def _vector_columns(name: str) -> list[str]:
    return [f"{name}{axis}_{part}" for axis in AXES for part in ("re", "im")]


@dataclass(frozen=True)
class FieldGrid:
    """
    Voxelized field samples on uniform cells.

    e0/e1 (V/m) and h0/h1 (A/m) are (n, 3) complex phasors before and
    after perturbation; delta_eps (F/m) and delta_mu (H/m) are absolute
    per-cell changes. Missing magnetic inputs are zero-filled.
    """
    cell_volume: float  # m^3
    e0: np.ndarray
    e1: np.ndarray
    delta_eps: np.ndarray
    h0: Optional[np.ndarray] = None
    h1: Optional[np.ndarray] = None
    delta_mu: Optional[np.ndarray] = None
    eps0: float = constants.epsilon_0
    mu0: float = constants.mu_0

    def __post_init__(self):
        if not self.cell_volume > 0:
            raise PerturbationError(f"cell_volume must be > 0, got {self.cell_volume}")

        e0 = self._vectors("e0", self.e0)
        n = len(e0)
        arrays = {
            "e0": e0,
            "e1": self._vectors("e1", self.e1),
            "h0": self._vectors("h0", self.h0, n),
            "h1": self._vectors("h1", self.h1, n),
            "delta_eps": self._scalars("delta_eps", self.delta_eps),
            "delta_mu": self._scalars("delta_mu", self.delta_mu, n),
        }
        for name, arr in arrays.items():
            if len(arr) != n:
                raise PerturbationError(f"{name} has {len(arr)} cells, expected {n}")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @staticmethod
    def _vectors(name: str, value, n: Optional[int] = None) -> np.ndarray:
        if value is None:
            return np.zeros((n or 0, 3), dtype=complex)
        arr = np.ascontiguousarray(value, dtype=complex)
        if arr.ndim != 2 or arr.shape[1] != 3:
            raise PerturbationError(f"{name} must have shape (n, 3), got {arr.shape}")
        return arr

    @staticmethod
    def _scalars(name: str, value, n: Optional[int] = None) -> np.ndarray:
        if value is None:
            return np.zeros(n or 0, dtype=float)
        arr = np.ascontiguousarray(value, dtype=float).reshape(-1)
        return arr

    def __len__(self) -> int:
        return len(self.e0)


def _overlap(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Per-cell Re(a . conj(b))."""
    return np.real(np.sum(a * np.conj(b), axis=1))


def _energy(v: np.ndarray) -> np.ndarray:
    return np.sum(np.abs(v) ** 2, axis=1)


def frequency_shift_full(g: FieldGrid) -> float:
    """
    Fractional shift df/f with electric and magnetic terms.

    Raises:
        PerturbationError: zero (or negative) stored-energy denominator.
    """
    dv = g.cell_volume
    numerator = np.sum(g.delta_eps * _overlap(g.e1, g.e0) + g.delta_mu * _overlap(g.h1, g.h0)) * dv
    denominator = np.sum(g.eps0 * _energy(g.e0) + g.mu0 * _energy(g.h0)) * dv
    if not denominator > 0:
        raise PerturbationError("stored energy of the unperturbed field is zero")
    return float(-numerator / denominator) + 0.0


def frequency_shift_electric(g: FieldGrid) -> float:
    """
    Fractional shift df/f from the permittivity change alone.

    The denominator keeps only the electric energy, the usual form for
    dielectric samples where magnetic changes are negligible.

    Raises:
        PerturbationError: zero electric-energy denominator.
    """
    dv = g.cell_volume
    numerator = np.sum(g.delta_eps * _overlap(g.e1, g.e0)) * dv
    denominator = np.sum(g.eps0 * _energy(g.e0)) * dv
    if not denominator > 0:
        raise PerturbationError("electric energy of the unperturbed field is zero")
    return float(-numerator / denominator) + 0.0


def _parse_metadata(line: str) -> dict[str, float]:
    meta = {}
    for token in line.lstrip("#").split():
        if "=" not in token:
            continue
        key, value = token.split("=", 1)
        try:
            meta[key.strip().lower()] = float(value)
        except ValueError:
            raise PerturbationError(f"bad metadata value {token!r}") from None
    return meta


def parse_field_grid(text: str) -> FieldGrid:
    """
    Parse a field grid CSV.

    The first line is metadata, `# cell_volume=1e-9 eps0=... mu0=...`
    (eps0/mu0 optional). The header names columns such as e0x_re, e0x_im,
    ..., h1z_im, delta_eps, delta_mu. e0, e1 and delta_eps are required;
    magnetic columns may be left out.
    """
    lines = text.splitlines()
    if not lines or not lines[0].startswith("#"):
        raise PerturbationError("field grid must start with a '# cell_volume=...' metadata line")
    meta = _parse_metadata(lines[0])
    if "cell_volume" not in meta:
        raise PerturbationError("metadata line has no cell_volume")

    reader = csv.DictReader(lines[1:])
    header = [h.strip() for h in (reader.fieldnames or [])]
    required = _vector_columns("e0") + _vector_columns("e1") + ["delta_eps"]
    missing = [c for c in required if c not in header]
    if missing:
        raise PerturbationError(f"field grid missing columns: {', '.join(missing)}")

    rows = []
    for lineno, row in enumerate(reader, start=3):
        try:
            rows.append({k.strip(): float(v) for k, v in row.items() if k})
        except (TypeError, ValueError):
            raise PerturbationError(f"line {lineno}: non-numeric or missing value") from None

    def vectors(name: str) -> Optional[np.ndarray]:
        cols = _vector_columns(name)
        if not all(c in header for c in cols):
            return None
        out = np.zeros((len(rows), 3), dtype=complex)
        for i, row in enumerate(rows):
            for k, axis in enumerate(AXES):
                out[i, k] = complex(row[f"{name}{axis}_re"], row[f"{name}{axis}_im"])
        return out

    return FieldGrid(
        cell_volume=meta["cell_volume"],
        e0=vectors("e0"),
        e1=vectors("e1"),
        h0=vectors("h0"),
        h1=vectors("h1"),
        delta_eps=np.array([row["delta_eps"] for row in rows], dtype=float),
        delta_mu=np.array([row["delta_mu"] for row in rows], dtype=float) if "delta_mu" in header else None,
        eps0=meta.get("eps0", constants.epsilon_0),
        mu0=meta.get("mu0", constants.mu_0),
    )


def load_field_grid(path: Union[str, Path]) -> FieldGrid:
    """Read a field grid CSV file."""
    grid = parse_field_grid(Path(path).read_text())
    logger.info(f"Loaded field grid with {len(grid)} cells from {Path(path).name}")
    return grid
