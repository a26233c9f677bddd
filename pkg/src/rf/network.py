"""
Two-port ladder network algebra.

Element impedances, ABCD (transmission) matrices, cascading, ABCD to S
conversion and frequency sweeps over an ordered ladder of series and
shunt R, L, C and RLC elements.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from ..config import settings
from ..errors import NetworkError
from ..utils import get_logger
from .touchstone import FrequencyResponse

logger = get_logger(__name__)


class Topology(str, Enum):
    """Where an element sits in the ladder."""
    SERIES = "series"  # in line between the ports
    SHUNT = "shunt"  # from the line to ground


class Kind(str, Enum):
    """Element type."""
    R = "R"
    L = "L"
    C = "C"
    RLC_S = "RLC_S"  # R, L and C in series
    RLC_P = "RLC_P"  # R, L and C in parallel


@dataclass(frozen=True)
class Element:
    """
    A single ladder element.

    Values are ohms, henries and farads. For the RLC kinds an absent
    component takes its neutral limit: in series a missing R or L is a
    short and a missing C is a short (infinite capacitance); in parallel
    a missing R or L is an open and a missing C contributes no admittance.
    R may be zero (lossless); L and C must be strictly positive.
    """
    topology: Topology
    kind: Kind
    r: Optional[float] = None
    l: Optional[float] = None
    c: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "topology", Topology(self.topology))
        object.__setattr__(self, "kind", Kind(self.kind))

        if self.r is not None and not self.r >= 0:
            raise NetworkError(f"resistance must be >= 0, got {self.r}")
        for name in ("l", "c"):
            value = getattr(self, name)
            if value is not None and not value > 0:
                raise NetworkError(f"{name.upper()} must be > 0, got {value}")

        required = {Kind.R: "r", Kind.L: "l", Kind.C: "c"}.get(self.kind)
        if required and getattr(self, required) is None:
            raise NetworkError(f"{self.kind.value} element needs a {required.upper()} value")
        if self.kind in (Kind.RLC_S, Kind.RLC_P) and self.r is None and self.l is None and self.c is None:
            raise NetworkError(f"{self.kind.value} element needs at least one component value")

    def with_values(self, **values) -> "Element":
        """Copy with some of r, l, c replaced."""
        current = {"r": self.r, "l": self.l, "c": self.c}
        current.update(values)
        return Element(self.topology, self.kind, **current)


@dataclass(frozen=True)
class Netlist:
    """Ordered two-port ladder, port 1 side first."""
    elements: tuple[Element, ...]
    z0: float = 50.0
    name: str = ""
    description: str = ""

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))
        if not self.z0 > 0:
            raise NetworkError(f"z0 must be positive, got {self.z0}")


@dataclass(frozen=True)
class AbcdMatrix:
    """2x2 chain matrix. b is in ohms, c in siemens, a and d dimensionless."""
    a: complex = 1.0
    b: complex = 0.0
    c: complex = 0.0
    d: complex = 1.0

    @property
    def det(self) -> complex:
        return self.a * self.d - self.b * self.c

    def as_array(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]], dtype=complex)

    def __matmul__(self, other: "AbcdMatrix") -> "AbcdMatrix":
        return AbcdMatrix(
            a=self.a * other.a + self.b * other.c,
            b=self.a * other.b + self.b * other.d,
            c=self.c * other.a + self.d * other.c,
            d=self.c * other.b + self.d * other.d,
        )


def _check_omega(omega) -> np.ndarray:
    w = np.asarray(omega, dtype=float)
    if np.any(~(w > 0)):
        raise NetworkError("angular frequency must be positive")
    return w


def element_impedance(e: Element, omega):
    """
    Impedance of one element at omega (rad/s); scalar or array.

    series RLC: Z = R + jwL + 1/(jwC)
    parallel RLC: Z = 1/(1/R + 1/(jwL) + jwC)
    """
    w = _check_omega(omega)

    if e.kind is Kind.R:
        z = np.full(w.shape, e.r, dtype=complex)
    elif e.kind is Kind.L:
        z = 1j * w * e.l
    elif e.kind is Kind.C:
        z = 1.0 / (1j * w * e.c)
    elif e.kind is Kind.RLC_S:
        z = np.zeros(w.shape, dtype=complex)
        if e.r is not None:
            z = z + e.r
        if e.l is not None:
            z = z + 1j * w * e.l
        if e.c is not None:
            z = z + 1.0 / (1j * w * e.c)
    else:
        if e.r == 0:
            # a zero-ohm branch shorts the whole parallel group
            z = np.zeros(w.shape, dtype=complex)
        else:
            y = np.zeros(w.shape, dtype=complex)
            if e.r is not None:
                y = y + 1.0 / e.r
            if e.l is not None:
                y = y + 1.0 / (1j * w * e.l)
            if e.c is not None:
                y = y + 1j * w * e.c
            with np.errstate(divide="ignore", invalid="ignore"):
                z = np.where(y == 0, np.inf + 0j, 1.0 / np.where(y == 0, 1.0, y))

    if np.ndim(z) == 0:
        return complex(z)
    return z


def _element_abcd_arrays(e: Element, w: np.ndarray, freqs: Optional[np.ndarray] = None):
    """Vectorized (a, b, c, d) arrays of one element over an omega grid."""
    z = np.asarray(element_impedance(e, w), dtype=complex)
    ones = np.ones(w.shape, dtype=complex)
    zeros = np.zeros(w.shape, dtype=complex)

    if e.topology is Topology.SERIES:
        if np.any(np.isinf(z)):
            idx = int(np.flatnonzero(np.isinf(z))[0])
            freq = None if freqs is None else float(freqs[idx])
            raise NetworkError(f"series {e.kind.value} element is an open circuit", freq)
        return ones, z, zeros, ones

    if np.any(z == 0):
        idx = int(np.flatnonzero(z == 0)[0])
        freq = None if freqs is None else float(freqs[idx])
        raise NetworkError(
            f"shunt {e.kind.value} element has zero impedance (infinite admittance)", freq
        )
    with np.errstate(divide="ignore"):
        y = np.where(np.isinf(z), 0j, 1.0 / z)
    return ones, zeros, y, ones


def element_abcd(e: Element, omega: float) -> AbcdMatrix:
    """
    ABCD matrix of one element.

    series Z -> [[1, Z], [0, 1]]; shunt Y = 1/Z -> [[1, 0], [Y, 1]].
    """
    w = _check_omega(omega)
    if w.ndim != 0:
        raise NetworkError("element_abcd takes a single angular frequency")
    a, b, c, d = _element_abcd_arrays(e, w)
    return AbcdMatrix(complex(a), complex(b), complex(c), complex(d))


def cascade(ms: Sequence[AbcdMatrix]) -> AbcdMatrix:
    """Ordered product of chain matrices, first nearest port 1."""
    if not ms:
        raise NetworkError("cannot cascade an empty list of matrices")
    result = ms[0]
    for m in ms[1:]:
        result = result @ m
    return result


def _abcd_to_s_arrays(a, b, c, d, z0: float, det=None, freqs=None):
    """Vectorized ABCD to S. Returns (s11, s12, s21, s22)."""
    if det is None:
        det = a * d - b * c
    delta = a + b / z0 + c * z0 + d
    if np.any(delta == 0):
        idx = int(np.flatnonzero(np.asarray(delta == 0).reshape(-1))[0])
        freq = None if freqs is None else float(freqs[idx])
        raise NetworkError("degenerate network (A + B/z0 + C*z0 + D = 0)", freq)
    s11 = (a + b / z0 - c * z0 - d) / delta
    s12 = 2.0 * det / delta
    s21 = 2.0 / delta
    s22 = (-a + b / z0 - c * z0 + d) / delta
    return s11, s12, s21, s22


def abcd_to_s(m: AbcdMatrix, z0: float = 50.0) -> np.ndarray:
    """
    Convert a chain matrix to a 2x2 S-matrix [[s11, s12], [s21, s22]].

    Raises:
        NetworkError: if z0 <= 0 or the network is degenerate.
    """
    if not z0 > 0:
        raise NetworkError(f"z0 must be positive, got {z0}")
    s11, s12, s21, s22 = _abcd_to_s_arrays(
        complex(m.a), complex(m.b), complex(m.c), complex(m.d), z0
    )
    return np.array([[s11, s12], [s21, s22]], dtype=complex)


def linear_sweep(fmin: float, fmax: float, points: Optional[int] = None) -> np.ndarray:
    """Evenly spaced frequency grid in Hz, both ends included."""
    points = points if points is not None else settings.sweep_points
    if not fmin > 0:
        raise NetworkError(f"fmin must be positive, got {fmin}")
    if not fmax > fmin:
        raise NetworkError(f"fmax ({fmax}) must exceed fmin ({fmin})")
    if points < 2:
        raise NetworkError(f"a sweep needs at least 2 points, got {points}")
    return np.linspace(fmin, fmax, points)


def simulate(n: Netlist, freqs) -> FrequencyResponse:
    """
    S-parameters of a ladder over a frequency grid.

    All frequencies are evaluated at once as stacked 2x2 products. The
    determinant used for s12 is the product of element determinants,
    each exactly 1, so reciprocity holds to rounding of 2/delta.
    """
    if not n.elements:
        raise NetworkError("cannot simulate an empty netlist")
    f = np.asarray(freqs, dtype=float).reshape(-1)
    if f.size == 0:
        raise NetworkError("frequency grid is empty")
    if np.any(f <= 0) or np.any(np.diff(f) <= 0):
        raise NetworkError("frequencies must be positive and strictly increasing")

    w = 2.0 * np.pi * f
    total = np.broadcast_to(np.eye(2, dtype=complex), (len(f), 2, 2)).copy()
    det = np.ones(len(f), dtype=complex)
    for element in n.elements:
        a, b, c, d = _element_abcd_arrays(element, w, f)
        m = np.stack([np.stack([a, b], axis=-1), np.stack([c, d], axis=-1)], axis=-2)
        total = np.matmul(total, m)
        det = det * (a * d - b * c)

    s11, s12, s21, s22 = _abcd_to_s_arrays(
        total[:, 0, 0], total[:, 0, 1], total[:, 1, 0], total[:, 1, 1], n.z0, det=det, freqs=f
    )
    logger.debug(f"simulated {len(n.elements)} elements over {len(f)} points")
    return FrequencyResponse.from_channels(f, s11, s21, s12, s22, z0=n.z0)
