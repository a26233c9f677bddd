"""
Resonance notch detection.

Finds notches in |S11| or |S21| dB traces, refines each one below the grid
spacing with a 3-point parabola in dB, and measures Q from the bandwidth
at a fixed offset above the notch floor.
"""

from dataclasses import asdict, dataclass, replace
from enum import Enum
from typing import Optional

import numpy as np
from scipy.signal import find_peaks

from ..config import settings
from ..errors import ResonanceError
from ..rf.touchstone import DB_FLOOR, FrequencyResponse
from ..utils import get_logger

logger = get_logger(__name__)


class Mode(str, Enum):
    """Which S-parameter a resonance is read from."""
    REFLECTION = "reflection"  # S11
    TRANSMISSION = "transmission"  # S21

    @property
    def channel(self) -> str:
        return "s11" if self is Mode.REFLECTION else "s21"

    @classmethod
    def parse(cls, value) -> "Mode":
        """Accept a Mode, its value, or the channel name (s11/s21)."""
        if isinstance(value, Mode):
            return value
        text = str(value).strip().lower()
        aliases = {"s11": cls.REFLECTION, "s21": cls.TRANSMISSION}
        if text in aliases:
            return aliases[text]
        try:
            return cls(text)
        except ValueError:
            raise ResonanceError(
                f"unknown mode {value!r} (use reflection/transmission or s11/s21)"
            ) from None


@dataclass(frozen=True)
class Resonance:
    """A detected notch."""
    frequency: float  # Hz, parabola-refined
    depth: float  # dB at the refined minimum
    mode: Mode
    grid_index: int
    q: Optional[float] = None

    def to_dict(self) -> dict:
        data = asdict(self)
        data["mode"] = self.mode.value
        return data


def _trace_db(resp: FrequencyResponse, mode: Mode) -> np.ndarray:
    db = resp.channel_db(mode.channel)
    return np.where(np.isneginf(db), DB_FLOOR, db)


def refine_parabolic(
    f_prev: float,
    f_min: float,
    f_next: float,
    d_prev: float,
    d_min: float,
    d_next: float,
) -> tuple[float, float]:
    """
    Vertex of the parabola through three (frequency, dB) samples.

    The grid may be non-uniform. Collinear samples (zero curvature) return
    (f_min, d_min) unchanged. The vertex always lies in (f_prev, f_next).

    Raises:
        ResonanceError: if the middle sample is not a minimum or the
            frequencies are not ascending.
    """
    if not f_prev < f_min < f_next:
        raise ResonanceError("refinement needs ascending frequencies f_prev < f_min < f_next")
    if d_min > d_prev or d_min > d_next:
        raise ResonanceError("refinement needs the middle sample to be a minimum")

    if d_prev == d_next and (f_min - f_prev) == (f_next - f_min):
        return f_min, d_min

    slope_left = (d_min - d_prev) / (f_min - f_prev)
    slope_right = (d_next - d_min) / (f_next - f_min)
    curvature = (slope_right - slope_left) / (f_next - f_prev)
    if curvature <= 0:
        return f_min, d_min

    vertex = 0.5 * (f_prev + f_min) - slope_left / (2.0 * curvature)
    vertex = min(max(vertex, np.nextafter(f_prev, f_next)), np.nextafter(f_next, f_prev))
    depth = d_min - curvature * (f_min - vertex) ** 2
    return float(vertex), float(depth)


def _merge(candidates: list[Resonance], min_separation: float) -> list[Resonance]:
    # deepest first; a notch survives only if no deeper survivor is too close
    kept: list[Resonance] = []
    for cand in sorted(candidates, key=lambda r: (r.depth, r.frequency)):
        if all(abs(cand.frequency - k.frequency) >= min_separation for k in kept):
            kept.append(cand)
    return sorted(kept, key=lambda r: r.frequency)


def find_notches(
    resp: FrequencyResponse,
    mode="transmission",
    threshold: Optional[float] = None,
    min_separation: Optional[float] = None,
) -> list[Resonance]:
    """
    Detect notches below threshold (dB) in the S11 or S21 trace.

    Each discrete local minimum is refined with refine_parabolic. Notches
    closer than min_separation (Hz) are merged, keeping the deeper one.
    Results are sorted by frequency.

    Raises:
        ResonanceError: fewer than 3 points, or threshold >= 0.
    """
    mode = Mode.parse(mode)
    threshold = settings.notch_threshold_db if threshold is None else threshold
    min_separation = settings.notch_min_separation_hz if min_separation is None else min_separation

    if len(resp) < 3:
        raise ResonanceError(f"need at least 3 points to find notches, got {len(resp)}")
    if not threshold < 0:
        raise ResonanceError(f"threshold must be negative dB, got {threshold}")
    if min_separation < 0:
        raise ResonanceError(f"min_separation must be >= 0, got {min_separation}")

    f = resp.freqs
    db = _trace_db(resp, mode)
    minima, _ = find_peaks(-db)

    candidates = []
    for i in minima:
        if not db[i] < threshold:
            continue
        freq, depth = refine_parabolic(f[i - 1], f[i], f[i + 1], db[i - 1], db[i], db[i + 1])
        candidates.append(Resonance(frequency=freq, depth=depth, mode=mode, grid_index=int(i)))

    notches = _merge(candidates, min_separation)
    logger.debug(
        f"{mode.channel}: {len(minima)} local minima, {len(candidates)} below "
        f"{threshold} dB, {len(notches)} after merging"
    )
    return notches


def _crossing(f: np.ndarray, db: np.ndarray, level: float, start: int, step: int) -> Optional[float]:
    i = start
    while 0 <= i < len(db) and db[i] < level:
        i += step
    if not 0 <= i < len(db):
        return None
    if i == start:
        return float(f[i])
    j = i - step  # last sample below the level
    return float(f[i] + (level - db[i]) * (f[j] - f[i]) / (db[j] - db[i]))


def q_factor(resp: FrequencyResponse, r: Resonance, offset: Optional[float] = None) -> float:
    """
    Loaded Q = f0 / (f_right - f_left).

    The band edges are the linearly interpolated crossings of
    depth + offset dB nearest the notch on each side; the offset is
    measured from the notch floor, not from 0 dB.

    Raises:
        ResonanceError: naming the side where no crossing exists.
    """
    offset = settings.q_offset_db if offset is None else offset
    if not offset > 0:
        raise ResonanceError(f"offset must be positive, got {offset}")

    db = _trace_db(resp, r.mode)
    level = r.depth + offset

    f_left = _crossing(resp.freqs, db, level, r.grid_index, -1)
    if f_left is None:
        raise ResonanceError(
            f"no {offset:g} dB crossing on the left side of the notch at {r.frequency:.6g} Hz"
        )
    f_right = _crossing(resp.freqs, db, level, r.grid_index, +1)
    if f_right is None:
        raise ResonanceError(
            f"no {offset:g} dB crossing on the right side of the notch at {r.frequency:.6g} Hz"
        )
    if not f_right > f_left:
        raise ResonanceError(f"zero bandwidth at {r.frequency:.6g} Hz")
    return r.frequency / (f_right - f_left)


def annotate_q(
    resp: FrequencyResponse,
    resonances: list[Resonance],
    offset: Optional[float] = None,
) -> list[Resonance]:
    """Copies of the resonances with q filled where both crossings exist."""
    annotated = []
    for r in resonances:
        try:
            annotated.append(replace(r, q=q_factor(resp, r, offset)))
        except ResonanceError as e:
            logger.debug(f"Q unavailable: {e}")
            annotated.append(r)
    return annotated
