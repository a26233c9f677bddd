"""
Touchstone and CSV frequency-response I/O.

Reads and writes version 1 two-port (.s2p) files and a flat CSV layout.
All measured or simulated curves enter the toolkit through this module.

Internal storage is always complex rectangular, frequencies in Hz.
"""

import csv
import io
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, TextIO, Union

import numpy as np

from ..errors import TouchstoneError
from ..utils import get_logger

logger = get_logger(__name__)


FREQ_UNITS = {
    "HZ": 1.0,
    "KHZ": 1e3,
    "MHZ": 1e6,
    "GHZ": 1e9,
}

FORMATS = ("RI", "MA", "DB")
PARAMETERS = ("S", "Y", "Z", "G", "H")

# Written in place of -inf dB so files stay numeric.
DB_FLOOR = -400.0

# (row, col) of each channel inside the 2x2 matrix.
CHANNELS = {
    "s11": (0, 0),
    "s12": (0, 1),
    "s21": (1, 0),
    "s22": (1, 1),
}

# Touchstone v1 two-port column order.
TOUCHSTONE_ORDER = ("s11", "s21", "s12", "s22")

CSV_HEADER = [
    "freq_hz",
    "s11_re", "s11_im",
    "s21_re", "s21_im",
    "s12_re", "s12_im",
    "s22_re", "s22_im",
]

TextSource = Union[str, TextIO, Iterable[str]]


@dataclass(frozen=True)
class FrequencyResponse:
    """A two-port response: Hz grid, 2x2 complex S-matrix per point, z0."""
    freqs: np.ndarray
    s: np.ndarray
    z0: float = 50.0

    def __post_init__(self):
        freqs = np.array(self.freqs, dtype=float).reshape(-1)
        s = np.array(self.s, dtype=complex)
        if s.size == 0:
            s = s.reshape(0, 2, 2)
        if s.ndim != 3 or s.shape[1:] != (2, 2):
            raise ValueError(f"s must have shape (n, 2, 2), got {s.shape}")
        if len(s) != len(freqs):
            raise ValueError(
                f"{len(freqs)} frequencies but {len(s)} S-matrices"
            )
        if np.any(freqs <= 0):
            raise ValueError("frequencies must be positive")
        if np.any(np.diff(freqs) <= 0):
            raise ValueError("frequencies must be strictly increasing")
        if not self.z0 > 0:
            raise ValueError(f"reference impedance must be positive, got {self.z0}")

        freqs.setflags(write=False)
        s.setflags(write=False)
        object.__setattr__(self, "freqs", freqs)
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "z0", float(self.z0))

    def __len__(self) -> int:
        return len(self.freqs)

    def channel(self, name: str) -> np.ndarray:
        """Complex trace of one S-parameter ("s11", "s21", "s12", "s22")."""
        try:
            row, col = CHANNELS[name.lower()]
        except KeyError:
            raise ValueError(f"unknown channel {name!r}") from None
        return self.s[:, row, col]

    def channel_db(self, name: str) -> np.ndarray:
        """dB trace of one S-parameter."""
        return magnitude_db(self.channel(name))

    @classmethod
    def from_channels(cls, freqs, s11, s21, s12, s22, z0: float = 50.0) -> "FrequencyResponse":
        """Build a response from four per-channel traces."""
        s = np.empty((len(freqs), 2, 2), dtype=complex)
        for name, trace in zip(("s11", "s21", "s12", "s22"), (s11, s21, s12, s22)):
            row, col = CHANNELS[name]
            s[:, row, col] = trace
        return cls(freqs=freqs, s=s, z0=z0)


@dataclass(frozen=True)
class OptionLine:
    """Touchstone option line (`# GHz S RI R 50`)."""
    freq_unit: float = 1e9
    parameter: str = "S"
    format: str = "MA"
    resistance: float = 50.0

    def __post_init__(self):
        if self.freq_unit not in FREQ_UNITS.values():
            raise TouchstoneError(f"unsupported frequency unit multiplier {self.freq_unit}")
        if self.parameter.upper() != "S":
            raise TouchstoneError(f"only S parameters are supported, got {self.parameter!r}")
        if self.format.upper() not in FORMATS:
            raise TouchstoneError(f"unknown data format {self.format!r}")
        if not self.resistance > 0:
            raise TouchstoneError(f"reference resistance must be positive, got {self.resistance}")
        object.__setattr__(self, "parameter", self.parameter.upper())
        object.__setattr__(self, "format", self.format.upper())

    @property
    def unit_name(self) -> str:
        for name, mult in FREQ_UNITS.items():
            if mult == self.freq_unit:
                return name
        raise TouchstoneError(f"unsupported frequency unit multiplier {self.freq_unit}")

    def render(self) -> str:
        return f"# {self.unit_name} {self.parameter} {self.format} R {self.resistance:.12g}"


def magnitude_db(s):
    """
    Return 20*log10(|s|).

    Works on scalars and arrays. A zero magnitude maps to -inf; the
    Touchstone writer replaces that with DB_FLOOR.
    """
    with np.errstate(divide="ignore"):
        db = 20.0 * np.log10(np.abs(s))
    if np.ndim(db) == 0:
        return float(db)
    return db


def _read_text(source: TextSource) -> list[str]:
    if isinstance(source, str):
        return source.splitlines()
    if hasattr(source, "read"):
        return source.read().splitlines()
    return [line.rstrip("\n") for line in source]


def parse_option_line(line: str, lineno: int | None = None) -> OptionLine:
    """Parse a `#` option line. Tokens may appear in any order."""
    tokens = line.strip().lstrip("#").upper().split()
    unit, parameter, fmt, resistance = 1e9, "S", "MA", 50.0

    i = 0
    while i < len(tokens):
        tok = tokens[i]
        if tok in FREQ_UNITS:
            unit = FREQ_UNITS[tok]
        elif tok in PARAMETERS:
            if tok != "S":
                raise TouchstoneError(
                    f"parameter type {tok} not supported (only S)", lineno
                )
            parameter = tok
        elif tok in FORMATS:
            fmt = tok
        elif tok == "R":
            if i + 1 >= len(tokens):
                raise TouchstoneError("option line: R without a value", lineno)
            try:
                resistance = float(tokens[i + 1])
            except ValueError:
                raise TouchstoneError(
                    f"option line: bad reference resistance {tokens[i + 1]!r}", lineno
                ) from None
            i += 1
        else:
            raise TouchstoneError(f"option line: unexpected token {tok!r}", lineno)
        i += 1

    try:
        return OptionLine(freq_unit=unit, parameter=parameter, format=fmt, resistance=resistance)
    except TouchstoneError as e:
        raise TouchstoneError(e.reason, lineno) from None


def _pair_to_complex(a: np.ndarray, b: np.ndarray, fmt: str) -> np.ndarray:
    if fmt == "RI":
        return a + 1j * b
    if fmt == "MA":
        return a * np.exp(1j * np.deg2rad(b))
    # DB
    return 10.0 ** (a / 20.0) * np.exp(1j * np.deg2rad(b))


def _complex_to_pair(z: complex, fmt: str) -> tuple[float, float]:
    if fmt == "RI":
        return z.real, z.imag
    angle = float(np.rad2deg(np.angle(z)))
    if fmt == "MA":
        return abs(z), angle
    db = magnitude_db(z)
    return (DB_FLOOR if np.isneginf(db) else db), angle


def parse_touchstone(source: TextSource) -> FrequencyResponse:
    """
    Parse a version 1 two-port Touchstone document.

    Comment text after `!` and blank lines are ignored anywhere. Without an
    option line the Touchstone default `# GHz S MA R 50` applies. Data rows
    must have 9 columns in the order freq, S11, S21, S12, S22. An option
    line may not follow the first data row.

    Raises:
        TouchstoneError: with the offending 1-based line number.
    """
    options = None
    rows = []

    for lineno, raw in enumerate(_read_text(source), start=1):
        line = raw.split("!", 1)[0].strip()
        if not line:
            continue

        if line.startswith("#"):
            if options is None and rows:
                raise TouchstoneError("option line must precede the data rows", lineno)
            if options is None:
                options = parse_option_line(line, lineno)
            else:
                logger.warning(f"line {lineno}: extra option line ignored")
            continue

        if line.startswith("["):
            keyword = line.split("]", 1)[0] + "]"
            raise TouchstoneError(
                f"Touchstone v2 keyword {keyword} not supported", lineno
            )

        tokens = line.split()
        if len(tokens) != 9:
            raise TouchstoneError(
                f"expected 9 columns for a two-port data row, got {len(tokens)}", lineno
            )
        try:
            values = [float(t) for t in tokens]
        except ValueError:
            raise TouchstoneError(f"non-numeric value in data row: {line!r}", lineno) from None
        rows.append((lineno, values))

    if options is None:
        logger.warning("no option line found; assuming # GHz S MA R 50")
        options = OptionLine()

    previous = None
    for lineno, values in rows:
        freq = values[0] * options.freq_unit
        if freq <= 0:
            raise TouchstoneError(f"frequency must be positive, got {values[0]}", lineno)
        if previous is not None and freq <= previous:
            raise TouchstoneError(
                f"frequencies not strictly increasing ({values[0]} after "
                f"{previous / options.freq_unit:.12g})",
                lineno,
            )
        previous = freq

    if not rows:
        return FrequencyResponse(freqs=[], s=np.empty((0, 2, 2)), z0=options.resistance)

    data = np.array([values for _, values in rows], dtype=float)
    freqs = data[:, 0] * options.freq_unit
    traces = {
        name: _pair_to_complex(data[:, 1 + 2 * k], data[:, 2 + 2 * k], options.format)
        for k, name in enumerate(TOUCHSTONE_ORDER)
    }

    logger.debug(f"parsed {len(freqs)} points ({options.render()})")
    return FrequencyResponse.from_channels(
        freqs, traces["s11"], traces["s21"], traces["s12"], traces["s22"],
        z0=options.resistance,
    )


def write_touchstone(resp: FrequencyResponse, opts: OptionLine | None = None) -> str:
    """
    Render a response as Touchstone v1 text.

    The option line is written first, then one row per frequency with 12
    significant digits. The reference resistance comes from opts; by
    default it is the response's own z0.
    """
    if opts is None:
        opts = OptionLine(freq_unit=1e9, format="RI", resistance=resp.z0)

    lines = [
        "! two-port S-parameters written by metasense",
        opts.render(),
    ]
    for i, freq in enumerate(resp.freqs):
        fields = [f"{freq / opts.freq_unit:.12g}"]
        for name in TOUCHSTONE_ORDER:
            row, col = CHANNELS[name]
            a, b = _complex_to_pair(complex(resp.s[i, row, col]), opts.format)
            fields.append(f"{a:.12g}")
            fields.append(f"{b:.12g}")
        lines.append(" ".join(fields))
    return "\n".join(lines) + "\n"


def parse_csv_response(source: TextSource, z0: float = 50.0) -> FrequencyResponse:
    """Parse the flat CSV layout (header CSV_HEADER, one row per frequency)."""
    reader = csv.reader(_read_text(source))
    header = None
    rows = []

    for lineno, record in enumerate(reader, start=1):
        if not record or all(not field.strip() for field in record):
            continue
        if header is None:
            header = [field.strip().lower() for field in record]
            if header != CSV_HEADER:
                raise TouchstoneError(
                    f"unexpected CSV header; expected {','.join(CSV_HEADER)}", lineno
                )
            continue
        if len(record) != len(CSV_HEADER):
            raise TouchstoneError(
                f"expected {len(CSV_HEADER)} columns, got {len(record)}", lineno
            )
        try:
            values = [float(field) for field in record]
        except ValueError:
            raise TouchstoneError("non-numeric value in CSV row", lineno) from None
        if values[0] <= 0:
            raise TouchstoneError(f"frequency must be positive, got {values[0]}", lineno)
        if rows and values[0] <= rows[-1][0]:
            raise TouchstoneError("frequencies not strictly increasing", lineno)
        rows.append(values)

    if header is None:
        raise TouchstoneError("empty CSV document (no header)", 1)
    if not rows:
        return FrequencyResponse(freqs=[], s=np.empty((0, 2, 2)), z0=z0)

    data = np.array(rows, dtype=float)
    traces = [data[:, 1 + 2 * k] + 1j * data[:, 2 + 2 * k] for k in range(4)]
    return FrequencyResponse.from_channels(data[:, 0], *traces, z0=z0)


def write_csv_response(resp: FrequencyResponse) -> str:
    """Render a response in the flat CSV layout (lossless float repr)."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for i, freq in enumerate(resp.freqs):
        row = [repr(float(freq))]
        for name in ("s11", "s21", "s12", "s22"):
            r, c = CHANNELS[name]
            z = complex(resp.s[i, r, c])
            row.extend([repr(z.real), repr(z.imag)])
        writer.writerow(row)
    return buffer.getvalue()


def read_response(path: Union[str, Path], z0: float = 50.0) -> FrequencyResponse:
    """Load a response file, choosing the parser from the extension."""
    path = Path(path)
    text = path.read_text()
    if path.suffix.lower() == ".csv":
        resp = parse_csv_response(text, z0=z0)
    else:
        resp = parse_touchstone(text)
    logger.info(f"Loaded {len(resp)} points from {path.name}")
    return resp
