"""Exception hierarchy.

Every error raised on purpose by the library derives from MetasenseError.
The domain subclasses also derive from ValueError, since all of them
describe bad input rather than a broken environment.
"""

from typing import Optional


class MetasenseError(Exception):
    """Root of all library errors."""


class TouchstoneError(MetasenseError, ValueError):
    """Malformed S-parameter file. Carries the 1-based line number."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        self.reason = message
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class NetlistError(MetasenseError, ValueError):
    """Netlist document does not match the schema."""


class NetworkError(MetasenseError, ValueError):
    """Singular element or degenerate network."""

    def __init__(self, message: str, frequency: Optional[float] = None):
        self.frequency = frequency
        if frequency is not None:
            message = f"{message} (at {frequency:.9g} Hz)"
        super().__init__(message)


class ResonanceError(MetasenseError, ValueError):
    """Notch detection or Q extraction failed."""


class CalibrationError(MetasenseError, ValueError):
    """Calibration fit, evaluation or inversion failed."""


class SensitivityError(MetasenseError, ValueError):
    """Invalid sweep or sensitivity inputs."""


class PerturbationError(MetasenseError, ValueError):
    """Invalid field grid."""


class FitError(MetasenseError, ValueError):
    """Circuit fit could not be set up or started."""
