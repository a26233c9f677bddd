"""Measurement analysis: notches, calibration, sensitivity and perturbation."""

from .resonance import Mode, Resonance, find_notches, refine_parabolic, q_factor, annotate_q
from .calibration import (
    MaterialSample,
    CalibrationModel,
    REFERENCE_MODEL,
    PRESETS,
    evaluate,
    evaluate_printed_form,
    fit,
    invert,
    relative_error,
    absolute_relative_error,
    relative_error_table,
)
from .sensitivity import (
    ControlKind,
    SweepPoint,
    SensitivityReport,
    normalized_average_sensitivity,
    average_sensitivity,
    frequency_shift,
    sensitivity_report,
    thickness_saturation,
)
from .perturbation import FieldGrid, frequency_shift_full, frequency_shift_electric

__all__ = [
    "Mode",
    "Resonance",
    "find_notches",
    "refine_parabolic",
    "q_factor",
    "annotate_q",
    "MaterialSample",
    "CalibrationModel",
    "REFERENCE_MODEL",
    "PRESETS",
    "evaluate",
    "evaluate_printed_form",
    "fit",
    "invert",
    "relative_error",
    "absolute_relative_error",
    "relative_error_table",
    "ControlKind",
    "SweepPoint",
    "SensitivityReport",
    "normalized_average_sensitivity",
    "average_sensitivity",
    "frequency_shift",
    "sensitivity_report",
    "thickness_saturation",
    "FieldGrid",
    "frequency_shift_full",
    "frequency_shift_electric",
]
