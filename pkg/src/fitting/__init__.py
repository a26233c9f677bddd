"""Equivalent-circuit parameter fitting."""

from .circuitfit import FitProblem, FitOptions, FitResult, objective, fit_netlist

__all__ = ["FitProblem", "FitOptions", "FitResult", "objective", "fit_netlist"]
