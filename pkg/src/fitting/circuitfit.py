"""
Equivalent-circuit fitting.

Recovers element values of a netlist template by matching its simulated
|S21| (and optionally |S11|) in dB to a target response. The optimizer is
Nelder-Mead on log-scaled parameters; every parameter is folded back into
its bounds by reflection, so no evaluated point ever leaves them.
"""

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import minimize

from ..config import settings
from ..errors import FitError
from ..rf.netlist import FreeParameter
from ..rf.network import Netlist, simulate
from ..rf.touchstone import FrequencyResponse
from ..utils import get_logger

logger = get_logger(__name__)

DB_FLOOR = -200.0
CHANNELS = ("s11", "s21")

# Size of the initial simplex along each normalized coordinate.
SIMPLEX_STEP = 0.05


@dataclass
class FitProblem:
    """Template netlist, its free parameters and the response to match."""
    template: Netlist
    free: Sequence[FreeParameter]
    target: FrequencyResponse
    weights: Optional[np.ndarray] = None
    channels: tuple[str, ...] = ("s21",)

    def __post_init__(self):
        self.free = list(self.free)
        if not self.free:
            raise FitError("fit problem has no free parameters")
        for p in self.free:
            if p.element >= len(self.template.elements):
                raise FitError(f"{p.name} refers to a missing element")
        self.channels = tuple(c.lower() for c in self.channels)
        if not self.channels or any(c not in CHANNELS for c in self.channels):
            raise FitError(f"objective channels must be a non-empty subset of {CHANNELS}")
        if len(self.target) == 0:
            raise FitError("target response is empty")

        if self.weights is None:
            self.weights = np.ones(len(self.target))
        self.weights = np.asarray(self.weights, dtype=float)
        if self.weights.shape != (len(self.target),):
            raise FitError(f"need one weight per target frequency ({len(self.target)})")
        if np.any(self.weights < 0) or not np.any(self.weights > 0):
            raise FitError("weights must be nonnegative with at least one positive")

        self._target_db = {c: _floored_db(self.target.channel(c)) for c in self.channels}

    @property
    def names(self) -> list[str]:
        return [p.name for p in self.free]

    @property
    def initial(self) -> np.ndarray:
        return np.array([p.init for p in self.free], dtype=float)

    @property
    def lower(self) -> np.ndarray:
        return np.array([p.lower for p in self.free], dtype=float)

    @property
    def upper(self) -> np.ndarray:
        return np.array([p.upper for p in self.free], dtype=float)

    def netlist_with(self, params: Sequence[float]) -> Netlist:
        """The template with free parameters set to params."""
        elements = list(self.template.elements)
        for p, value in zip(self.free, params):
            elements[p.element] = elements[p.element].with_values(**{p.field: float(value)})
        return Netlist(
            elements=tuple(elements),
            z0=self.template.z0,
            name=self.template.name,
            description=self.template.description,
        )


@dataclass
class FitOptions:
    max_iters: int = field(default_factory=lambda: settings.fit_max_iters)
    tol: float = field(default_factory=lambda: settings.fit_tol)
    restarts: int = field(default_factory=lambda: settings.fit_restarts)
    seed: int = field(default_factory=lambda: settings.fit_seed)

    def __post_init__(self):
        if self.max_iters < 1:
            raise FitError(f"max_iters must be >= 1, got {self.max_iters}")
        if not self.tol > 0:
            raise FitError(f"tol must be > 0, got {self.tol}")
        if self.restarts < 0:
            raise FitError(f"restarts must be >= 0, got {self.restarts}")


@dataclass
class FitResult:
    """Best parameters found and how they were reached."""
    names: list[str]
    values: np.ndarray
    residual: float  # RMS dB error
    objective: float
    iterations: int
    converged: bool
    restart: int  # 0 is the caller's initial guess
    netlist: Netlist

    def to_dict(self) -> dict:
        return {
            "parameters": {n: float(v) for n, v in zip(self.names, self.values)},
            "residual_db_rms": self.residual,
            "objective": self.objective,
            "iterations": self.iterations,
            "converged": self.converged,
            "restart": self.restart,
        }


def _floored_db(trace: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        db = 20.0 * np.log10(np.abs(trace))
    return np.maximum(db, DB_FLOOR)


def objective(p: FitProblem, params: Sequence[float]) -> float:
    """
    Weighted sum over frequencies and channels of squared dB differences
    between the netlist at params and the target.

    Raises:
        FitError: params outside the declared bounds.
    """
    values = np.asarray(params, dtype=float)
    if values.shape != (len(p.free),):
        raise FitError(f"expected {len(p.free)} parameters, got {values.shape}")
    if np.any(values < p.lower) or np.any(values > p.upper):
        raise FitError("parameters outside their bounds")

    model = simulate(p.netlist_with(values), p.target.freqs)
    total = 0.0
    for c in p.channels:
        diff = _floored_db(model.channel(c)) - p._target_db[c]
        total += float(np.sum(p.weights * diff * diff))
    return total


def residual_rms(p: FitProblem, value: float) -> float:
    """Weighted RMS dB error corresponding to an objective value."""
    return float(np.sqrt(value / (np.sum(p.weights) * len(p.channels))))


def _reflect(u: np.ndarray) -> np.ndarray:
    """Fold any real vector into [0, 1] by mirror reflection at the edges."""
    t = np.mod(u, 2.0)
    return np.where(t > 1.0, 2.0 - t, t)


class _Scaling:
    """Maps normalized coordinates to physical values and back (log scale)."""

    def __init__(self, p: FitProblem):
        self.lo = np.log(p.lower)
        self.span = np.log(p.upper) - self.lo
        self.lower = p.lower
        self.upper = p.upper

    def to_physical(self, u: np.ndarray) -> np.ndarray:
        values = np.exp(self.lo + _reflect(u) * self.span)
        return np.clip(values, self.lower, self.upper)

    def to_normalized(self, values: np.ndarray) -> np.ndarray:
        return (np.log(values) - self.lo) / self.span


def _initial_simplex(u0: np.ndarray) -> np.ndarray:
    n = len(u0)
    simplex = np.tile(u0, (n + 1, 1))
    for k in range(n):
        step = SIMPLEX_STEP if u0[k] <= 0.5 else -SIMPLEX_STEP
        simplex[k + 1, k] += step
    return simplex


def fit_netlist(p: FitProblem, opts: Optional[FitOptions] = None) -> FitResult:
    """
    Fit the free parameters of a netlist template to the target.

    Runs Nelder-Mead from the template's initial values and from
    opts.restarts extra starts drawn log-uniformly inside the bounds with
    a generator seeded by opts.seed. The run with the lowest objective
    wins, ties going to the earliest start. A run counts as converged when
    the objective spread across its final simplex is below opts.tol.

    Raises:
        FitError: non-finite objective at the initial values.
    """
    opts = opts or FitOptions()
    scaling = _Scaling(p)

    initial_value = objective(p, p.initial)
    if not np.isfinite(initial_value):
        raise FitError(f"objective is not finite at the initial values ({initial_value})")

    rng = np.random.default_rng(opts.seed)
    starts = [scaling.to_normalized(p.initial)]
    starts += [rng.uniform(0.0, 1.0, len(p.free)) for _ in range(opts.restarts)]

    def cost(u):
        value = objective(p, scaling.to_physical(u))
        return value if np.isfinite(value) else np.inf

    best = None
    for index, u0 in enumerate(starts):
        res = minimize(
            cost,
            u0,
            method="Nelder-Mead",
            options={
                "maxiter": opts.max_iters,
                "xatol": 1e-10,
                "fatol": opts.tol,
                "initial_simplex": _initial_simplex(u0),
            },
        )
        fvals = res.final_simplex[1]
        run = {
            "index": index,
            "values": scaling.to_physical(res.x),
            "objective": float(res.fun),
            "iterations": int(res.nit),
            "converged": bool(np.max(fvals) - np.min(fvals) < opts.tol),
        }
        logger.debug(
            f"restart {index}: objective {run['objective']:.6g} after "
            f"{run['iterations']} iterations (converged={run['converged']})"
        )
        if best is None or run["objective"] < best["objective"]:
            best = run

    if best["objective"] > initial_value:
        best = {
            "index": 0,
            "values": p.initial,
            "objective": initial_value,
            "iterations": 0,
            "converged": False,
        }

    result = FitResult(
        names=p.names,
        values=np.asarray(best["values"], dtype=float),
        residual=residual_rms(p, best["objective"]),
        objective=best["objective"],
        iterations=best["iterations"],
        converged=best["converged"],
        restart=best["index"],
        netlist=p.netlist_with(best["values"]),
    )
    if result.converged:
        logger.info(f"Circuit fit converged: residual {result.residual:.4g} dB RMS")
    else:
        logger.warning(f"Circuit fit did not converge: residual {result.residual:.4g} dB RMS")
    return result
