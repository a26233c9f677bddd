"""Equivalent-circuit fitting."""

from pathlib import Path

import numpy as np
import pytest

from src.errors import FitError
from src.fitting import FitOptions, FitProblem, fit_netlist, objective
from src.rf.netlist import FreeParameter, load_netlist
from src.rf.network import Element, Netlist, linear_sweep, simulate

TEMPLATE = Path(__file__).parent.parent / "configs" / "rlc_fit_template.yml"


def _target(points=2001):
    truth = Netlist(elements=(Element("shunt", "RLC_S", r=2.0, l=1e-9, c=1e-12),))
    return simulate(truth, linear_sweep(1e9, 10e9, points))


@pytest.fixture(scope="module")
def target():
    return _target()


def test_recovers_generating_values(target):
    net, free = load_netlist(TEMPLATE)
    problem = FitProblem(template=net, free=free, target=target)
    result = fit_netlist(problem, FitOptions(max_iters=4000, tol=1e-10, restarts=1, seed=0))

    r, l, c = result.values
    assert r == pytest.approx(2.0, rel=0.01)
    assert l == pytest.approx(1e-9, rel=0.01)
    assert c == pytest.approx(1e-12, rel=0.01)
    assert result.residual < 0.01
    assert result.names == ["e0.r_ohm", "e0.l_h", "e0.c_f"]
    assert result.netlist.elements[0].r == r


def test_same_seed_same_answer():
    net, free = load_netlist(TEMPLATE)
    problem = FitProblem(template=net, free=free, target=_target(201))
    opts = FitOptions(max_iters=300, tol=1e-10, restarts=3, seed=42)

    first = fit_netlist(problem, opts)
    second = fit_netlist(problem, opts)
    np.testing.assert_array_equal(first.values, second.values)
    assert first.objective == second.objective
    assert first.restart == second.restart


def test_result_stays_in_bounds_and_never_worse(target):
    net, free = load_netlist(TEMPLATE)
    problem = FitProblem(template=net, free=free, target=target)
    result = fit_netlist(problem, FitOptions(max_iters=20, tol=1e-10, restarts=2, seed=1))

    assert np.all(result.values >= problem.lower)
    assert np.all(result.values <= problem.upper)
    assert result.objective <= objective(problem, problem.initial)


def test_one_parameter_beats_grid_search(target):
    template = Netlist(elements=(Element("shunt", "RLC_S", r=10.0, l=1e-9, c=1e-12),))
    free = [FreeParameter(element=0, field="r", init=10.0, lower=0.5, upper=40.0)]
    problem = FitProblem(template=template, free=free, target=target)

    grid = np.geomspace(0.5, 40.0, 400)
    best_grid = min(objective(problem, [r]) for r in grid)
    result = fit_netlist(problem, FitOptions(max_iters=500, tol=1e-12, restarts=0, seed=0))

    assert result.objective <= best_grid + 1e-9
    assert result.values[0] == pytest.approx(2.0, rel=1e-3)
    assert result.restart == 0


def test_both_channels_and_weights(target):
    template = Netlist(elements=(Element("shunt", "RLC_S", r=5.0, l=1e-9, c=1e-12),))
    free = [FreeParameter(element=0, field="r", init=5.0, lower=0.5, upper=40.0)]
    weights = np.where(np.abs(target.freqs - 5.03e9) < 0.5e9, 10.0, 1.0)
    problem = FitProblem(
        template=template, free=free, target=target, weights=weights, channels=("s21", "s11")
    )

    result = fit_netlist(problem, FitOptions(max_iters=500, tol=1e-12, restarts=0, seed=0))
    assert result.values[0] == pytest.approx(2.0, rel=1e-3)
    assert result.to_dict()["parameters"]["e0.r_ohm"] == pytest.approx(2.0, rel=1e-3)


def test_objective_checks_bounds(target):
    net, free = load_netlist(TEMPLATE)
    problem = FitProblem(template=net, free=free, target=target)
    with pytest.raises(FitError, match="bounds"):
        objective(problem, [100.0, 1e-9, 1e-12])
    with pytest.raises(FitError):
        objective(problem, [2.0, 1e-9])


def test_problem_validation(target):
    net, free = load_netlist(TEMPLATE)
    with pytest.raises(FitError, match="no free"):
        FitProblem(template=net, free=[], target=target)
    with pytest.raises(FitError, match="channels"):
        FitProblem(template=net, free=free, target=target, channels=("s33",))
    with pytest.raises(FitError, match="weight"):
        FitProblem(template=net, free=free, target=target, weights=np.ones(3))
    with pytest.raises(FitError, match="nonnegative"):
        FitProblem(template=net, free=free, target=target, weights=np.zeros(len(target)))
    with pytest.raises(FitError, match="missing element"):
        FitProblem(
            template=net,
            free=[FreeParameter(element=4, field="r", init=1.0, lower=0.5, upper=2.0)],
            target=target,
        )


@pytest.mark.parametrize("kwargs", [{"max_iters": 0}, {"tol": 0.0}, {"restarts": -1}])
def test_options_validation(kwargs):
    with pytest.raises(FitError):
        FitOptions(**kwargs)
