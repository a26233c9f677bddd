"""Cavity perturbation shift over voxelized fields."""

import numpy as np
import pytest
from scipy import constants

from src.analysis.perturbation import (
    FieldGrid,
    frequency_shift_electric,
    frequency_shift_full,
    load_field_grid,
    parse_field_grid,
)
from src.errors import PerturbationError

E_COLUMNS = [f"{f}{a}_{p}" for f in ("e0", "e1") for a in "xyz" for p in ("re", "im")]


def grid_csv(rows, meta="# cell_volume=1.0 eps0=1 mu0=1", extra=()):
    header = E_COLUMNS + ["delta_eps", *extra]
    lines = [meta, ",".join(header)]
    lines += [",".join(str(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def test_single_cell_unit_shift():
    g = FieldGrid(
        cell_volume=1.0,
        e0=[[1, 0, 0]],
        e1=[[1, 0, 0]],
        delta_eps=[1.0],
        eps0=1.0,
        mu0=1.0,
    )
    assert frequency_shift_full(g) == -1.0
    assert frequency_shift_electric(g) == -1.0


def test_added_permittivity_lowers_frequency():
    rng = np.random.default_rng(7)
    e0 = rng.normal(size=(20, 3)) + 1j * rng.normal(size=(20, 3))
    g = FieldGrid(cell_volume=1e-9, e0=e0, e1=e0, delta_eps=np.full(20, 2 * constants.epsilon_0))
    assert frequency_shift_full(g) < 0
    assert frequency_shift_full(g) == pytest.approx(-2.0)


def test_magnetic_energy_enters_full_form_only():
    g = FieldGrid(
        cell_volume=1.0,
        e0=[[1, 0, 0]],
        e1=[[1, 0, 0]],
        delta_eps=[1.0],
        h0=[[0, 1, 0]],
        h1=[[0, 1, 0]],
        eps0=1.0,
        mu0=1.0,
    )
    assert frequency_shift_full(g) == pytest.approx(-0.5)
    assert frequency_shift_electric(g) == pytest.approx(-1.0)

    g = FieldGrid(
        cell_volume=1.0,
        e0=[[1, 0, 0]],
        e1=[[1, 0, 0]],
        delta_eps=[0.0],
        h0=[[0, 1, 0]],
        h1=[[0, 1, 0]],
        delta_mu=[1.0],
        eps0=1.0,
        mu0=1.0,
    )
    assert frequency_shift_full(g) == pytest.approx(-0.5)
    assert frequency_shift_electric(g) == 0.0


def test_phase_mismatch_uses_real_overlap():
    g = FieldGrid(cell_volume=1.0, e0=[[1, 0, 0]], e1=[[1j, 0, 0]], delta_eps=[1.0], eps0=1.0)
    assert frequency_shift_electric(g) == 0.0


def test_zero_field_is_rejected():
    g = FieldGrid(cell_volume=1.0, e0=np.zeros((2, 3)), e1=np.zeros((2, 3)), delta_eps=[1.0, 1.0])
    with pytest.raises(PerturbationError):
        frequency_shift_full(g)
    with pytest.raises(PerturbationError):
        frequency_shift_electric(g)


def test_grid_validation():
    with pytest.raises(PerturbationError):
        FieldGrid(cell_volume=0.0, e0=[[1, 0, 0]], e1=[[1, 0, 0]], delta_eps=[1.0])
    with pytest.raises(PerturbationError):
        FieldGrid(cell_volume=1.0, e0=[[1, 0]], e1=[[1, 0]], delta_eps=[1.0])
    with pytest.raises(PerturbationError):
        FieldGrid(cell_volume=1.0, e0=[[1, 0, 0]], e1=[[1, 0, 0]], delta_eps=[1.0, 2.0])


def test_defaults_are_vacuum_constants():
    g = FieldGrid(cell_volume=1.0, e0=[[1, 0, 0]], e1=[[1, 0, 0]], delta_eps=[1.0])
    assert g.eps0 == constants.epsilon_0
    assert g.mu0 == constants.mu_0
    assert g.h0.shape == (1, 3)
    assert len(g) == 1


def test_parse_grid():
    row = [1, 0, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0, 1.0]
    g = parse_field_grid(grid_csv([row, row]))

    assert len(g) == 2
    assert g.eps0 == 1.0
    assert frequency_shift_full(g) == pytest.approx(-1.0)


def test_parse_grid_errors():
    row = [1, 0, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0, 1.0]
    with pytest.raises(PerturbationError, match="metadata"):
        parse_field_grid(grid_csv([row]).split("\n", 1)[1])
    with pytest.raises(PerturbationError, match="cell_volume"):
        parse_field_grid(grid_csv([row], meta="# eps0=1"))
    with pytest.raises(PerturbationError, match="delta_eps"):
        parse_field_grid("# cell_volume=1\n" + ",".join(E_COLUMNS) + "\n" + ",".join("0" * 12) + "\n")
    with pytest.raises(PerturbationError, match="line 3"):
        parse_field_grid(grid_csv([row[:-1] + ["x"]]))


def test_load_grid(tmp_path):
    path = tmp_path / "grid.csv"
    path.write_text(grid_csv([[1, 0, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0, 1.0]]))
    assert frequency_shift_electric(load_field_grid(path)) == -1.0


def test_vacuum_one_cell_example():
    g = FieldGrid(cell_volume=1e-6, e0=[[1, 0, 0]], e1=[[1, 0, 0]], delta_eps=[constants.epsilon_0])
    assert frequency_shift_full(g) == pytest.approx(-1.0, abs=1e-15)


def test_unperturbed_grid_has_no_shift():
    rng = np.random.default_rng(3)
    e0 = rng.normal(size=(10, 3))
    h0 = rng.normal(size=(10, 3))
    g = FieldGrid(cell_volume=1e-9, e0=e0, e1=e0, h0=h0, h1=h0, delta_eps=np.zeros(10), delta_mu=np.zeros(10))
    assert frequency_shift_full(g) == 0.0


@pytest.mark.parametrize("alpha", [0.5, 2.0, 10.0])
def test_shift_is_linear_in_material_change(alpha):
    rng = np.random.default_rng(11)
    n = 30
    e0 = rng.normal(size=(n, 3)) + 1j * rng.normal(size=(n, 3))
    e1 = e0 * (1 + 0.1 * rng.normal(size=(n, 1)))
    h0 = rng.normal(size=(n, 3)) + 1j * rng.normal(size=(n, 3))
    d_eps = rng.uniform(0, 3, n) * constants.epsilon_0
    d_mu = rng.uniform(0, 1, n) * constants.mu_0

    base = FieldGrid(cell_volume=1e-9, e0=e0, e1=e1, h0=h0, h1=h0, delta_eps=d_eps, delta_mu=d_mu)
    scaled = FieldGrid(
        cell_volume=1e-9, e0=e0, e1=e1, h0=h0, h1=h0, delta_eps=alpha * d_eps, delta_mu=alpha * d_mu
    )
    assert frequency_shift_full(scaled) == pytest.approx(alpha * frequency_shift_full(base), rel=1e-12)


def test_splitting_cells_leaves_shift_unchanged():
    rng = np.random.default_rng(23)
    n = 25
    e0 = rng.normal(size=(n, 3)) + 1j * rng.normal(size=(n, 3))
    e1 = e0 * (1 + 0.2 * rng.normal(size=(n, 1)))
    h0 = rng.normal(size=(n, 3))
    d_eps = rng.uniform(0, 2, n) * constants.epsilon_0
    d_mu = rng.uniform(0, 1, n) * constants.mu_0

    coarse = FieldGrid(cell_volume=1e-9, e0=e0, e1=e1, h0=h0, h1=h0, delta_eps=d_eps, delta_mu=d_mu)
    fine = FieldGrid(
        cell_volume=0.5e-9,
        e0=np.repeat(e0, 2, axis=0),
        e1=np.repeat(e1, 2, axis=0),
        h0=np.repeat(h0, 2, axis=0),
        h1=np.repeat(h0, 2, axis=0),
        delta_eps=np.repeat(d_eps, 2),
        delta_mu=np.repeat(d_mu, 2),
    )
    assert abs(frequency_shift_full(fine) - frequency_shift_full(coarse)) < 1e-12
    assert abs(frequency_shift_electric(fine) - frequency_shift_electric(coarse)) < 1e-12
