import numpy as np
import pytest

from slitbilliard import EvolutionState, SlitSpec, StructuralError, make_grid
from slitbilliard.observables import (
    NormRecorder,
    ScreenRecord,
    current_y,
    first_impact_time,
    leaked_probability,
    predicted_extrema,
    predicted_screen_phase,
    slit_nodes,
    slit_phase,
)


@pytest.fixture(scope="module")
def grid():
    return make_grid(1.6, 1.2, 0.004, y_min=-1.1)


def test_plane_wave_current(grid):
    X, Y = grid.mesh()
    k = 50.0
    j = current_y(np.exp(1j * k * Y), grid.row_of(0.3), grid)
    # central difference of exp(iky) gives sin(k h)/h
    assert np.allclose(j, np.sin(k * grid.spacing) / grid.spacing)
    assert np.allclose(current_y(np.exp(-1j * k * Y), 10, grid), -np.sin(k * grid.spacing) / grid.spacing)


def test_current_border_row(grid):
    with pytest.raises(StructuralError):
        current_y(np.zeros(grid.shape), 0, grid)


def test_screen_accumulation_and_window(grid):
    X, Y = grid.mesh()
    psi = np.exp(1j * 10 * Y)
    rec = ScreenRecord.at(0.3, grid, 1e-6, window=3, history_stride=2)
    for n in range(1, 6):
        rec(EvolutionState(psi, grid, n=n, tau=1e-6, norm0=1.0))
    assert rec.samples == 3
    assert np.allclose(rec.intensity, 3e-6 * np.sin(10 * grid.spacing) / grid.spacing)
    assert np.array_equal(rec.up_to(3), rec.history[0][1])
    with pytest.raises(StructuralError):
        ScreenRecord.at(-0.3, grid, 1e-6)


def test_slit_probe_positions(grid):
    row, ca, cb = slit_nodes(SlitSpec(), grid)
    assert grid.y[row] == pytest.approx(-0.002)
    assert grid.x[ca] == -grid.x[cb]
    assert abs(grid.x[cb] - 0.05) <= grid.spacing / 2


def test_slit_phase(grid):
    X, Y = grid.mesh()
    sym = np.exp(-X**2 + 1j * 3 * Y)
    s = slit_phase(sym, SlitSpec(), grid)
    assert s.valid and s.cos_dphi == 1.0
    anti = np.exp(1j * 40 * X)
    s = slit_phase(anti, SlitSpec(), grid, mode="mean")
    _, ca, cb = slit_nodes(SlitSpec(), grid)
    assert s.valid
    assert slit_phase(anti, SlitSpec(), grid).cos_dphi == pytest.approx(np.cos(40 * (grid.x[ca] - grid.x[cb])))
    dead = slit_phase(np.zeros(grid.shape, complex), SlitSpec(), grid, floor=1e-12)
    assert not dead.valid and np.isnan(dead.cos_dphi)


def test_two_source_extrema():
    slits = SlitSpec()
    lam = 2 * np.pi / 180
    maxima, minima = predicted_extrema(slits, 0.3, lam, (-0.2, 0.2))
    assert 0.0 in np.round(maxima, 12)
    # far field spacing is about lambda * s / d
    assert np.diff(maxima).min() == pytest.approx(lam * 0.3 / 0.1, rel=0.1)
    ph = predicted_screen_phase((minima[0], 0.3), 0, 0, lam, slits)
    assert np.cos(ph) == pytest.approx(-1, abs=1e-9)
    shifted, _ = predicted_extrema(slits, 0.3, lam, (-0.2, 0.2), phi_diff=np.pi)
    assert not np.any(np.isclose(shifted, 0.0))
    with pytest.raises(ValueError):
        predicted_screen_phase((0, 0.3), 0, 0, 0.0, slits)


def test_leak_and_norm_recorder(grid):
    mask = np.zeros(grid.shape, bool)
    mask[: grid.ny // 2] = True
    psi = np.ones(grid.shape, complex)
    total = np.sum(np.abs(psi) ** 2) * grid.spacing**2
    assert leaked_probability(psi, mask, grid, total) == pytest.approx(0.5)
    rec = NormRecorder(mask, stride=1)
    rec(EvolutionState(psi, grid, tau=1e-6))
    assert rec.rows[0][3] == pytest.approx(0.5)


def test_first_impact_time():
    rows = [(n, n * 1e-3, 1.0, a, a, True, 0, 0) for n, a in enumerate([0, 1, 3, 2, 0, 5])]
    assert first_impact_time(rows, t_max=4.5e-3) == pytest.approx(2e-3)
    assert first_impact_time(rows) == pytest.approx(5e-3)
