import numpy as np
import pytest

from slitbilliard import (
    ConfigurationError,
    PacketSpec,
    gaussian_packet,
    make_grid,
    mirror_x,
    norm_squared,
    packet_symmetry_defect,
)
from slitbilliard.oracle import moments


@pytest.fixture(scope="module")
def grid():
    return make_grid(1.6, 1.2, 0.004, y_min=-1.1)


def test_normalised_and_centred(grid):
    psi = gaussian_packet(PacketSpec(), grid)
    assert norm_squared(psi, grid) == pytest.approx(1.0, abs=1e-12)
    xc, yc, sx, sy = moments(psi, grid)
    assert xc == pytest.approx(0.0, abs=1e-12)
    assert yc == pytest.approx(-0.25, abs=1e-4)
    assert sx == pytest.approx(0.09, rel=1e-3)


def test_symmetry_defect(grid):
    sym = gaussian_packet(PacketSpec(k=(0, 180)), grid)
    tilted = gaussian_packet(PacketSpec(k=(-113, 140)), grid)
    assert packet_symmetry_defect(sym, grid) == 0.0
    assert np.array_equal(mirror_x(sym, grid), sym)
    assert packet_symmetry_defect(tilted, grid) > 1.0


def test_spectral_ratio():
    assert PacketSpec().spectral_ratio == pytest.approx(1 / (2 * 0.09 * 180))


def test_bad_sigma():
    with pytest.raises(ConfigurationError):
        PacketSpec(sigma=0.0)


def test_barrier_warning(grid, caplog):
    barrier = np.zeros(grid.shape)
    barrier[grid.row_of(-0.002)] = 1e6
    gaussian_packet(PacketSpec(), grid, barrier)
    assert "barrier" in caplog.text
