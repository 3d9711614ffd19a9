"""Initial Gaussian wave packet."""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .grid import ConfigurationError, GridSpec, mirror_x, norm_squared

log = logging.getLogger(__name__)

OVERLAP_FLOOR = 1e-8


@dataclass(frozen=True)
class PacketSpec:
    center: tuple[float, float] = (0.0, -0.25)
    k: tuple[float, float] = (0.0, 180.0)
    sigma: float = 0.09

    def __post_init__(self):
        if not self.sigma > 0:
            raise ConfigurationError("packet width sigma must be positive")

    @property
    def spectral_ratio(self) -> float:
        """``sigma_k / |k|`` with ``sigma_k = 1 / (2 sigma)``."""
        return 1.0 / (2.0 * self.sigma * np.hypot(*self.k))


def gaussian_packet(spec: PacketSpec, grid: GridSpec, barrier=None) -> np.ndarray:
    """Sample the normalised packet

        psi0 = (2 pi s^2)^(-1/2) exp(i k.r) exp(-|r - r0|^2 / (4 s^2))

    on the grid and rescale it to unit discrete norm. If ``barrier`` is
    given, a warning is logged when the packet reaches into it.
    """
    X, Y = grid.mesh()
    x0, y0 = spec.center
    kx, ky = spec.k
    s2 = spec.sigma**2
    envelope = np.exp(-((X - x0) ** 2 + (Y - y0) ** 2) / (4 * s2)) / np.sqrt(2 * np.pi * s2)
    psi = envelope * np.exp(1j * (kx * X + ky * Y))
    psi = normalize(psi, grid)
    if barrier is not None:
        peak = np.abs(psi).max()
        touching = (barrier > 0) & (np.abs(psi) > OVERLAP_FLOOR * peak)
        if touching.any():
            log.warning("initial packet reaches %d barrier nodes (max |psi|/peak = %.3g)",
                        int(touching.sum()), float(np.abs(psi[touching]).max() / peak))
    return psi


def normalize(psi, grid):
    return psi / np.sqrt(norm_squared(psi, grid))


def packet_symmetry_defect(psi0: np.ndarray, grid: GridSpec) -> float:
    """``||psi0 - mirror(psi0)|| / ||psi0||``."""
    diff = psi0 - mirror_x(psi0, grid)
    return float(np.sqrt(norm_squared(diff, grid) / norm_squared(psi0, grid)))


def barrier_overlap(psi0, barrier, grid: GridSpec) -> float:
    """Probability carried by barrier nodes."""
    return norm_squared(np.where(barrier > 0, psi0, 0), grid)
