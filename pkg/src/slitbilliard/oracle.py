"""Small exact references used to check the production stepper.

Nothing here is meant to be fast.
"""
from __future__ import annotations

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from .grid import GridSpec, norm_squared
from .packet import PacketSpec

MAX_DIM = 4096


def dense_hamiltonian(grid: GridSpec, V=None) -> np.ndarray:
    """Five-point Hamiltonian as a dense ``(ny*nx, ny*nx)`` matrix, row-major ordering."""
    dim = grid.nx * grid.ny
    if dim > MAX_DIM:
        raise ValueError(f"dense oracle limited to {MAX_DIM} unknowns, grid has {dim}")

    def second_difference(n):
        return sp.diags([1.0, -2.0, 1.0], [-1, 0, 1], shape=(n, n))

    lap = (sp.kron(second_difference(grid.ny), sp.identity(grid.nx))
           + sp.kron(sp.identity(grid.ny), second_difference(grid.nx))) / grid.spacing**2
    H = (-0.5 * lap).toarray().astype(complex)
    if V is not None:
        H[np.diag_indices(dim)] += V.complex.ravel()
    return H


def expm_propagate(psi, M, t):
    """``exp(-i M t) psi`` by eigendecomposition if ``M`` is Hermitian, else ``expm``."""
    vec = np.asarray(psi).ravel()
    if np.array_equal(M, M.conj().T):
        w, U = scipy.linalg.eigh(M)
        out = U @ (np.exp(-1j * w * t) * (U.conj().T @ vec))
    else:
        out = scipy.linalg.expm(-1j * t * M) @ vec
    return out.reshape(np.shape(psi))


def free_gaussian_analytic(spec: PacketSpec, t, grid: GridSpec, normalize=True) -> np.ndarray:
    """Freely evolved packet: centre ``r0 + k t``, width ``sigma * sqrt(1 + (t / 2 sigma^2)^2)``."""
    X, Y = grid.mesh()
    s2 = spec.sigma**2
    spread = 1 + 1j * t / (2 * s2)

    def axis(u, u0, k):
        return ((2 * np.pi * s2) ** -0.25 / np.sqrt(spread)
                * np.exp(-((u - u0 - k * t) ** 2) / (4 * s2 * spread) + 1j * k * u - 0.5j * k * k * t))

    psi = axis(X, spec.center[0], spec.k[0]) * axis(Y, spec.center[1], spec.k[1])
    if normalize:
        psi = psi / np.sqrt(norm_squared(psi, grid))
    return psi


def moments(psi, grid: GridSpec):
    """Centre and rms widths ``(x_c, y_c, sigma_x, sigma_y)`` of ``|psi|^2``."""
    X, Y = grid.mesh()
    rho = np.abs(psi) ** 2
    total = rho.sum()
    xc, yc = (rho * X).sum() / total, (rho * Y).sum() / total
    sx = np.sqrt((rho * (X - xc) ** 2).sum() / total)
    sy = np.sqrt((rho * (Y - yc) ** 2).sum() / total)
    return xc, yc, sx, sy
