"""Truncated-Taylor propagation of the 2D Schroedinger equation.

One step applies ``sum_{n=0}^{p} (-i tau H)^n / n!`` to the field, evaluated
in Horner form with ``p`` applications of the five-point Hamiltonian

    (H psi)_ij = -(psi_{i+1,j} + psi_{i-1,j} + psi_{i,j+1} + psi_{i,j-1} - 4 psi_ij) / (2 h^2)
                 + (V_B - i V_A)_ij psi_ij

with ``psi = 0`` outside the grid. Units are atomic with ``m = 1``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numba
import numpy as np

from .geometry import PotentialField
from .grid import GridSpec, StructuralError, norm_squared

# an old system TBB only means numba falls back to another threading layer
warnings.filterwarnings("ignore", message=".*TBB threading layer.*")


class NumericalInstability(RuntimeError):
    """Raised when the field blows up or gains probability."""


@dataclass(frozen=True)
class StepperConfig:
    tau: float = 1e-6
    order: int = 4
    drift_tolerance: float = 1e-4
    check_every: int = 100

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError("time step must be positive")
        if self.order not in range(1, 7):
            raise ValueError(f"series order must be in 1..6, got {self.order}")


@dataclass
class EvolutionState:
    psi: np.ndarray
    grid: GridSpec
    n: int = 0
    tau: float = 0.0
    norm0: float | None = None
    norm_history: list = field(default_factory=list)

    def __post_init__(self):
        if self.norm0 is None:
            self.norm0 = norm_squared(self.psi, self.grid)

    @property
    def t(self) -> float:
        return self.n * self.tau

    def copy(self):
        return EvolutionState(self.psi.copy(), self.grid, self.n, self.tau, self.norm0,
                              list(self.norm_history))


@numba.njit(parallel=True, cache=True)
def _hamiltonian_kernel(psi, diag, c, out):
    ny, nx = psi.shape
    for i in numba.prange(ny):
        for j in range(nx):
            vert = (psi[i - 1, j] if i > 0 else 0j) + (psi[i + 1, j] if i < ny - 1 else 0j)
            horiz = (psi[i, j - 1] if j > 0 else 0j) + (psi[i, j + 1] if j < nx - 1 else 0j)
            out[i, j] = c * (vert + horiz) + diag[i, j] * psi[i, j]


@numba.njit(parallel=True, cache=True)
def _horner_kernel(psi, acc, diag, c, f, out):
    # out = psi + f * H acc
    ny, nx = psi.shape
    for i in numba.prange(ny):
        for j in range(nx):
            vert = (acc[i - 1, j] if i > 0 else 0j) + (acc[i + 1, j] if i < ny - 1 else 0j)
            horiz = (acc[i, j - 1] if j > 0 else 0j) + (acc[i, j + 1] if j < nx - 1 else 0j)
            out[i, j] = psi[i, j] + f * (c * (vert + horiz) + diag[i, j] * acc[i, j])


def set_threads(n: int) -> None:
    """Worker threads for the stencil sweeps; results do not depend on it."""
    numba.set_num_threads(max(1, min(int(n), numba.config.NUMBA_NUM_THREADS)))


def _diagonal(V: PotentialField, grid: GridSpec) -> np.ndarray:
    if V.barrier.shape != grid.shape or V.absorber.shape != grid.shape:
        raise StructuralError(
            f"potential shape {V.barrier.shape} does not match grid {grid.shape}")
    return np.ascontiguousarray(2.0 / grid.spacing**2 + V.complex, dtype=np.complex128)


def apply_hamiltonian(psi: np.ndarray, V: PotentialField, grid: GridSpec) -> np.ndarray:
    if psi.shape != grid.shape:
        raise StructuralError(f"field shape {psi.shape} does not match grid {grid.shape}")
    psi = np.ascontiguousarray(psi, dtype=np.complex128)
    out = np.empty_like(psi)
    _hamiltonian_kernel(psi, _diagonal(V, grid), -0.5 / grid.spacing**2, out)
    return out


class Propagator:
    """Reusable stepper bound to one grid, potential and configuration."""

    def __init__(self, grid: GridSpec, V: PotentialField, cfg: StepperConfig):
        self.grid, self.cfg = grid, cfg
        self.diag = _diagonal(V, grid)
        self.c = -0.5 / grid.spacing**2
        self._factors = [-1j * cfg.tau / n for n in range(cfg.order, 0, -1)]
        self._buf = [np.empty(grid.shape, np.complex128) for _ in range(2)]

    def advance(self, psi: np.ndarray) -> np.ndarray:
        """Return a new array holding ``psi`` advanced by one step."""
        psi = np.ascontiguousarray(psi, dtype=np.complex128)
        acc = psi
        k = 0
        for f in self._factors:
            out = self._buf[k]
            _horner_kernel(psi, acc, self.diag, self.c, f, out)
            acc, k = out, 1 - k
        return acc.copy()

    def step(self, state: EvolutionState) -> EvolutionState:
        return EvolutionState(self.advance(state.psi), state.grid, state.n + 1,
                              self.cfg.tau, state.norm0, state.norm_history)

    def check(self, state: EvolutionState) -> float:
        nrm = norm_squared(state.psi, state.grid)
        state.norm_history.append((state.n, nrm))
        if not math.isfinite(nrm):
            raise NumericalInstability(f"non-finite field at step {state.n}")
        if nrm > state.norm0 * (1 + self.cfg.drift_tolerance):
            raise NumericalInstability(
                f"norm grew from {state.norm0:.12g} to {nrm:.12g} by step {state.n}; "
                f"tau*|H| is probably outside the stability interval")
        return nrm


def step(state: EvolutionState, V: PotentialField, cfg: StepperConfig) -> EvolutionState:
    """Advance by one time step of length ``cfg.tau``."""
    return Propagator(state.grid, V, cfg).step(state)


def evolve(state, V, cfg, observers=(), n_steps=0, stop=None, propagator=None):
    """Apply ``n_steps`` steps, calling observers after each one.

    An observer is any callable taking the state; an integer ``stride``
    attribute restricts it to steps that are multiples of the stride. ``stop``
    is an optional predicate on the state that ends the run early.
    """
    if n_steps < 0:
        raise ValueError("n_steps must be non-negative")
    prop = propagator or Propagator(state.grid, V, cfg)
    strides = [max(1, int(getattr(obs, "stride", 1))) for obs in observers]
    for _ in range(n_steps):
        state = prop.step(state)
        if state.n % cfg.check_every == 0:
            prop.check(state)
        for obs, stride in zip(observers, strides):
            if state.n % stride == 0:
                obs(state)
        if stop is not None and stop(state):
            break
    return state


def imaginary_axis_limit(order: int) -> float:
    """Largest ``y`` with ``|R(iy)| <= 1`` on ``(0, y]`` for the truncated series ``R``."""
    coeffs = [(-1j) ** n / math.factorial(n) for n in range(order + 1)]
    p = np.polynomial.Polynomial(coeffs)
    amp2 = (p * np.polynomial.Polynomial(np.conj(coeffs))).coef.real.copy()
    amp2[0] -= 1.0
    amp2[np.abs(amp2) < 1e-15] = 0.0
    nz = np.flatnonzero(amp2)
    if nz.size == 0:
        return math.inf
    # |R(iy)|^2 - 1 = y^m q(y); growth right away if q(0) > 0
    reduced = amp2[nz[0]:]
    if reduced[0] > 0:
        return 0.0
    roots = np.polynomial.Polynomial(reduced).roots()
    real = [r.real for r in roots if abs(r.imag) < 1e-9 and r.real > 0]
    return float(min(real)) if real else math.inf


# Only order 4 is used in production; tests check this value against the
# dense-matrix propagator.
STABILITY_LIMIT = imaginary_axis_limit(4)


@dataclass(frozen=True)
class StabilityReport:
    kinetic_bound: float
    barrier_max: float
    absorber_max: float
    spectral_bound: float
    tau_norm: float
    kinetic_tau_norm: float
    limit: float
    stable: bool
    barrier_dominated: bool

    def summary(self) -> str:
        verdict = "ok" if self.stable else "UNSTABLE"
        text = (f"tau*|H|_est = {self.tau_norm:.4g} (limit {self.limit:.4g}): {verdict}; "
                f"kinetic part {self.kinetic_tau_norm:.4g}")
        if self.barrier_dominated:
            text += ("; the bound is set by the barrier height, whose modes live inside "
                     "the walls where the field is negligible")
        return text


def stability_report(grid: GridSpec, V: PotentialField | None, cfg: StepperConfig) -> StabilityReport:
    kinetic = 4.0 / grid.spacing**2
    vb = float(V.barrier.max()) if V is not None else 0.0
    va = float(V.absorber.max()) if V is not None else 0.0
    bound = kinetic + vb + va
    limit = imaginary_axis_limit(cfg.order)
    return StabilityReport(kinetic, vb, va, bound, cfg.tau * bound, cfg.tau * kinetic,
                           limit, cfg.tau * bound <= limit, vb >= kinetic)
