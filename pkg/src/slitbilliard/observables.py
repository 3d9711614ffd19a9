"""Screen intensity, slit phases and probability bookkeeping.

The screen is the grid row nearest ``y = s`` above ``l``; the intensity is
the time integral of the signed current ``j_y`` through it (flux moving away
from the billiard counts positive). Back-flow is kept, so ``I(x)`` may dip
slightly below zero.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .geometry import SlitSpec, slit_columns
from .grid import GridSpec, StructuralError, norm_squared


def current_y(psi: np.ndarray, row: int, grid: GridSpec) -> np.ndarray:
    """``j_y = Im(conj(psi) * d psi/dy)`` on one row, central difference."""
    if not 0 < row < grid.ny - 1:
        raise StructuralError(f"row {row} is on the border; the current needs both neighbours")
    up, mid, down = psi[row + 1], psi[row], psi[row - 1]
    return np.imag(np.conj(mid) * (up - down)) / (2 * grid.spacing)


@dataclass
class ScreenRecord:
    """Time-integrated current along the screen row.

    ``window`` (in steps) stops accumulation after that step, which gives the
    intensity piled up during an initial interval of the run.
    ``history_stride`` > 0 keeps the running intensity every that many steps,
    so any prefix window can be read back after the run.
    """

    row: int
    x: np.ndarray
    tau: float
    stride: int = 1
    window: int | None = None
    history_stride: int = 0
    intensity: np.ndarray = None
    samples: int = 0
    history: list = field(default_factory=list)

    def __post_init__(self):
        if self.intensity is None:
            self.intensity = np.zeros_like(self.x, dtype=float)

    @classmethod
    def at(cls, distance, grid, tau, stride=1, window=None, history_stride=0):
        if not 0 < distance:
            raise StructuralError("the screen must lie above the slit side")
        return cls(grid.row_of(distance), grid.x.copy(), tau, stride, window, history_stride)

    def __call__(self, state):
        if self.window is not None and state.n > self.window:
            return
        accumulate_screen(self, state.psi, state.grid, self.tau)
        if self.history_stride and state.n % self.history_stride == 0:
            self.history.append((state.n, self.intensity.copy()))

    def up_to(self, n: int) -> np.ndarray:
        """Intensity accumulated through step ``n`` (latest history entry not after it)."""
        best = None
        for m, snap in self.history:
            if m <= n:
                best = snap
        if best is None:
            raise ValueError(f"no recorded intensity at or before step {n}")
        return best

    @property
    def total(self) -> float:
        dx = self.x[1] - self.x[0]
        return float(self.intensity.sum() * dx)


def accumulate_screen(record: ScreenRecord, psi, grid: GridSpec, tau: float) -> ScreenRecord:
    record.intensity += current_y(psi, record.row, grid) * (tau * record.stride)
    record.samples += 1
    return record


def slit_nodes(slits: SlitSpec, grid: GridSpec):
    """``(row, col_a, col_b)`` of the phase probes at the slit centres.

    The probe row is the band row touching ``y = 0``; ``col_b`` is the column
    nearest ``d/2`` and ``col_a`` its exact mirror.
    """
    row = grid.row_of(-grid.spacing / 2)
    col_b = grid.col_of(slits.distance / 2)
    return row, grid.mirror_col(col_b), col_b


@dataclass(frozen=True)
class PhaseSample:
    cos_dphi: float
    amp_a: float
    amp_b: float
    valid: bool
    psi_a: complex
    psi_b: complex


def slit_phase(psi, slits: SlitSpec, grid: GridSpec, floor=0.0, mode="node") -> PhaseSample:
    """Cosine of ``arg psi(a) - arg psi(b)`` at the two slit centres.

    ``mode="mean"`` averages the field across each slit opening instead of
    probing the centre node. Samples with either modulus below ``floor`` are
    flagged invalid.
    """
    row, col_a, col_b = slit_nodes(slits, grid)
    if mode == "node":
        a, b = complex(psi[row, col_a]), complex(psi[row, col_b])
    elif mode == "mean":
        cols_a, cols_b = slit_columns(slits, grid)
        a, b = complex(psi[row, cols_a].mean()), complex(psi[row, cols_b].mean())
    else:
        raise ValueError(f"unknown phase mode {mode!r}")
    amp_a, amp_b = abs(a), abs(b)
    valid = amp_a > floor and amp_b > floor and amp_a > 0 and amp_b > 0
    cos = (a * b.conjugate()).real / (amp_a * amp_b) if valid else float("nan")
    return PhaseSample(float(np.clip(cos, -1.0, 1.0)) if valid else cos,
                       amp_a, amp_b, valid, a, b)


@dataclass
class SlitPhaseSeries:
    slits: SlitSpec
    floor: float = 0.0
    stride: int = 1
    mode: str = "node"
    rows: list = field(default_factory=list)

    def __call__(self, state):
        s = slit_phase(state.psi, self.slits, state.grid, self.floor, self.mode)
        self.rows.append((state.n, state.t, s.cos_dphi, s.amp_a, s.amp_b, s.valid,
                          s.psi_a, s.psi_b))

    def valid_cos(self) -> np.ndarray:
        return np.array([r[2] for r in self.rows if r[5]])


def predicted_screen_phase(P, phi_a, phi_b, wavelength, slits: SlitSpec) -> float:
    """Two-point-source phase difference at screen point ``P = (x, y)``."""
    if not wavelength > 0:
        raise ValueError("wavelength must be positive")
    (ax, ay), (bx, by) = slits.centers
    px, py = P
    ra = np.hypot(px - ax, py - ay)
    rb = np.hypot(px - bx, py - by)
    return phi_a - phi_b + 2 * np.pi * (ra - rb) / wavelength


def predicted_extrema(slits: SlitSpec, screen_y, wavelength, x_range, phi_diff=0.0):
    """Screen positions of the intensity maxima and minima of two point sources."""
    def phase(x):
        return predicted_screen_phase((x, screen_y), phi_diff, 0.0, wavelength, slits)

    lo, hi = x_range
    xs = np.linspace(lo, hi, 4001)
    ph = np.array([phase(x) for x in xs])
    maxima, minima = [], []
    for m in range(int(np.floor(ph.min() / np.pi)) - 1, int(np.ceil(ph.max() / np.pi)) + 2):
        target = m * np.pi
        g = ph - target
        for i in np.flatnonzero(np.sign(g[:-1]) * np.sign(g[1:]) < 0):
            root = brentq(lambda x: phase(x) - target, xs[i], xs[i + 1])
            (maxima if m % 2 == 0 else minima).append(root)
        for i in np.flatnonzero(g == 0):
            (maxima if m % 2 == 0 else minima).append(xs[i])
    return np.sort(maxima), np.sort(minima)


def leaked_probability(psi, mask, grid: GridSpec, initial=1.0) -> float:
    """Fraction of ``initial`` no longer inside the billiard."""
    return 1.0 - norm_squared(np.where(mask, psi, 0), grid) / initial


@dataclass
class NormRecorder:
    """Total and in-billiard probability at a fixed stride."""

    mask: np.ndarray
    stride: int = 100
    rows: list = field(default_factory=list)

    def __call__(self, state):
        total = norm_squared(state.psi, state.grid)
        leaked = leaked_probability(state.psi, self.mask, state.grid, state.norm0)
        self.rows.append((state.n, state.t, total, leaked))


def first_impact_time(rows, t_max=None) -> float:
    """Time at which the slit probe amplitude peaks during the first impact.

    ``rows`` are ``SlitPhaseSeries`` rows; only samples with ``t <= t_max``
    are considered, which keeps later impacts out.
    """
    t = np.array([r[1] for r in rows])
    amp = np.array([r[3] + r[4] for r in rows])
    sel = np.ones(t.shape, bool) if t_max is None else t <= t_max
    if not sel.any():
        raise ValueError("no phase samples before t_max")
    return float(t[sel][np.argmax(amp[sel])])
