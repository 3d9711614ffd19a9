"""Post-processing of screen profiles and perturbation estimates."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np
from scipy.signal import find_peaks

from .grid import GridSpec, StructuralError, norm_squared
from .packet import PacketSpec, gaussian_packet
from .propagator import Propagator

# Worst-case second-moment coefficients for the k-perturbation estimate:
# A = <x^2> <= 0.25, B = <y^2> <= 1, |C| = |<xy>| <= 0.5 inside a unit billiard.
A_MAX, B_MAX, C_MAX = 0.25, 1.0, 0.5


class FringeError(ValueError):
    """Too few extrema to define a fringe visibility."""


@dataclass
class IntensityProfile:
    x: np.ndarray
    intensity: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.intensity = np.asarray(self.intensity, dtype=float)
        if self.x.shape != self.intensity.shape:
            raise StructuralError("x and intensity must have the same length")
        if not np.all(np.isfinite(self.intensity)):
            raise ValueError("intensity contains non-finite values")

    def __add__(self, other):
        _same_grid(self, other)
        return IntensityProfile(self.x, self.intensity + other.intensity)

    def to_csv(self, path=None):
        buf = io.StringIO(newline="")
        for key, value in self.meta.items():
            buf.write(f"# {key}={value}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "intensity"])
        for xv, iv in zip(self.x, self.intensity):
            w.writerow([f"{xv:.12g}", f"{iv:.12g}"])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text, newline="")
        return text

    @classmethod
    def from_csv(cls, path):
        meta, xs, vals = {}, [], []
        with open(path, newline="") as fh:
            for line in fh:
                if line.startswith("#"):
                    key, _, value = line[1:].strip().partition("=")
                    meta[key] = value
                    continue
                if line.startswith("x,"):
                    continue
                xv, iv = line.strip().split(",")
                xs.append(float(xv))
                vals.append(float(iv))
        return cls(np.array(xs), np.array(vals), meta)


def _same_grid(p, q):
    if p.x.shape != q.x.shape or not np.allclose(p.x, q.x, rtol=0, atol=1e-12):
        raise StructuralError("profiles are sampled on different screen grids")


def _smooth(values):
    out = values.copy()
    out[1:-1] = (values[:-2] + values[1:-1] + values[2:]) / 3
    return out


def fringe_extrema(profile: IntensityProfile, window=(-0.3, 0.3), prominence=0.02):
    """Indices of fringe maxima and minima inside ``window``.

    Extrema are located on a smoothed copy and must stand out by
    ``prominence`` times the window peak, which drops grid-level ripples;
    each index is then moved to the raw extremum among its neighbours.
    """
    inside = np.flatnonzero((profile.x >= window[0]) & (profile.x <= window[1]))
    s = _smooth(profile.intensity)[inside]
    prom = prominence * max(np.abs(s).max(), 1e-300)
    maxima, _ = find_peaks(s, prominence=prom)
    minima, _ = find_peaks(-s, prominence=prom)
    raw = profile.intensity
    maxima = np.array([_refine(raw, i, np.argmax) for i in inside[maxima]], dtype=int)
    minima = np.array([_refine(raw, i, np.argmin) for i in inside[minima]], dtype=int)
    return maxima, minima, s, inside


def _refine(values, i, pick):
    lo, hi = max(i - 1, 0), min(i + 2, len(values))
    return lo + int(pick(values[lo:hi]))


def fringe_visibility(profile: IntensityProfile, window=(-0.3, 0.3), prominence=0.02) -> float:
    """Mean local visibility ``(I_max - I_min) / (I_max + I_min)`` over the fringes in ``window``.

    Each interior minimum is paired with the mean of its two neighbouring
    maxima.
    """
    maxima, minima, s, inside = fringe_extrema(profile, window, prominence)
    if len(maxima) < 2 or len(minima) < 1:
        raise FringeError(
            f"need >= 2 maxima and >= 1 minimum in {window}, found {len(maxima)} and {len(minima)}")
    raw = profile.intensity
    local = []
    for m in minima:
        left = maxima[maxima < m]
        right = maxima[maxima > m]
        if len(left) == 0 or len(right) == 0:
            continue
        top = 0.5 * (raw[left[-1]] + raw[right[0]])
        low = max(raw[m], 0.0)
        local.append((top - low) / (top + low))
    if not local:
        raise FringeError("no minimum lies between two maxima")
    return float(np.clip(np.mean(local), 0.0, 1.0))


class SymmetryResult(NamedTuple):
    defect: float
    central_max: bool


def pattern_symmetry_defect(profile: IntensityProfile) -> SymmetryResult:
    """``sum |I(x) - I(-x)| / sum I(x)`` and whether the centre is a local maximum."""
    x, I = profile.x, profile.intensity
    if not np.allclose(x, -x[::-1], rtol=0, atol=1e-9):
        raise StructuralError("screen positions are not symmetric about x = 0")
    total = I.sum()
    defect = float(np.abs(I - I[::-1]).sum() / total) if total != 0 else 0.0
    n = len(I)
    if n % 2:
        c = n // 2
        central = I[c] >= I[c - 1] and I[c] >= I[c + 1]
    else:
        lo, hi = n // 2 - 1, n // 2
        central = I[lo] >= I[lo - 1] and I[hi] >= I[hi + 1]
    return SymmetryResult(defect, bool(central))


def incoherent_sum_compare(two_slit: IntensityProfile, one_a: IntensityProfile,
                           one_b: IntensityProfile, window=None) -> float:
    """L1 distance between the two-slit profile and ``I_a + I_b``, both scaled to unit area.

    Ranges over ``[0, 2]``; fully modulated fringes against a smooth sum give
    about ``2 / pi = 0.64``.
    """
    _same_grid(two_slit, one_a)
    _same_grid(two_slit, one_b)
    return profile_distance(two_slit, one_a + one_b, window)


def profile_distance(p: IntensityProfile, q: IntensityProfile, window=None) -> float:
    _same_grid(p, q)
    sel = np.ones(p.x.shape, bool) if window is None else (p.x >= window[0]) & (p.x <= window[1])
    a, b = p.intensity[sel], q.intensity[sel]
    sa, sb = a.sum(), b.sum()
    if sa == 0 or sb == 0:
        return 0.0 if sa == sb else 2.0
    return float(np.abs(a / sa - b / sb).sum())


class KBound(NamedTuple):
    worst_case: float
    exact: float
    analytic: float
    moment_estimate: float


def k_perturbation_bound(k, k_tilde, sigma, grid: GridSpec | None = None,
                         center=(0.0, -0.25)) -> KBound:
    """Size of ``psi0 - psi0~`` for packets differing only in the wave vector.

    Returns the worst-case linearised estimate (coefficients at their upper
    limits), the norm computed on ``grid`` (if given), its closed form
    ``sqrt(2 - 2 exp(-sigma^2 |dk|^2 / 2) cos(dk . r0))``, and the linearised
    estimate with the actual second moments of the packet.
    """
    dkx, dky = k[0] - k_tilde[0], k[1] - k_tilde[1]
    worst = np.sqrt(dkx**2 * A_MAX + dky**2 * B_MAX + 2 * abs(dkx * dky) * C_MAX)
    x0, y0 = center
    s2 = sigma**2
    analytic = np.sqrt(max(0.0, 2 - 2 * np.exp(-s2 * (dkx**2 + dky**2) / 2)
                           * np.cos(dkx * x0 + dky * y0)))
    a, b, c = s2 + x0**2, s2 + y0**2, x0 * y0
    moment = np.sqrt(dkx**2 * a + dky**2 * b + 2 * dkx * dky * c)
    exact = float("nan")
    if grid is not None:
        p = gaussian_packet(PacketSpec(center, tuple(k), sigma), grid)
        q = gaussian_packet(PacketSpec(center, tuple(k_tilde), sigma), grid)
        exact = np.sqrt(norm_squared(p - q, grid))
    return KBound(float(worst), float(exact), float(analytic), float(moment))


@dataclass(frozen=True)
class DuhamelReport:
    lhs_norm: float
    rhs_norm: float
    mismatch: float
    perturbation_norm: float

    @property
    def ratio(self) -> float:
        return self.rhs_norm / self.lhs_norm if self.lhs_norm else float("nan")

    @property
    def relative_error(self) -> float:
        return self.mismatch / self.lhs_norm if self.lhs_norm else 0.0


def duhamel_firstorder_check(psi0, V, V_tilde, t, cfg, grid: GridSpec, stride=10,
                             max_snapshots=2000) -> DuhamelReport:
    """Compare the change of ``psi(t)`` under ``V -> V~`` with its first-order estimate.

    The left side comes from two full evolutions. The right side,
    ``-i int_0^t exp(-iH(t-s)) (V~ - V) exp(-iHs) psi0 ds``, is a trapezoid
    sum over snapshots taken every ``stride`` steps of the unperturbed run.
    ``perturbation_norm`` is the operator size ``max |V~ - V|``.
    """
    n = int(round(t / cfg.tau))
    if n % stride:
        raise ValueError(f"{n} steps is not a multiple of the snapshot stride {stride}")
    n_snap = n // stride + 1
    if n_snap > max_snapshots:
        raise MemoryError(
            f"{n_snap} snapshots exceed the budget of {max_snapshots}; use a stride of at "
            f"least {int(np.ceil(n / (max_snapshots - 1)))}")
    dV = V_tilde.complex - V.complex
    base = Propagator(grid, V, cfg)
    pert = Propagator(grid, V_tilde, cfg)

    snaps = [dV * psi0]
    psi, psi_t = np.asarray(psi0, complex), np.asarray(psi0, complex)
    for k in range(1, n + 1):
        psi = base.advance(psi)
        psi_t = pert.advance(psi_t)
        if k % stride == 0:
            snaps.append(dV * psi)
    lhs = psi_t - psi

    h = stride * cfg.tau
    weights = np.full(len(snaps), h)
    weights[0] = weights[-1] = h / 2
    acc = weights[0] * snaps[0]
    for w, g in zip(weights[1:], snaps[1:]):
        for _ in range(stride):
            acc = base.advance(acc)
        acc = acc + w * g
    rhs = -1j * acc
    return DuhamelReport(float(np.sqrt(norm_squared(lhs, grid))),
                         float(np.sqrt(norm_squared(rhs, grid))),
                         float(np.sqrt(norm_squared(lhs - rhs, grid))),
                         float(np.abs(dV).max()))
