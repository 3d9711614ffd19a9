"""Cell-centred rectangular grid, discrete norms and the x -> -x reflection.

Coordinates are atomic units with y pointing from the billiard interior
towards the slitted side ``l``: the billiard occupies ``y < 0``, the lower
side ``l`` lies on ``y = 0`` and the screen sits at ``y = +s`` on the far
side of the slits. Nodes are cell centres, so ``x_j = -x_{nx-1-j}`` holds
bitwise whenever the grid is centred in x and mirroring is a pure column
reversal.

Wavefunctions are plain ``(ny, nx)`` complex arrays indexed ``[row, col]``
with row ``i`` at ``y[i]`` and column ``j`` at ``x[j]``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

_RATIO_TOL = 1e-6


class ConfigurationError(ValueError):
    """Parameters that cannot describe a valid experiment."""


class StructuralError(ValueError):
    """Fields or grids that are incompatible with the requested operation."""


def _cells(length, spacing, name):
    ratio = length / spacing
    n = int(round(ratio))
    if abs(ratio - n) > _RATIO_TOL * max(1.0, abs(ratio)):
        raise ConfigurationError(
            f"{name}={length!r} is not an integer multiple of the spacing {spacing!r} "
            f"(ratio {ratio:.9g})"
        )
    return n


@dataclass(frozen=True)
class GridSpec:
    """Discretisation of the integration rectangle.

    ``x_offset`` and ``y_offset`` are the number of cells lying left of
    ``x = 0`` and below ``y = 0``.
    """

    height: float
    width: float
    spacing: float
    ny: int
    nx: int
    x_offset: float
    y_offset: float

    @cached_property
    def x(self) -> np.ndarray:
        return (np.arange(self.nx) + 0.5 - self.x_offset) * self.spacing

    @cached_property
    def y(self) -> np.ndarray:
        return (np.arange(self.ny) + 0.5 - self.y_offset) * self.spacing

    @property
    def shape(self) -> tuple[int, int]:
        return (self.ny, self.nx)

    @property
    def x_min(self) -> float:
        return -self.x_offset * self.spacing

    @property
    def y_min(self) -> float:
        return -self.y_offset * self.spacing

    @property
    def mirror_symmetric(self) -> bool:
        return 2 * self.x_offset == self.nx

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        """Return ``(X, Y)`` arrays of node coordinates, shape ``(ny, nx)``."""
        return np.meshgrid(self.x, self.y)

    def row_of(self, y: float) -> int:
        """Index of the row nearest ``y``; ties go to the upper row."""
        i = _nearest(y / self.spacing + self.y_offset - 0.5, prefer_up=True)
        return min(max(i, 0), self.ny - 1)

    def col_of(self, x: float) -> int:
        """Index of the column nearest ``x``; ties go towards ``x = 0``."""
        j = _nearest(x / self.spacing + self.x_offset - 0.5, prefer_up=x < 0)
        return min(max(j, 0), self.nx - 1)

    def mirror_col(self, j: int) -> int:
        return self.nx - 1 - j


def make_grid(height, width, spacing, *, y_min=None, x_min=None) -> GridSpec:
    """Build a grid of ``round(height/spacing)`` rows by ``round(width/spacing)`` columns.

    By default the rectangle is centred on the origin. ``y_min`` places its
    lower edge; it must sit on a cell boundary so that ``y = 0`` is a cell
    face. ``x_min`` exists for off-centre grids, which have no mirror column.
    """
    if not (height > 0 and width > 0 and spacing > 0):
        raise ConfigurationError("height, width and spacing must be positive")
    ny = _cells(height, spacing, "height")
    nx = _cells(width, spacing, "width")
    if nx < 2 or ny < 2:
        raise ConfigurationError(f"grid too small: {ny}x{nx} cells")
    y_offset = ny / 2 if y_min is None else _cells(-y_min, spacing, "y_min")
    x_offset = nx / 2 if x_min is None else _cells(-x_min, spacing, "x_min")
    return GridSpec(float(height), float(width), float(spacing), ny, nx,
                    _as_offset(x_offset), _as_offset(y_offset))


def _as_offset(v):
    # half-integer offsets (odd cell counts, centred) stay floats
    return int(v) if float(v).is_integer() else float(v)


def _nearest(u, prefer_up):
    """Round ``u`` to an integer; exact halves go up or down as asked."""
    lo = np.floor(u)
    frac = u - lo
    if abs(frac - 0.5) < 1e-9:
        return int(lo) + 1 if prefer_up else int(lo)
    return int(lo) + (1 if frac > 0.5 else 0)


def norm_squared(psi: np.ndarray, grid: GridSpec) -> float:
    """Discrete L2 norm ``spacing**2 * sum |psi|**2``.

    The column sum is folded symmetrically (``a_j + a_{n-1-j}``) before
    reduction, so mirrored fields give bitwise identical norms.
    """
    dens = psi.real**2 + psi.imag**2 if np.iscomplexobj(psi) else np.square(psi)
    nx = dens.shape[1]
    folded = dens + dens[:, ::-1]
    half = nx // 2
    total = folded[:, :half].sum()
    if nx % 2:
        total += dens[:, half].sum()
    return float(total) * grid.spacing**2


def mirror_x(psi: np.ndarray, grid: GridSpec) -> np.ndarray:
    """Reflect a field through ``x = 0`` (column reversal)."""
    if not grid.mirror_symmetric:
        raise StructuralError("grid columns are not symmetric about x = 0")
    if psi.shape != grid.shape:
        raise StructuralError(f"field shape {psi.shape} does not match grid {grid.shape}")
    return psi[:, ::-1].copy()
