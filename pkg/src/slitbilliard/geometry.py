"""Billiard barriers, slits and the absorbing layer.

All shapes share the lower side ``l``: the segment ``|x| <= side/2`` on
``y = 0``, with the billiard below it. Walls are hard bands of height
``barrier_height`` drawn inward from the nominal outline, so the band of
``l`` occupies ``-barrier_width < y < 0``. A node belongs to a band iff its
centre does (no partial-volume weights).
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .grid import ConfigurationError, GridSpec


def _segment_distance(X, Y, a, b):
    ax, ay = a
    bx, by = b
    dx, dy = bx - ax, by - ay
    t = ((X - ax) * dx + (Y - ay) * dy) / (dx * dx + dy * dy)
    t = np.clip(t, 0.0, 1.0)
    return np.hypot(X - (ax + t * dx), Y - (ay + t * dy))


class _Polygon:
    """Convex polygon helpers; subclasses provide ``vertices`` (counter-clockwise)."""

    mirror_symmetric = False

    def vertices(self):
        raise NotImplementedError

    def _fold(self, X):
        # evaluate symmetric shapes on |x| so rounding cannot break the mirror
        return np.abs(X) if self.mirror_symmetric else X

    def inside(self, X, Y):
        X = self._fold(X)
        verts = self.vertices()
        mask = np.ones(np.shape(X), dtype=bool)
        for (ax, ay), (bx, by) in zip(verts, verts[1:] + verts[:1]):
            mask &= (bx - ax) * (Y - ay) - (by - ay) * (X - ax) >= 0
        return mask

    def wall_distance(self, X, Y):
        X = self._fold(X)
        verts = self.vertices()
        return np.minimum.reduce(
            [_segment_distance(X, Y, a, b) for a, b in zip(verts, verts[1:] + verts[:1])]
        )

    def obstacle(self, X, Y):
        return np.zeros(np.shape(X), dtype=bool)

    def validate(self, barrier_width):
        pass


@dataclass(frozen=True)
class Square(_Polygon):
    side: float = 1.0

    def vertices(self):
        h = self.side / 2
        return [(-h, -self.side), (h, -self.side), (h, 0.0), (-h, 0.0)]

    @property
    def mirror_symmetric(self):
        return True


@dataclass(frozen=True)
class SinaiRing(Square):
    """Square billiard with a filled hard disc inside it."""

    center: tuple[float, float] = (0.0, -0.6)
    radius: float = 0.1

    def obstacle(self, X, Y):
        cx, cy = self.center
        return (X - cx) ** 2 + (Y - cy) ** 2 <= self.radius**2

    def validate(self, barrier_width):
        cx, cy = self.center
        h, r = self.side / 2, self.radius
        if r <= 0:
            raise ConfigurationError("ring radius must be positive")
        if not (-h + barrier_width < cx - r and cx + r < h - barrier_width
                and -self.side + barrier_width < cy - r and cy + r < -barrier_width):
            raise ConfigurationError(
                f"ring at {self.center} with radius {r} overlaps the outer wall")

    @property
    def mirror_symmetric(self):
        return self.center[0] == 0.0


@dataclass(frozen=True)
class RightTriangle(_Polygon):
    """Isosceles right triangle hanging below ``l``.

    ``orientation`` picks where the right angle sits: ``"left"`` at
    ``(-side/2, 0)``, ``"right"`` at ``(side/2, 0)`` (both with ``l`` as a
    cathetus), or ``"apex"`` at ``(0, -side/2)`` with ``l`` as the hypotenuse.
    """

    orientation: str = "left"
    side: float = 1.0

    def vertices(self):
        h, s = self.side / 2, self.side
        if self.orientation == "left":
            return [(-h, -s), (h, 0.0), (-h, 0.0)]
        if self.orientation == "right":
            return [(h, -s), (h, 0.0), (-h, 0.0)]
        if self.orientation == "apex":
            return [(0.0, -h), (h, 0.0), (-h, 0.0)]
        raise ConfigurationError(f"unknown triangle orientation {self.orientation!r}")

    def validate(self, barrier_width):
        self.vertices()

    @property
    def mirror_symmetric(self):
        return self.orientation == "apex"


@dataclass(frozen=True)
class TriangleArc:
    """Right triangle with ``l`` as a cathetus and its hypotenuse replaced by an arc.

    ``sagitta`` is the arc height over the chord; positive values bow the arc
    into the triangle (a dispersing wall).
    """

    sagitta: float = 0.1
    orientation: str = "left"
    side: float = 1.0

    def _triangle(self):
        return RightTriangle(self.orientation, self.side)

    def _circle(self):
        (ax, ay), (bx, by), _ = self._triangle().vertices()
        chord = np.hypot(bx - ax, by - ay)
        h = abs(self.sagitta)
        radius = (chord**2 / 4 + h**2) / (2 * h)
        mx, my = (ax + bx) / 2, (ay + by) / 2
        # unit normal of the chord pointing into the triangle
        nx, ny = -(by - ay) / chord, (bx - ax) / chord
        sign = -1.0 if self.sagitta > 0 else 1.0
        off = radius - h
        return (mx + sign * off * nx, my + sign * off * ny), radius

    def inside(self, X, Y):
        (cx, cy), r = self._circle()
        d2 = (X - cx) ** 2 + (Y - cy) ** 2
        tri = self._triangle().inside(X, Y)
        if self.sagitta > 0:
            return tri & (d2 >= r * r)
        return (tri | (d2 <= r * r)) & (Y <= 0)

    def wall_distance(self, X, Y):
        a, b, c = self._triangle().vertices()
        (cx, cy), r = self._circle()
        arc = np.abs(np.hypot(X - cx, Y - cy) - r)
        legs = np.minimum(_segment_distance(X, Y, b, c), _segment_distance(X, Y, c, a))
        return np.minimum(arc, legs)

    def obstacle(self, X, Y):
        return np.zeros(np.shape(X), dtype=bool)

    def validate(self, barrier_width):
        if self.sagitta == 0:
            raise ConfigurationError("arc sagitta must be nonzero; use RightTriangle")
        self._triangle().vertices()

    @property
    def mirror_symmetric(self):
        return False


@dataclass(frozen=True)
class SlitSpec:
    width: float = 0.012
    distance: float = 0.1
    open_a: bool = True
    open_b: bool = True

    @property
    def centers(self):
        """Slit centres ``a`` (left) and ``b`` (right) on ``y = 0``."""
        return (-self.distance / 2, 0.0), (self.distance / 2, 0.0)


@dataclass(frozen=True)
class PotentialField:
    """Real barrier ``V_B`` and absorber amplitude ``V_A`` on the grid.

    The propagator uses the complex potential ``V_B - i V_A``.
    """

    barrier: np.ndarray
    absorber: np.ndarray
    barrier_height: float = 0.0
    barrier_width: float = 0.0
    side: float = 1.0

    @property
    def complex(self):
        return self.barrier - 1j * self.absorber

    def with_absorber(self, absorber):
        return replace(self, absorber=absorber)


def billiard_mask(shape, grid: GridSpec) -> np.ndarray:
    """Nodes inside the nominal outline of the billiard (walls included)."""
    X, Y = grid.mesh()
    return shape.inside(X, Y)


def lower_band(grid: GridSpec, barrier_width: float, side: float = 1.0) -> np.ndarray:
    """Nodes of the barrier band along ``l``."""
    X, Y = grid.mesh()
    return (Y < 0) & (Y > -barrier_width) & (np.abs(X) <= side / 2)


def build_billiard(shape, barrier_height, barrier_width, grid: GridSpec) -> PotentialField:
    """Barrier potential of a closed billiard (no slits, no absorber)."""
    if barrier_width < 2 * grid.spacing * (1 - 1e-9):
        raise ConfigurationError(
            f"barrier width {barrier_width} is thinner than two cells ({2 * grid.spacing})")
    if barrier_height <= 0:
        raise ConfigurationError("barrier height must be positive")
    shape.validate(barrier_width)
    X, Y = grid.mesh()
    inside = shape.inside(X, Y)
    wall = inside & (shape.wall_distance(X, Y) < barrier_width)
    wall |= shape.obstacle(X, Y)
    barrier = np.where(wall, float(barrier_height), 0.0)
    return PotentialField(barrier, np.zeros(grid.shape), float(barrier_height),
                          float(barrier_width), float(shape.side))


def slit_columns(slits: SlitSpec, grid: GridSpec):
    """Column indices covered by slits ``a`` and ``b``."""
    cols = []
    for cx, _ in slits.centers:
        cols.append(np.flatnonzero(np.abs(grid.x - cx) < slits.width / 2 * (1 - 1e-9)))
    return cols


def carve_slits(V: PotentialField, slits: SlitSpec, grid: GridSpec) -> PotentialField:
    """Open the slits: zero ``V_B`` across the band of ``l`` over each open interval."""
    w, d, half = slits.width, slits.distance, V.side / 2
    if w <= 0 or d <= w:
        raise ConfigurationError(f"need 0 < slit width < slit distance (got w={w}, d={d})")
    if d / 2 + w / 2 > half - w:
        raise ConfigurationError(
            f"slits at +-{d / 2} with width {w} do not fit inside l (half-length {half})")
    band = lower_band(grid, V.barrier_width, V.side)
    barrier = V.barrier.copy()
    for is_open, cols in zip((slits.open_a, slits.open_b), slit_columns(slits, grid)):
        if is_open:
            sub = band[:, cols]
            barrier[:, cols] = np.where(sub, 0.0, barrier[:, cols])
    return replace(V, barrier=barrier)


_PROFILES = {"linear": 1, "quadratic": 2, "cubic": 3}


def build_absorber(layer_width, strength, profile, grid: GridSpec, exclude=None) -> np.ndarray:
    """Absorber amplitude ``V_A`` in a layer of width ``layer_width`` along the border.

    ``V_A = strength * (xi / layer_width) ** p`` where ``xi`` is the depth
    into the layer measured from its inner edge and ``p`` is set by
    ``profile`` (``"linear"``, ``"quadratic"``, ``"cubic"``). ``exclude`` is
    an optional mask (the billiard) that the layer must not touch.
    """
    if layer_width < 4 * grid.spacing * (1 - 1e-9):
        raise ConfigurationError(
            f"absorbing layer {layer_width} is thinner than four cells ({4 * grid.spacing})")
    try:
        power = _PROFILES[profile]
    except KeyError:
        raise ConfigurationError(f"unknown absorber profile {profile!r}") from None
    x, y = grid.x, grid.y
    x_lo, y_lo = grid.x_min, grid.y_min
    x_hi = (grid.nx - grid.x_offset) * grid.spacing
    y_hi = (grid.ny - grid.y_offset) * grid.spacing
    ex = np.minimum(x - x_lo, x_hi - x)
    ey = np.minimum(y - y_lo, y_hi - y)
    edge = np.minimum(ex[None, :], ey[:, None])
    depth = np.clip(layer_width - edge, 0.0, None) / layer_width
    absorber = strength * depth**power
    if exclude is not None and np.any(exclude & (absorber > 0)):
        raise ConfigurationError("absorbing layer overlaps the billiard")
    return absorber


def potential_symmetry_defect(V: PotentialField) -> float:
    """Relative L1 mismatch between ``V_B`` and its mirror image.

    Zero exactly when the barrier is invariant under ``x -> -x``.
    """
    total = V.barrier.sum()
    if total == 0:
        return 0.0
    return float(np.abs(V.barrier - V.barrier[:, ::-1]).sum() / total)

