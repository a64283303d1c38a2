"""Planar lattice geometry: holonomy vectors of marked tori and slit-torus
covers, strip/box enumeration, and slope gap series.

A surface is an affine lattice (g, v): the unimodular lattice g*Z^2 together
with a marked coset g*Z^2 + v. Two holonomy conventions are supported:

* ``SurfaceMode.AFFINE_ONLY`` - holonomy set is the coset g*Z^2 + v only.
* ``SurfaceMode.DOUBLED_SLIT`` - holonomy set of the genus-2 double cover of
  the torus slit along the marked segment: primitive lattice vectors together
  with both signed cosets +-(g*Z^2 + v).

All enumeration is exact: integer coefficient ranges are derived from the
adjugate inverse of the generator, padded by one, and then filtered by the
defining inequalities.  Membership tolerances: x > 1e-12, x <= x_max + slack,
y within 1e-12 of zero counts as horizontal.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence, Union

import numpy as np

from .errors import DegenerateInputError, InvalidInputError

X_EPS = 1e-12
Y_EPS = 1e-12
BOUND_SLACK = 1e-12
SLOPE_MERGE_TOL = 1e-12
UNIMODULAR_TOL = 1e-9
VECTOR_DEDUP_TOL = 1e-12


class Vec2(NamedTuple):
    """Plane vector with the handful of operations the dynamics needs."""

    x: float
    y: float

    def dot(self, other: "Vec2") -> float:
        return self.x * other.x + self.y * other.y

    def cross(self, other: "Vec2") -> float:
        """Signed area det[self, other]."""
        return self.x * other.y - self.y * other.x

    def slope(self) -> float:
        if self.x == 0.0:
            raise InvalidInputError("slope undefined for vertical vector")
        return self.y / self.x

    def max_norm(self) -> float:
        return max(abs(self.x), abs(self.y))

    def __neg__(self) -> "Vec2":
        return Vec2(-self.x, -self.y)


class Mat2(NamedTuple):
    """2x2 real matrix, row-major."""

    m11: float
    m12: float
    m21: float
    m22: float

    def det(self) -> float:
        return self.m11 * self.m22 - self.m12 * self.m21

    def inverse(self) -> "Mat2":
        d = self.det()
        if abs(d) < 1e-15:
            raise DegenerateInputError(f"matrix is singular (det={d!r})")
        return Mat2(self.m22 / d, -self.m12 / d, -self.m21 / d, self.m11 / d)

    def __matmul__(self, other: "Mat2") -> "Mat2":
        return Mat2(
            self.m11 * other.m11 + self.m12 * other.m21,
            self.m11 * other.m12 + self.m12 * other.m22,
            self.m21 * other.m11 + self.m22 * other.m21,
            self.m21 * other.m12 + self.m22 * other.m22,
        )

    def apply(self, w: Vec2) -> Vec2:
        return Vec2(self.m11 * w.x + self.m12 * w.y, self.m21 * w.x + self.m22 * w.y)

    def as_array(self) -> np.ndarray:
        return np.array([[self.m11, self.m12], [self.m21, self.m22]], dtype=float)


IDENTITY = Mat2(1.0, 0.0, 0.0, 1.0)


def horocycle_matrix(u: float) -> Mat2:
    """Unit shear [[1, 0], [-u, 1]]; slopes drop by u under its action."""
    return Mat2(1.0, 0.0, -u, 1.0)


def geodesic_matrix(t: float) -> Mat2:
    """diag(e^t, e^-t)."""
    return Mat2(math.exp(t), 0.0, 0.0, math.exp(-t))


def box_rescale_matrix(r: float) -> Mat2:
    """diag(1/R, R): maps the side-R first-quadrant box into the unit strip."""
    if r <= 0:
        raise InvalidInputError("box size must be positive")
    return Mat2(1.0 / r, 0.0, 0.0, r)


class SurfaceMode(enum.Enum):
    AFFINE_ONLY = "affine"
    DOUBLED_SLIT = "doubled"


@dataclass(frozen=True)
class AffineLattice:
    """Unimodular lattice g*Z^2 with marked coset g*Z^2 + v."""

    g: Mat2
    v: Vec2

    def check(self) -> "AffineLattice":
        d = self.g.det()
        if abs(d - 1.0) > UNIMODULAR_TOL:
            raise InvalidInputError(f"generator must be unimodular, det={d!r}")
        return self


@dataclass(frozen=True)
class GapSeries:
    """Sorted distinct slopes with their consecutive differences.

    ``merged`` counts input slopes that were collapsed into an earlier one at
    1e-12 relative tolerance.
    """

    slopes: np.ndarray
    gaps: np.ndarray
    count: int
    merged: int


def reduce_to_fundamental(g: Mat2, v: Vec2) -> Vec2:
    """Translate the marking into the fundamental parallelogram of g*Z^2.

    The coefficient vector g^-1 v is reduced into [0, 1)^2 componentwise and
    the representative g * frac is returned.
    """
    d = g.det()
    if abs(d) < 1e-9:
        raise InvalidInputError(f"generator is singular (det={d!r})")
    inv = g.inverse()
    c = inv.apply(v)
    frac = Vec2(c.x - math.floor(c.x), c.y - math.floor(c.y))
    return g.apply(frac)


def horocycle_apply(u: float, obj):
    """Apply the time-u horocycle: vectors (x, y) -> (x, y - u*x), matrices
    and affine lattices by left multiplication."""
    if isinstance(obj, Vec2):
        return Vec2(obj.x, obj.y - u * obj.x)
    if isinstance(obj, Mat2):
        return horocycle_matrix(u) @ obj
    if isinstance(obj, AffineLattice):
        return AffineLattice(horocycle_matrix(u) @ obj.g, horocycle_apply(u, obj.v))
    raise InvalidInputError(f"cannot apply horocycle to {type(obj).__name__}")


def _coefficient_window(g: Mat2, v: Vec2, corners: Sequence[tuple]) -> tuple:
    """Integer (n_lo, n_hi) covering g^-1(region - v) for a convex region
    given by its corners, padded by one on each side."""
    inv = g.inverse()
    ns = []
    for (x, y) in corners:
        ns.append(inv.m21 * (x - v.x) + inv.m22 * (y - v.y))
    return math.floor(min(ns)) - 1, math.ceil(max(ns)) + 1


def _lattice_scan(
    g: Mat2,
    v: Vec2,
    *,
    x_max: float = 1.0,
    slope_max: float | None = None,
    y_max: float | None = None,
    include_horizontal: bool = False,
    primitive: bool = False,
) -> np.ndarray:
    """All points of g*Z^2 + v with 0 < x <= x_max and y in the requested
    window (0 < y, or y >= 0 with ``include_horizontal``), capped by
    y <= slope_max * x and/or y <= y_max.

    Returns an array of shape (k, 4): columns x, y, m, n.
    """
    if slope_max is None and y_max is None:
        raise InvalidInputError("need a slope cap or a height cap")
    caps = []
    if slope_max is not None:
        if slope_max <= 0:
            raise InvalidInputError("slope cap must be positive")
        caps.append(slope_max * x_max)
    if y_max is not None:
        if y_max < 0:
            raise InvalidInputError("height cap must be nonnegative")
        caps.append(y_max)
    y_cap = min(caps)

    x_hi = x_max + BOUND_SLACK * max(1.0, x_max)
    y_lo = -Y_EPS if include_horizontal else Y_EPS
    corners = [(0.0, y_lo), (x_max, y_lo), (0.0, y_cap), (x_max, y_cap)]
    n_lo, n_hi = _coefficient_window(g, v, corners)
    if n_hi < n_lo:
        return np.empty((0, 4))
    ns = np.arange(n_lo, n_hi + 1, dtype=float)

    lo = np.full(ns.shape, -np.inf)
    hi = np.full(ns.shape, np.inf)
    mask = np.ones(ns.shape, dtype=bool)

    def bound(p: float, q: np.ndarray, upper: bool) -> None:
        # constraint p*m <= q (upper) or p*m >= q (lower)
        nonlocal lo, hi, mask
        if p > 0:
            if upper:
                hi = np.minimum(hi, q / p)
            else:
                lo = np.maximum(lo, q / p)
        elif p < 0:
            if upper:
                lo = np.maximum(lo, q / p)
            else:
                hi = np.minimum(hi, q / p)
        else:
            mask &= (q >= 0) if upper else (q <= 0)

    # x in (0, x_hi]
    bound(g.m11, -(g.m12 * ns + v.x), upper=False)
    bound(g.m11, x_hi - (g.m12 * ns + v.x), upper=True)
    # y above y_lo and below the absolute cap
    bound(g.m21, y_lo - (g.m22 * ns + v.y), upper=False)
    y_abs = y_max if y_max is not None else y_cap
    y_abs_hi = y_abs + BOUND_SLACK * max(1.0, y_abs)
    bound(g.m21, y_abs_hi - (g.m22 * ns + v.y), upper=True)
    if slope_max is not None:
        # y - sigma*x <= 0 up to slack
        sig = slope_max
        bound(
            g.m21 - sig * g.m11,
            (sig * g.m12 - g.m22) * ns + sig * v.x - v.y + BOUND_SLACK * max(1.0, sig),
            upper=True,
        )

    m_lo = np.where(mask, np.ceil(lo) - 1, 1.0)
    m_hi = np.where(mask, np.floor(hi) + 1, 0.0)
    counts = np.maximum(m_hi - m_lo + 1, 0).astype(np.int64)
    total = int(counts.sum())
    if total == 0:
        return np.empty((0, 4))

    n_flat = np.repeat(ns, counts)
    starts = np.repeat(m_lo, counts)
    offsets = np.arange(total) - np.repeat(np.cumsum(counts) - counts, counts)
    m_flat = starts + offsets

    x = g.m11 * m_flat + g.m12 * n_flat + v.x
    y = g.m21 * m_flat + g.m22 * n_flat + v.y
    keep = (x > X_EPS) & (x <= x_hi) & (y > y_lo) & (y <= y_abs_hi)
    if slope_max is not None:
        keep &= y <= slope_max * x + BOUND_SLACK * max(1.0, slope_max)
    if primitive:
        keep &= np.gcd(
            np.abs(m_flat).astype(np.int64), np.abs(n_flat).astype(np.int64)
        ) == 1
    return np.column_stack([x[keep], y[keep], m_flat[keep], n_flat[keep]])


def _dedup_vectors(xy: np.ndarray) -> np.ndarray:
    """Remove repeated vectors (same x and y within 1e-12) after sorting by
    (x, y); used when mode components overlap."""
    if len(xy) <= 1:
        return xy
    order = np.lexsort((xy[:, 1], xy[:, 0]))
    xy = xy[order]
    d = np.abs(np.diff(xy, axis=0))
    keep = np.concatenate([[True], (d > VECTOR_DEDUP_TOL).any(axis=1)])
    return xy[keep]


def _holonomy_components(surface: AffineLattice, mode: SurfaceMode):
    """(g, v, primitive) triples whose union is the holonomy set."""
    g, v = surface.g, surface.v
    if mode is SurfaceMode.AFFINE_ONLY:
        return [(g, v, False)]
    return [(g, Vec2(0.0, 0.0), True), (g, v, False), (g, -v, False)]


def enumerate_strip(
    surface: AffineLattice,
    mode: SurfaceMode,
    slope_max: float,
    *,
    y_max: float | None = None,
    include_horizontal: bool = False,
) -> np.ndarray:
    """Holonomy vectors in the vertical strip 0 < x <= 1, y > 0 with slope at
    most ``slope_max`` (or height at most ``y_max``), sorted by slope.

    Returns an array of shape (k, 2).  Exact duplicates across holonomy
    components are removed; distinct vectors sharing a slope are kept.
    """
    surface.check()
    parts = []
    for (g, v, prim) in _holonomy_components(surface, mode):
        pts = _lattice_scan(
            g,
            v,
            x_max=1.0,
            slope_max=slope_max if y_max is None else None,
            y_max=y_max,
            include_horizontal=include_horizontal,
            primitive=prim,
        )
        if len(pts):
            parts.append(pts[:, :2])
    if not parts:
        return np.empty((0, 2))
    xy = _dedup_vectors(np.concatenate(parts))
    snapped = np.where(np.abs(xy[:, 1]) <= Y_EPS, 0.0, xy[:, 1])
    order = np.argsort(snapped / xy[:, 0], kind="stable")
    return xy[order]


def slopes_and_gaps(points: Union[np.ndarray, Iterable[Vec2]]) -> GapSeries:
    """Slope series of strip vectors: sorted distinct slopes and their gaps.

    Slopes closer than 1e-12 (relative) are merged and counted in ``merged``.
    Vectors with |y| <= 1e-12 contribute slope exactly 0.
    """
    arr = np.asarray(
        [(p.x, p.y) for p in points] if not isinstance(points, np.ndarray) else points,
        dtype=float,
    )
    if arr.size == 0:
        return GapSeries(np.empty(0), np.empty(0), 0, 0)
    x, y = arr[:, 0], arr[:, 1]
    if np.any(x <= 0):
        raise InvalidInputError("strip vectors must have positive x")
    slopes = np.where(np.abs(y) <= Y_EPS, 0.0, y) / x
    slopes = np.sort(slopes)
    if len(slopes) > 1:
        tol = SLOPE_MERGE_TOL * np.maximum(1.0, np.abs(slopes[1:]))
        keep = np.concatenate([[True], np.diff(slopes) > tol])
        merged = int(len(slopes) - keep.sum())
        slopes = slopes[keep]
    else:
        merged = 0
    return GapSeries(slopes, np.diff(slopes), len(slopes), merged)


def renormalized_box_gaps(surface: AffineLattice, mode: SurfaceMode, r: float) -> GapSeries:
    """Gaps of first-quadrant holonomy slopes at max-norm at most R, scaled
    by R^2.

    The box is 0 < x <= R, 0 <= y <= R (horizontal vectors included, so the
    lattice's slope 0 participates).  The returned series carries the raw box
    slopes and the R^2-scaled gaps; as a multiset the scaled gaps equal the
    strip gaps of the diag(1/R, R)-image surface enumerated up to height R^2.
    """
    surface.check()
    if r <= 0:
        raise InvalidInputError("box size must be positive")
    parts = []
    for (g, v, prim) in _holonomy_components(surface, mode):
        pts = _lattice_scan(
            g, v, x_max=r, y_max=r, include_horizontal=True, primitive=prim
        )
        if len(pts):
            parts.append(pts[:, :2])
    if not parts:
        return GapSeries(np.empty(0), np.empty(0), 0, 0)
    series = slopes_and_gaps(_dedup_vectors(np.concatenate(parts)))
    return GapSeries(series.slopes, r * r * series.gaps, series.count, series.merged)


def box_slope_count(surface: AffineLattice, mode: SurfaceMode, r: float) -> int:
    """N(R): number of distinct first-quadrant holonomy slopes at max-norm <= R."""
    return renormalized_box_gaps(surface, mode, r).count


def d_cover_holonomy(d: int, surface: AffineLattice, slope_max: float) -> np.ndarray:
    """Strip holonomy of the d-symmetric cyclic torus cover branched over the
    marked segment.

    The saddle connections of every such cover project to the same planar
    set, so for any d >= 2 this is exactly the doubled-slit enumeration.
    """
    if not isinstance(d, (int, np.integer)) or d < 2:
        raise InvalidInputError("cover degree must be an integer >= 2")
    return enumerate_strip(surface, SurfaceMode.DOUBLED_SLIT, slope_max)
