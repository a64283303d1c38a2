"""Lattice enumeration, strip gaps, and the box-to-strip renormalization."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from slitgaps.errors import InvalidInputError
from slitgaps.geometry import (
    AffineLattice,
    Mat2,
    SurfaceMode,
    Vec2,
    box_slope_count,
    d_cover_holonomy,
    enumerate_strip,
    horocycle_apply,
    horocycle_matrix,
    reduce_to_fundamental,
    renormalized_box_gaps,
    slopes_and_gaps,
)

IDENTITY = Mat2(1.0, 0.0, 0.0, 1.0)


def p_ab(a, b):
    return Mat2(a, b, 0.0, 1.0 / a)


def random_surface(rng):
    """Generic marked torus: sheared short-lattice generator, coset in [0,1)^2."""
    a = rng.uniform(0.2, 1.0)
    b = rng.uniform(1.0 - a, 1.0)
    s = rng.uniform(0.0, 1.0 / (a * b))
    g = horocycle_matrix(s) @ p_ab(a, b)
    v = g.apply(Vec2(rng.uniform(0.05, 0.95), rng.uniform(0.05, 0.95)))
    return AffineLattice(g, v).check()


def test_reduce_integer_translation():
    out = reduce_to_fundamental(IDENTITY, Vec2(2.5, -0.25))
    assert math.isclose(out.x, 0.5, abs_tol=1e-12)
    assert math.isclose(out.y, 0.75, abs_tol=1e-12)


def test_reduce_already_reduced():
    out = reduce_to_fundamental(p_ab(0.6, 0.5), Vec2(0.3, 0.5))
    assert math.isclose(out.x, 0.3, abs_tol=1e-12)
    assert math.isclose(out.y, 0.5, abs_tol=1e-12)
    coeff = p_ab(0.6, 0.5).inverse().apply(out)
    assert math.isclose(coeff.x, 0.25, abs_tol=1e-12)
    assert math.isclose(coeff.y, 0.3, abs_tol=1e-12)


def test_reduce_subtracts_column():
    out = reduce_to_fundamental(p_ab(0.6, 0.5), Vec2(0.9, 0.5))
    assert math.isclose(out.x, 0.3, abs_tol=1e-12)
    assert math.isclose(out.y, 0.5, abs_tol=1e-12)


def test_reduce_singular_generator():
    with pytest.raises(InvalidInputError):
        reduce_to_fundamental(Mat2(1.0, 1.0, 1.0, 1.0), Vec2(0.1, 0.1))


def test_enumerate_affine_half_lattice():
    surf = AffineLattice(IDENTITY, Vec2(0.5, 0.0))
    pts = enumerate_strip(surf, SurfaceMode.AFFINE_ONLY, 7.0)
    got = sorted((round(x, 9), round(y, 9)) for x, y in pts)
    assert got == [(0.5, 1.0), (0.5, 2.0), (0.5, 3.0)]


def test_enumerate_integer_lattice():
    surf = AffineLattice(IDENTITY, Vec2(0.0, 0.0))
    pts = enumerate_strip(surf, SurfaceMode.DOUBLED_SLIT, 3.0)
    got = sorted((round(x, 9), round(y, 9)) for x, y in pts)
    assert got == [(1.0, 1.0), (1.0, 2.0), (1.0, 3.0)]


def test_enumerate_below_min_slope_is_empty():
    surf = AffineLattice(IDENTITY, Vec2(0.0, 0.0))
    assert len(enumerate_strip(surf, SurfaceMode.DOUBLED_SLIT, 0.5)) == 0


def test_enumerate_rejects_bad_cap():
    surf = AffineLattice(IDENTITY, Vec2(0.0, 0.0))
    with pytest.raises(InvalidInputError):
        enumerate_strip(surf, SurfaceMode.AFFINE_ONLY, 0.0)


def test_slopes_and_gaps_basic():
    series = slopes_and_gaps([Vec2(0.5, 1.0), Vec2(0.5, 2.0), Vec2(0.5, 3.0)])
    assert np.allclose(series.slopes, [2.0, 4.0, 6.0])
    assert np.allclose(series.gaps, [2.0, 2.0])
    assert series.count == 3


def test_slopes_and_gaps_single_point():
    series = slopes_and_gaps([Vec2(1.0, 1.0)])
    assert np.allclose(series.slopes, [1.0])
    assert len(series.gaps) == 0


def test_integer_lattice_strip_gaps_are_unit():
    surf = AffineLattice(IDENTITY, Vec2(0.0, 0.0))
    series = slopes_and_gaps(enumerate_strip(surf, SurfaceMode.DOUBLED_SLIT, 10.0))
    assert np.allclose(series.slopes, np.arange(1, 11))
    assert np.allclose(series.gaps, 1.0)


def test_renormalized_box_gaps_integer_lattice_r1():
    surf = AffineLattice(IDENTITY, Vec2(0.0, 0.0))
    series = renormalized_box_gaps(surf, SurfaceMode.DOUBLED_SLIT, 1.0)
    assert np.allclose(series.slopes, [0.0, 1.0])
    assert np.allclose(series.gaps, [1.0])


def test_horocycle_shear():
    out = horocycle_apply(2.0, Vec2(1.0, 3.0))
    assert out == Vec2(1.0, 1.0)


def test_horocycle_kills_own_slope():
    w = Vec2(0.4, 1.3)
    out = horocycle_apply(w.slope(), w)
    assert math.isclose(out.y, 0.0, abs_tol=1e-12)


def test_horocycle_flow_example():
    out = horocycle_apply(0.4, Vec2(0.25, 0.1))
    assert math.isclose(out.x, 0.25, abs_tol=1e-12)
    assert math.isclose(out.y, 0.0, abs_tol=1e-12)


@settings(deadline=None, derandomize=True, max_examples=60)
@given(
    u=st.floats(-30, 30),
    x1=st.floats(0.01, 5),
    y1=st.floats(-5, 5),
    x2=st.floats(0.01, 5),
    y2=st.floats(-5, 5),
)
def test_slope_difference_invariance(u, x1, y1, x2, y2):
    w1, w2 = Vec2(x1, y1), Vec2(x2, y2)
    before = w1.slope() - w2.slope()
    after = horocycle_apply(u, w1).slope() - horocycle_apply(u, w2).slope()
    assert math.isclose(before, after, rel_tol=1e-9, abs_tol=1e-9)


@pytest.mark.parametrize("r", [10.0, 50.0])
def test_gamma_r_bridge(r):
    rng = np.random.default_rng(20240 + int(r))
    scale = Mat2(1.0 / r, 0.0, 0.0, r)
    for _ in range(20):
        surf = random_surface(rng)
        mode = SurfaceMode.DOUBLED_SLIT
        box = renormalized_box_gaps(surf, mode, r)
        image = AffineLattice(scale @ surf.g, scale.apply(surf.v))
        pts = enumerate_strip(
            image, mode, math.inf, y_max=r * r, include_horizontal=True
        )
        strip = slopes_and_gaps(pts)
        assert box.count == strip.count
        lhs, rhs = np.sort(box.gaps), np.sort(strip.gaps)
        assert np.all(np.abs(lhs - rhs) < 1e-9 * np.maximum(1.0, np.abs(rhs)))


def test_enumeration_completeness_vs_naive():
    rng = np.random.default_rng(7)
    for _ in range(5):
        surf = random_surface(rng)
        cap = 12.0
        pts = enumerate_strip(surf, SurfaceMode.AFFINE_ONLY, cap)
        got = sorted((round(x, 9), round(y, 9)) for x, y in pts)

        # naive scan over a coefficient box twice as large as needed
        ginv = surf.g.inverse()
        corners = [Vec2(1.0, 0.0), Vec2(1.0, cap), Vec2(0.0, 0.0), Vec2(0.0, cap)]
        coeffs = [ginv.apply(Vec2(c.x - surf.v.x, c.y - surf.v.y)) for c in corners]
        m = 2 * int(max(abs(c.x) for c in coeffs) + max(abs(c.y) for c in coeffs) + 2)
        naive = []
        for i in range(-m, m + 1):
            for j in range(-m, m + 1):
                w = Vec2(
                    surf.g.m11 * i + surf.g.m12 * j + surf.v.x,
                    surf.g.m21 * i + surf.g.m22 * j + surf.v.y,
                )
                if 1e-12 < w.x <= 1 + 1e-12 and w.y > 1e-12 and w.y / w.x <= cap:
                    naive.append((round(w.x, 9), round(w.y, 9)))
        assert got == sorted(naive)


def test_loose_quadratic_growth():
    rng = np.random.default_rng(99)
    surf = random_surface(rng)
    ratios = []
    for r in (20.0, 40.0, 80.0, 160.0):
        n = box_slope_count(surf, SurfaceMode.DOUBLED_SLIT, r)
        ratios.append(n / r**2)
    assert max(ratios) / min(ratios) < 4.0


@pytest.mark.parametrize("d", [2, 3, 7])
def test_d_cover_matches_doubled_enumeration(d):
    rng = np.random.default_rng(1234 + d)
    surf = random_surface(rng)
    cover = d_cover_holonomy(d, surf, 5.0)
    doubled = enumerate_strip(surf, SurfaceMode.DOUBLED_SLIT, 5.0)
    assert np.array_equal(np.asarray(cover), np.asarray(doubled))


def test_d_cover_identity_marking():
    surf = AffineLattice(IDENTITY, Vec2(0.5, 0.0))
    cover = d_cover_holonomy(3, surf, 5.0)
    doubled = enumerate_strip(surf, SurfaceMode.DOUBLED_SLIT, 5.0)
    assert np.array_equal(np.asarray(cover), np.asarray(doubled))


def test_d_cover_rejects_small_degree():
    surf = AffineLattice(IDENTITY, Vec2(0.5, 0.0))
    with pytest.raises(InvalidInputError):
        d_cover_holonomy(1, surf, 5.0)
