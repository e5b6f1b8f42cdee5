"""Convex planar domains, supporting halfplanes and the truncation of unbounded
domains by shifted halfplanes.

Bounded domains are dense counter-clockwise polylines parametrised by arc
length ``s`` in ``[0, L)``.  Unbounded domains keep an analytic boundary curve
``gamma(tau)``, ``tau`` in R, and are only ever discretised through
:func:`truncate`.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import shapely
from scipy.optimize import brentq

from .exceptions import EmptyTruncation, NonConvexDomain

__all__ = [
    "Domain",
    "UnboundedDomain",
    "TruncatedDomain",
    "Halfplane",
    "Location",
    "orient2d",
    "segments_cross",
    "supporting_halfplane",
    "truncate",
    "slab_params",
    "point_in_domain",
    "disc",
    "ellipse",
    "polygon_domain",
]

_HALF_ULP = 2.0**-53
_ORIENT_ERRBOUND = (3.0 + 16.0 * _HALF_ULP) * _HALF_ULP
STRICT_SINE_TOL = 1e-12
ROUNDING_SINE_TOL = 1e-10
CORNER_ANGLE = 0.05
DEFAULT_BOUNDED_VERTICES = 4096
DEFAULT_DENSITY = 64.0
CAP_SAGITTA = 0.5


def _exact_orient(a, b, c):
    ax, ay = Fraction(float(a[0])), Fraction(float(a[1]))
    bx, by = Fraction(float(b[0])), Fraction(float(b[1]))
    cx, cy = Fraction(float(c[0])), Fraction(float(c[1]))
    det = (ax - cx) * (by - cy) - (ay - cy) * (bx - cx)
    return (det > 0) - (det < 0)


def orient2d(a, b, c):
    """Orientation sign of the triangle ``a, b, c``: +1 left turn, -1 right, 0 collinear.

    Vectorised over leading axes.  The floating determinant is accepted when it
    clears a forward error bound; the remaining entries are recomputed exactly
    with rationals.
    """
    a, b, c = np.broadcast_arrays(np.asarray(a, float), np.asarray(b, float), np.asarray(c, float))
    detleft = (a[..., 0] - c[..., 0]) * (b[..., 1] - c[..., 1])
    detright = (a[..., 1] - c[..., 1]) * (b[..., 0] - c[..., 0])
    det = detleft - detright
    sign = np.array(np.sign(det), dtype=int)
    unsure = np.abs(det) <= _ORIENT_ERRBOUND * (np.abs(detleft) + np.abs(detright))
    if sign.ndim == 0:
        return _exact_orient(a, b, c) if unsure else int(sign)
    for idx in zip(*np.nonzero(unsure)):
        sign[idx] = _exact_orient(a[idx], b[idx], c[idx])
    return sign


def segments_cross(p1, q1, p2, q2):
    """True where the open segments ``p1q1`` and ``p2q2`` properly intersect."""
    o1 = orient2d(p1, q1, p2)
    o2 = orient2d(p1, q1, q2)
    o3 = orient2d(p2, q2, p1)
    o4 = orient2d(p2, q2, q1)
    return (o1 * o2 < 0) & (o3 * o4 < 0)


def _cross(u, v):
    return u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0]


class Location(enum.Enum):
    INSIDE = "Inside"
    BOUNDARY = "Boundary"
    OUTSIDE = "Outside"


@dataclass(frozen=True)
class Halfplane:
    """Closed halfplane ``{x : <x - base, normal> >= offset}``.

    ``normal`` is the unit inward normal; shifting the boundary line by ``t``
    into the domain is ``shifted(t)``.
    """

    base: tuple
    normal: tuple
    offset: float = 0.0

    def signed_distance(self, points):
        p = np.asarray(points, float)
        return (p[..., 0] - self.base[0]) * self.normal[0] + (p[..., 1] - self.base[1]) * self.normal[1] - self.offset

    def depth(self, points):
        """Distance of ``points`` from the unshifted supporting line."""
        return self.signed_distance(points) + self.offset

    def shifted(self, t):
        return Halfplane(self.base, self.normal, float(t))


class Domain:
    """Bounded convex domain given by a counter-clockwise closed polyline.

    Parameters
    ----------
    vertices : array_like, shape (n, 2)
        Boundary vertices; orientation is normalised to counter-clockwise and a
        repeated closing vertex is dropped.
    name : str
        Preset name, echoed into reports.
    allow_nonconvex : bool
        Skip the convexity check (the TV-blowup cusp preset needs this).
    """

    kind = "BoundedConvex"

    def __init__(self, vertices, name="custom", allow_nonconvex=False):
        v = np.array(vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2 or len(v) < 3:
            raise ValueError("vertices must have shape (n, 2) with n >= 3")
        if np.allclose(v[0], v[-1]):
            v = v[:-1]
        signed = 0.5 * np.sum(_cross(v, np.roll(v, -1, axis=0)))
        if signed < 0:
            v = v[::-1].copy()
            signed = -signed
        self.name = name
        self.vertices = v
        self.n = len(v)
        self.edges = np.roll(v, -1, axis=0) - v
        self.edge_lengths = np.hypot(self.edges[:, 0], self.edges[:, 1])
        if np.any(self.edge_lengths == 0):
            raise ValueError("repeated consecutive vertices")
        self.cum = np.concatenate([[0.0], np.cumsum(self.edge_lengths)])
        self.perimeter = float(self.cum[-1])
        self.area = float(signed)
        xp = _cross(v, np.roll(v, -1, axis=0))
        self._cross_prefix = np.concatenate([[0.0], np.cumsum(xp)])
        stride = max(1, self.n // 1024)
        sub = v[::stride]
        d2 = np.max(np.sum((sub[:, None, :] - sub[None, :, :]) ** 2, axis=-1))
        self.diam = float(math.sqrt(d2))
        self._classify_convexity(allow_nonconvex)
        for arr in (self.vertices, self.edges, self.edge_lengths, self.cum, self._cross_prefix):
            arr.flags.writeable = False
        self._polygon = None

    # -- convexity -----------------------------------------------------------
    def _classify_convexity(self, allow_nonconvex):
        prev = np.roll(self.vertices, 1, axis=0)
        nxt = np.roll(self.vertices, -1, axis=0)
        turn = orient2d(prev, self.vertices, nxt)
        e_prev = np.roll(self.edges, 1, axis=0)
        sine = _cross(e_prev, self.edges) / (np.roll(self.edge_lengths, 1) * self.edge_lengths)
        angle = np.arctan2(_cross(e_prev, self.edges), np.sum(e_prev * self.edges, axis=1))
        total_turn = float(np.sum(angle))
        self.turn_angle = angle
        # reflex turns below rounding level of the vertex coordinates are tolerated
        reflex = (turn < 0) & (sine < -ROUNDING_SINE_TOL)
        self.is_convex = not bool(np.any(reflex)) and abs(total_turn - 2 * math.pi) < 1e-6
        self.is_strictly_convex = self.is_convex and bool(np.all(sine > STRICT_SINE_TOL))
        local_len = 0.5 * (np.roll(self.edge_lengths, 1) + self.edge_lengths)
        self.convexity_margin = float(np.min(angle / local_len))
        if not self.is_convex and not allow_nonconvex:
            bad = int(np.argmin(np.where(reflex, sine, np.inf))) if np.any(reflex) else 0
            raise NonConvexDomain(f"{self.name}: reflex turn at vertex {bad} {self.vertices[bad].tolist()}")

    # -- parametrisation -----------------------------------------------------
    def _locate(self, s):
        s = np.mod(np.asarray(s, float), self.perimeter)
        idx = np.searchsorted(self.cum, s, side="right") - 1
        idx = np.clip(idx, 0, self.n - 1)
        frac = (s - self.cum[idx]) / self.edge_lengths[idx]
        return s, idx, frac

    def point_at(self, s):
        """Boundary point at arc-length parameter ``s`` (periodic)."""
        _, idx, frac = self._locate(s)
        return self.vertices[idx] + frac[..., None] * self.edges[idx]

    def tangent_at(self, s):
        _, idx, _ = self._locate(s)
        return self.edges[idx] / self.edge_lengths[idx][..., None]

    def outward_normal_at(self, s):
        t = self.tangent_at(s)
        return np.stack([t[..., 1], -t[..., 0]], axis=-1)

    def param_of(self, points, return_distance=False):
        """Arc-length parameter of the nearest boundary point to each of ``points``."""
        pts = np.atleast_2d(np.asarray(points, float))
        out_s = np.empty(len(pts))
        out_d = np.empty(len(pts))
        chunk = max(1, 2_000_000 // self.n)
        for lo in range(0, len(pts), chunk):
            p = pts[lo:lo + chunk]
            rel = p[:, None, :] - self.vertices[None, :, :]
            t = np.sum(rel * self.edges[None], axis=-1) / self.edge_lengths**2
            t = np.clip(t, 0.0, 1.0)
            proj = self.vertices[None] + t[..., None] * self.edges[None]
            d2 = np.sum((p[:, None, :] - proj) ** 2, axis=-1)
            k = np.argmin(d2, axis=1)
            rows = np.arange(len(p))
            out_s[lo:lo + chunk] = self.cum[k] + t[rows, k] * self.edge_lengths[k]
            out_d[lo:lo + chunk] = np.sqrt(d2[rows, k])
        out_s = np.mod(out_s, self.perimeter)
        if return_distance:
            return out_s, out_d
        return out_s

    # -- areas ---------------------------------------------------------------
    def _prefix(self, k):
        k = np.asarray(k)
        return self._cross_prefix[k % self.n] + (k // self.n) * self._cross_prefix[-1]

    def cap_area(self, s0, s1):
        """Area cut off by the chord ``p(s0) p(s1)`` on the side of the arc running
        counter-clockwise from ``s0`` to ``s1``."""
        s0, i0, _ = self._locate(s0)
        s1, i1, _ = self._locate(s1)
        p0 = self.point_at(s0)
        p1 = self.point_at(s1)
        s0, s1, i0, i1 = np.broadcast_arrays(s0, s1, i0, i1)
        wrap = s1 < s0
        j1 = np.where(wrap, i1 + self.n, i1)
        same = (j1 == i0)
        nxt = self.vertices[(i0 + 1) % self.n]
        last = self.vertices[j1 % self.n]
        path = _cross(p0, nxt) + (self._prefix(j1) - self._prefix(i0 + 1)) + _cross(last, p1)
        path = np.where(same, _cross(p0, p1), path)
        return 0.5 * (path + _cross(p1, p0))

    def arc_points(self, s0, s1, stride=1):
        """Polyline along the boundary from ``s0`` counter-clockwise to ``s1``.

        ``stride > 1`` keeps only the vertices selected by :meth:`decimation`.
        """
        s0 = float(np.mod(s0, self.perimeter))
        s1 = float(np.mod(s1, self.perimeter))
        if s1 <= s0:
            s1 += self.perimeter
        ks = np.arange(self.n * 2 + 1)
        cums = np.concatenate([self.cum[:-1], self.cum[:-1] + self.perimeter, [2 * self.perimeter]])
        keep = np.tile(self.decimation(stride), 2)
        inner = ks[:-1][(cums[:-1] > s0) & (cums[:-1] < s1) & keep]
        pts = [self.point_at(s0)[None]]
        if len(inner):
            pts.append(self.vertices[inner % self.n])
        pts.append(self.point_at(s1)[None])
        return np.concatenate(pts, axis=0)

    def decimation(self, stride):
        """Vertex mask keeping every ``stride``-th vertex and every corner."""
        idx = np.arange(self.n)
        return (idx % stride == 0) | (np.abs(self.turn_angle) > CORNER_ANGLE)

    def polygon(self):
        if self._polygon is None:
            poly = shapely.Polygon(self.vertices)
            shapely.prepare(poly)
            self._polygon = poly
        return self._polygon

    # -- membership ----------------------------------------------------------
    def classify(self, points, tol=None):
        """Vectorised :func:`point_in_domain`; returns an array of :class:`Location`."""
        pts = np.atleast_2d(np.asarray(points, float))
        tol = 1e-9 * self.diam if tol is None else tol
        _, dist = self.param_of(pts, return_distance=True)
        inside = shapely.contains_xy(self.polygon(), pts[:, 0], pts[:, 1])
        out = np.where(dist <= tol, Location.BOUNDARY, np.where(inside, Location.INSIDE, Location.OUTSIDE))
        return out

    def contains(self, points, closed=True):
        """Boolean membership; boundary points count as inside when ``closed``."""
        pts = np.atleast_2d(np.asarray(points, float))
        poly = self.polygon()
        if closed:
            return shapely.intersects_xy(poly, pts[:, 0], pts[:, 1])
        return shapely.contains_xy(poly, pts[:, 0], pts[:, 1])

    def bounds(self):
        return (*self.vertices.min(axis=0), *self.vertices.max(axis=0))

    def __repr__(self):
        return f"Domain(name={self.name!r}, n={self.n}, perimeter={self.perimeter:.6g}, area={self.area:.6g})"


class TruncatedDomain(Domain):
    """Bounded domain produced by :func:`truncate`.

    Keeps the halfplane, the slab depth ``M`` and the arc-length interval
    ``[cap_start, perimeter)`` occupied by the synthetic cap.
    """

    def __init__(self, vertices, name, source, halfplane, M, cap_start, allow_nonconvex=False):
        super().__init__(vertices, name=name, allow_nonconvex=allow_nonconvex)
        self.source = source
        self.halfplane = halfplane
        self.M = float(M)
        self.cap_start = float(cap_start)

    def on_cap(self, s):
        s = np.mod(np.asarray(s, float), self.perimeter)
        return s >= self.cap_start - 1e-12 * self.perimeter

    def depth(self, points):
        return self.halfplane.depth(points)


class UnboundedDomain:
    """Unbounded convex domain with analytic boundary curve.

    Parameters
    ----------
    curve : callable
        ``curve(tau) -> (..., 2)``, traversed with the domain on the left.
    indicator : callable
        ``indicator(points) <= 0`` exactly on the closed domain.
    name : str
    breakpoints : sequence of float
        Parameters of boundary corners that must appear as vertices.
    far : float
        Parameter magnitude used to read off the asymptotic directions.
    strip_width : float or None
        Uniform cross-section bound for domains unbounded in one direction.
    """

    kind = "UnboundedConvex"

    def __init__(self, curve, indicator, name="custom", breakpoints=(), far=50.0,
                 strip_width=None, allow_nonconvex=False):
        self.curve = curve
        self.indicator = indicator
        self.name = name
        self.breakpoints = tuple(float(b) for b in breakpoints)
        self.far = float(far)
        self.strip_width = strip_width
        self.allow_nonconvex = allow_nonconvex
        self.is_convex = self._check_convex()
        if not self.is_convex and not allow_nonconvex:
            raise NonConvexDomain(f"{name}: boundary curve turns clockwise")

    def _check_convex(self):
        tau = np.linspace(-8.0, 8.0, 4001)
        p = self.curve(tau)
        e = np.diff(p, axis=0)
        keep = np.hypot(e[:, 0], e[:, 1]) > 0
        e = e[keep]
        turn = _cross(e[:-1], e[1:]) / (np.hypot(*e[:-1].T) * np.hypot(*e[1:].T))
        return bool(np.all(turn >= -1e-12))

    def asymptotic_directions(self):
        """Unit directions in which the two boundary ends escape (start end, finish end)."""
        out = []
        for sgn in (-1.0, 1.0):
            a = self.curve(np.array(sgn * self.far / 2))
            b = self.curve(np.array(sgn * self.far))
            d = b - a
            out.append(d / np.hypot(*d))
        return out

    def param_near(self, x0, lo=-60.0, hi=60.0):
        """Curve parameter of the boundary point closest to ``x0``."""
        x0 = np.asarray(x0, float)
        tau = np.linspace(lo, hi, 200001)
        d = np.sum((self.curve(tau) - x0) ** 2, axis=-1)
        k = int(np.argmin(d))
        a, b = tau[max(k - 1, 0)], tau[min(k + 1, len(tau) - 1)]
        for _ in range(80):
            m1, m2 = a + (b - a) / 3, b - (b - a) / 3
            if np.sum((self.curve(np.array(m1)) - x0) ** 2) < np.sum((self.curve(np.array(m2)) - x0) ** 2):
                b = m2
            else:
                a = m1
        return 0.5 * (a + b)

    def sample(self, tau_lo, tau_hi, density=DEFAULT_DENSITY):
        """Points on the boundary between two parameters, uniform in arc length."""
        fine = np.linspace(tau_lo, tau_hi, 20001)
        bps = [b for b in self.breakpoints if tau_lo < b < tau_hi]
        fine = np.union1d(fine, bps)
        p = self.curve(fine)
        seg = np.hypot(*np.diff(p, axis=0).T)
        cum = np.concatenate([[0.0], np.cumsum(seg)])
        n = max(int(math.ceil(cum[-1] * density)), 8)
        targets = np.linspace(0.0, cum[-1], n + 1)
        taus = np.interp(targets, cum, fine)
        taus = np.union1d(taus, bps)
        pts = self.curve(taus)
        return pts, taus

    def classify(self, points, tol=1e-9):
        pts = np.atleast_2d(np.asarray(points, float))
        g = self.indicator(pts)
        h = 1e-7
        gx = (self.indicator(pts + [h, 0]) - self.indicator(pts - [h, 0])) / (2 * h)
        gy = (self.indicator(pts + [0, h]) - self.indicator(pts - [0, h])) / (2 * h)
        dist = np.abs(g) / np.maximum(np.hypot(gx, gy), 1e-300)
        return np.where(dist <= tol, Location.BOUNDARY, np.where(g < 0, Location.INSIDE, Location.OUTSIDE))

    def contains(self, points, closed=True):
        g = self.indicator(np.atleast_2d(np.asarray(points, float)))
        return g <= 0 if closed else g < 0

    def __repr__(self):
        return f"UnboundedDomain(name={self.name!r})"


def point_in_domain(d, p, tol=None):
    """Classify a single point as Inside, Boundary or Outside."""
    if isinstance(d, UnboundedDomain):
        return d.classify(np.asarray(p, float)[None], tol=1e-9 if tol is None else tol)[0]
    return d.classify(np.asarray(p, float)[None], tol=tol)[0]


def _inward(t):
    return np.array([-t[1], t[0]]) / np.hypot(*t)


def supporting_halfplane(d, x0):
    """Supporting halfplane at the boundary point ``x0`` with inward unit normal.

    At a corner the angle bisector of the normal cone is returned.
    """
    x0 = np.asarray(x0, float)
    if isinstance(d, UnboundedDomain):
        tau0 = d.param_near(x0)
        base = d.curve(np.array(tau0))
        dt = 1e-6
        t_in = base - d.curve(np.array(tau0 - dt))
        t_out = d.curve(np.array(tau0 + dt)) - base
        nu = _inward(t_in) + _inward(t_out)
        nu = nu / np.hypot(*nu)
        pts = d.curve(np.linspace(tau0 - d.far, tau0 + d.far, 20001))
        dist = np.hypot(*(pts - base).T)
        pts = pts[dist <= 1e3]
        scale = max(1.0, float(np.max(dist[dist <= 1e3])))
    else:
        s0 = d.param_of(x0[None])[0]
        base = d.point_at(s0)
        vert = np.isclose(d.cum[:-1], s0, rtol=0, atol=1e-9 * d.perimeter)
        vert |= np.isclose(d.cum[1:], s0, rtol=0, atol=1e-9 * d.perimeter) & (np.arange(d.n) == d.n - 1)
        if np.any(vert):
            k = int(np.nonzero(vert)[0][0])
            k = 0 if np.isclose(s0, d.perimeter, atol=1e-9 * d.perimeter) else k
            nu = _inward(d.edges[k - 1]) + _inward(d.edges[k])
        else:
            nu = _inward(d.tangent_at(s0))
        nu = nu / np.hypot(*nu)
        pts = d.vertices
        scale = d.diam
    h = Halfplane(tuple(base.tolist()), tuple(nu.tolist()), 0.0)
    worst = float(np.min(h.signed_distance(pts)))
    if worst < -1e-9 * scale:
        raise NonConvexDomain(f"boundary sample at signed distance {worst:.3e} behind supporting line")
    return h


def _arc_between(p_from, p_to, sagitta, density):
    """Circular arc from ``p_from`` to ``p_to`` bulging to the right of the chord."""
    c = p_to - p_from
    ell = float(np.hypot(*c))
    n_right = np.array([c[1], -c[0]]) / ell
    R = (ell**2 / 4 + sagitta**2) / (2 * sagitta)
    mid = 0.5 * (p_from + p_to)
    centre = mid + (sagitta - R) * n_right
    a0 = math.atan2(*(p_from - centre)[::-1])
    a1 = math.atan2(*(p_to - centre)[::-1])
    while a1 <= a0:
        a1 += 2 * math.pi
    n = max(int(math.ceil(R * (a1 - a0) * density)), 16)
    ang = np.linspace(a0, a1, n + 1)
    return centre + R * np.stack([np.cos(ang), np.sin(ang)], axis=-1)


def slab_params(d, h, depth):
    """Curve parameters ``(tau_a, tau_b)`` where the two boundary branches of an
    unbounded domain reach ``depth`` below the halfplane ``h``."""
    tau0 = d.param_near(h.base)

    def excess(tau):
        return float(h.depth(d.curve(np.array(tau)))) - depth

    ends = []
    for sgn in (-1.0, 1.0):
        step = 1.0
        for _ in range(80):
            if excess(tau0 + sgn * step) > 0:
                break
            step *= 2.0
        else:
            raise EmptyTruncation("slab never exits the domain along one boundary branch")
        a, b = sorted((tau0 + sgn * step / 2 if step > 1 else tau0, tau0 + sgn * step))
        ends.append(brentq(excess, a, b, xtol=1e-14, rtol=1e-15, maxiter=500))
    return tuple(ends)


def truncate(d, h, M, density=DEFAULT_DENSITY, sagitta=CAP_SAGITTA):
    """Bounded convex domain agreeing with ``d`` on the slab of depth ``M + 1``.

    Beyond depth ``M + 1`` the domain is closed by a circular cap bulging
    outwards with the given sagitta (halved until the cap lies inside ``d``).
    """
    if not isinstance(d, UnboundedDomain):
        raise TypeError("truncate expects an UnboundedDomain")
    if M <= 0:
        raise EmptyTruncation(f"slab depth {M} does not reach into the domain")
    tau_a, tau_b = slab_params(d, h, M + 1.0)
    pts, taus = d.sample(tau_a, tau_b, density=density)
    sag = sagitta
    for _ in range(30):
        cap = _arc_between(pts[-1], pts[0], sag, density)[1:-1]
        if np.all(d.contains(cap, closed=False)):
            break
        sag /= 2
    verts = np.concatenate([pts, cap], axis=0)
    seg = np.hypot(*np.diff(pts, axis=0).T)
    cap_start = float(np.sum(seg))
    source = np.concatenate([taus, np.full(len(cap), np.nan)])
    return TruncatedDomain(verts, name=f"{d.name}|M={M:g}", source=source, halfplane=h, M=M,
                           cap_start=cap_start, allow_nonconvex=d.allow_nonconvex)


def disc(n=DEFAULT_BOUNDED_VERTICES, radius=1.0, centre=(0.0, 0.0)):
    """Unit disc (or a scaled copy); vertex 0 sits at angle 0."""
    ang = 2 * np.pi * np.arange(n) / n
    pts = np.stack([np.cos(ang), np.sin(ang)], axis=-1) * radius + np.asarray(centre, float)
    return Domain(pts, name="disc" if radius == 1.0 else f"disc(r={radius:g})")


def ellipse(a, b, n=DEFAULT_BOUNDED_VERTICES):
    ang = 2 * np.pi * np.arange(n) / n
    return Domain(np.stack([a * np.cos(ang), b * np.sin(ang)], axis=-1), name=f"ellipse({a:g},{b:g})")


def polygon_domain(vertices, name="csv", allow_nonconvex=False):
    return Domain(vertices, name=name, allow_nonconvex=allow_nonconvex)
