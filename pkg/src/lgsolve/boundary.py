"""Boundary data on convex domains: evaluators, discontinuity bookkeeping,
arc-length mollification, truncation extensions and data presets."""
from __future__ import annotations

import math
from collections import namedtuple
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate

from .exceptions import NonIntegrableData
from .geometry import Domain, TruncatedDomain, UnboundedDomain

__all__ = [
    "Jump",
    "BoundaryFunction",
    "MollificationKernel",
    "mollify",
    "extend_truncated",
    "fat_cantor_indicator",
    "fat_cantor_intervals",
    "classify_continuity",
    "ContinuityClass",
    "TAGS",
]

TAGS = ("C0compact", "C0", "Cb", "Cunbounded", "AE_continuous", "BV", "Pathological")
ContinuityClass = namedtuple("ContinuityClass", "tag discontinuity_measure n_jumps")
GAUSS_NODES = 48


@dataclass(frozen=True)
class Jump:
    """Declared jump at arc-length ``s`` with one-sided limits."""

    s: float
    left: float
    right: float


class BoundaryFunction:
    """A real function on the boundary of a domain.

    For bounded domains ``func`` maps arc-length parameters to values.  For
    unbounded domains ``func`` maps points ``(..., 2)`` to values, since no
    global discretised parametrisation exists.

    Extra keyword flags describe properties that cannot be read off samples:
    ``integrable`` (f in L^1 of the boundary), ``sup`` (a sup-norm bound),
    ``support_depth`` (support inside a bounded slab), ``decays`` (limit 0 at
    infinity) and ``pathological_measure`` (positive-measure discontinuity set).
    """

    def __init__(self, domain, func, jumps=(), tag=None, name="custom", *, integrable=True,
                 sup=None, support_depth=None, decays=False, pathological_measure=0.0,
                 jump_points=None, limits=None):
        self.domain = domain
        self.func = func
        self.jumps = tuple(sorted(jumps, key=lambda j: j.s))
        self.name = name
        self.integrable = integrable
        self.sup = sup
        self.support_depth = support_depth
        self.decays = decays
        self.pathological_measure = float(pathological_measure)
        self.jump_points = jump_points
        self.limits = limits
        self.tag = tag if tag is not None else classify_continuity(self).tag
        if self.tag not in TAGS:
            raise ValueError(f"unknown continuity tag {self.tag!r}")

    @property
    def on_points(self):
        return isinstance(self.domain, UnboundedDomain)

    @property
    def jump_params(self):
        return np.array([j.s for j in self.jumps], dtype=float)

    @property
    def is_continuous(self):
        return not self.jumps and self.pathological_measure == 0.0

    def __call__(self, s):
        if self.on_points:
            raise TypeError("data on an unbounded domain is evaluated with at_points()")
        return np.asarray(self.func(np.asarray(s, float)), dtype=float)

    def at_points(self, points):
        pts = np.asarray(points, float)
        if self.on_points:
            return np.asarray(self.func(pts), dtype=float)
        return self(self.domain.param_of(pts.reshape(-1, 2))).reshape(pts.shape[:-1])

    def sample(self, n=4096):
        """Values on ``n`` equispaced parameters (bounded domains)."""
        s = np.arange(n) * (self.domain.perimeter / n)
        return s, self(s)

    def __repr__(self):
        return f"BoundaryFunction(name={self.name!r}, tag={self.tag}, jumps={len(self.jumps)})"


def classify_continuity(f):
    """Continuity class of ``f`` and the measure of its discontinuity set.

    The answer is derived from the declared jumps and flags only.
    """
    n_jumps = len(f.jumps)
    if f.pathological_measure > 0:
        return ContinuityClass("Pathological", f.pathological_measure, n_jumps)
    if n_jumps:
        declared = getattr(f, "tag", None)
        tag = "BV" if declared == "BV" else "AE_continuous"
        return ContinuityClass(tag, 0.0, n_jumps)
    if isinstance(f.domain, UnboundedDomain):
        if f.support_depth is not None:
            return ContinuityClass("C0compact", 0.0, 0)
        if f.decays:
            return ContinuityClass("C0", 0.0, 0)
        if f.sup is not None and np.isfinite(f.sup):
            return ContinuityClass("Cb", 0.0, 0)
        return ContinuityClass("Cunbounded", 0.0, 0)
    return ContinuityClass("C0", 0.0, 0)


# -- mollification -----------------------------------------------------------

def _bump(x):
    x = np.asarray(x, float)
    out = np.zeros_like(x)
    inside = np.abs(x) < 1
    out[inside] = np.exp(-1.0 / (1.0 - x[inside] ** 2))
    return out


@lru_cache(maxsize=None)
def _bump_mass():
    val, _ = integrate.quad(lambda x: math.exp(-1.0 / (1.0 - x * x)), -1, 1, epsabs=1e-14, epsrel=1e-13, limit=200)
    return val


class MollificationKernel:
    """Smooth bump ``rho(x) = C exp(-1/(1-x^2)) (1 + beta x)`` on ``[-1, 1]``,
    rescaled to radius ``eps``.  ``beta`` tilts the kernel while keeping it
    nonnegative and of unit mass."""

    def __init__(self, eps, beta=0.0):
        if eps <= 0:
            raise ValueError("eps must be positive")
        if not -1 < beta < 1:
            raise ValueError("beta must lie in (-1, 1)")
        self.eps = float(eps)
        self.beta = float(beta)
        self.C = 1.0 / _bump_mass()

    def profile(self, x):
        x = np.asarray(x, float)
        return self.C * _bump(x) * (1.0 + self.beta * x)

    def __call__(self, y):
        return self.profile(np.asarray(y, float) / self.eps) / self.eps

    def mass(self):
        val, _ = integrate.quad(lambda x: float(self.profile(x)), -1, 1, epsabs=1e-14, epsrel=1e-13, limit=200)
        return val

    @property
    def radius(self):
        return self.eps


def _convolve(f, kernel, s, chunk=4096):
    """Normalised Gauss-Legendre quadrature of ``(f * rho_eps)(s)``, split at jumps."""
    L = f.domain.perimeter
    eps = kernel.eps
    xg, wg = np.polynomial.legendre.leggauss(GAUSS_NODES)
    J = f.jump_params
    J3 = np.concatenate([J - L, J, J + L]) if len(J) else np.zeros(0)
    s = np.atleast_1d(np.asarray(s, float))
    out = np.empty_like(s)
    for lo in range(0, len(s), chunk):
        sc = s[lo:lo + chunk]
        a, b = sc - eps, sc + eps
        ia = np.searchsorted(J3, a, side="right")
        ib = np.searchsorted(J3, b, side="left")
        counts = ib - ia
        kmax = int(counts.max()) if len(counts) else 0
        bp = np.repeat(b[:, None], kmax + 2, axis=1)
        bp[:, 0] = a
        for k in range(kmax):
            has = counts > k
            bp[has, k + 1] = J3[ia[has] + k]
        left, right = bp[:, :-1], bp[:, 1:]
        half = 0.5 * (right - left)
        mid = 0.5 * (right + left)
        nodes = mid[..., None] + half[..., None] * xg
        w = half[..., None] * wg * kernel(sc[:, None, None] - nodes)
        vals = f(np.mod(nodes, L))
        if not np.all(np.isfinite(vals)):
            raise NonIntegrableData(f"{f.name}: non-finite boundary values inside the mollification window")
        out[lo:lo + chunk] = np.sum(w * vals, axis=(1, 2)) / np.sum(w, axis=(1, 2))
    return out


def mollify(f, kernel):
    """Periodic arc-length convolution of bounded-domain data with ``kernel``.

    ``kernel`` may be a :class:`MollificationKernel` or a radius.  The result is
    continuous, depends on ``f`` only within distance ``kernel.radius`` and is a
    convex combination of values of ``f`` there.
    """
    if isinstance(f.domain, UnboundedDomain):
        raise TypeError("mollification is defined on bounded boundaries")
    if not isinstance(kernel, MollificationKernel):
        kernel = MollificationKernel(float(kernel))
    if not f.integrable:
        raise NonIntegrableData(f"{f.name} is not locally integrable")
    probe = f(np.linspace(0, f.domain.perimeter, 257)[:-1])
    if not np.all(np.isfinite(probe)):
        raise NonIntegrableData(f"{f.name} takes non-finite values")

    def g(s):
        return _convolve(f, kernel, s)

    out = BoundaryFunction(f.domain, g, (), tag="C0", name=f"{f.name}*rho[{kernel.eps:.3g}]", sup=f.sup)
    out.kernel = kernel
    out.parent = f
    return out


# -- truncation ----------------------------------------------------------------

def _ramp_params(domain, M):
    """Arc-length parameters where the true-boundary part of a truncated domain
    first and last reaches depth ``M``."""
    v = domain.vertices
    depth = domain.halfplane.depth(v)
    ncurve = int(np.count_nonzero(~np.isnan(domain.source)))
    dc = depth[:ncurve]
    sc = domain.cum[:ncurve]
    inside = np.nonzero(dc <= M)[0]
    if len(inside) == 0:
        return None
    i0, i1 = inside[0], inside[-1]

    def cross(i, j):
        if i < 0 or j >= ncurve:
            return sc[max(min(i, j), 0)]
        t = (dc[i] - M) / (dc[i] - dc[j]) if dc[i] != dc[j] else 0.0
        return sc[i] + t * (sc[j] - sc[i])

    return cross(i0 - 1, i0), cross(i1, i1 + 1)


def extend_truncated(f, h, M, domain=None, cap_values=None):
    """Data on ``truncate(f.domain, h, M)`` built from data on an unbounded domain.

    Without ``cap_values`` the extension equals ``f`` on the depth-``M`` slab,
    vanishes on the cap and beyond depth ``M + 1``, and interpolates linearly in
    arc length in between, so values stay within ``[-|f|, |f|]``.

    ``cap_values(points)`` replaces the ramp: ``f`` is kept on the whole true
    boundary and the cap receives the supplied values (used for steering).
    """
    from .geometry import truncate

    if not isinstance(f.domain, UnboundedDomain):
        raise TypeError("extend_truncated expects data on an unbounded domain")
    if domain is None:
        domain = truncate(f.domain, h, M)
    if not isinstance(domain, TruncatedDomain):
        raise TypeError("domain must come from truncate()")
    s_lo, s_hi = _ramp_params(domain, M) or (0.0, 0.0)
    cap_start = domain.cap_start

    def weight(s):
        w = np.ones_like(s)
        if s_lo > 0:
            w = np.where(s < s_lo, s / s_lo, w)
        if cap_start > s_hi:
            w = np.where(s > s_hi, (cap_start - s) / (cap_start - s_hi), w)
        return np.clip(w, 0.0, 1.0)

    def g(s):
        s = np.mod(np.asarray(s, float), domain.perimeter)
        p = domain.point_at(s)
        cap = domain.on_cap(s)
        val = np.zeros(s.shape)
        true_part = ~cap
        if np.any(true_part):
            raw = f.at_points(p[true_part])
            if cap_values is None:
                raw = raw * weight(s[true_part])
            val[true_part] = raw
        if cap_values is not None and np.any(cap):
            val[cap] = cap_values(p[cap])
        return val

    out = BoundaryFunction(domain, g, (), tag="C0", name=f"{f.name}|ext(M={M:g})", sup=f.sup)
    out.ramp = (s_lo, s_hi)
    out.parent = f
    return out


# -- fat Cantor data -----------------------------------------------------------

def fat_cantor_intervals(measure_kept, depth):
    """Kept intervals (in [0, 1]) after ``depth`` steps of the Smith-Volterra-Cantor
    construction whose limit has measure ``measure_kept``."""
    if not 0 < measure_kept < 1:
        raise ValueError("measure_kept must lie in (0, 1)")
    if not 0 <= depth <= 24:
        raise ValueError("depth must lie in [0, 24]")
    iv = np.array([[0.0, 1.0]])
    for n in range(1, depth + 1):
        gap = 2.0 * (1.0 - measure_kept) * 4.0**-n
        mid = 0.5 * (iv[:, 0] + iv[:, 1])
        left = np.stack([iv[:, 0], mid - gap / 2], axis=1)
        right = np.stack([mid + gap / 2, iv[:, 1]], axis=1)
        iv = np.stack([left, right], axis=1).reshape(-1, 2)
    return iv


def fat_cantor_indicator(domain, measure_kept=0.5, depth=8, arc=None):
    """Indicator of a depth-``depth`` fat Cantor approximation mapped onto an arc.

    ``arc = (s0, length)`` defaults to the half boundary starting at ``L/4``.
    """
    L = domain.perimeter
    s0, length = arc if arc is not None else (0.25 * L, 0.5 * L)
    iv = s0 + length * fat_cantor_intervals(measure_kept, depth)
    edges = iv.ravel()

    def g(s):
        x = np.mod(np.asarray(s, float) - s0, L) + s0
        k = np.searchsorted(edges, x, side="right")
        return (k % 2 == 1).astype(float)

    jumps = [Jump(float(np.mod(a, L)), 0.0, 1.0) for a in iv[:, 0]]
    jumps += [Jump(float(np.mod(b, L)), 1.0, 0.0) for b in iv[:, 1]]
    out = BoundaryFunction(domain, g, jumps, tag="Pathological", name=f"cantor({measure_kept:g},{depth})",
                           sup=1.0, pathological_measure=measure_kept * length)
    out.intervals = iv
    out.kept_measure = float(np.sum(iv[:, 1] - iv[:, 0]))
    out.arc = (s0, length)
    return out
