"""Axisymmetric example in the unit ball of R^3.

Boundary data is ``1`` on the two polar caps ``|z| > a`` and ``-1`` on the band
``|z| < a``.  The minimiser is decided by comparing the two flat discs cut out
by the planes ``z = +-a`` with the catenoid spanning the two boundary circles.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from .exceptions import NoSignChange

__all__ = [
    "CatenoidInstance",
    "NoCatenoid",
    "CatenoidArea",
    "DiscJump",
    "CatenoidRegion",
    "Critical",
    "disc_area",
    "catenoid_roots",
    "catenoid_area",
    "catenoid_area_quadrature",
    "area_gap",
    "classify_regime",
    "find_critical",
    "minimiser",
]

CRITICAL_TOL = 1e-9


def _check(a):
    a = float(a)
    if not 0.0 < a < 1.0:
        raise ValueError(f"plane offset must lie in (0, 1), got {a}")
    return a


def disc_area(a):
    """Total area of the two discs ``{z = +-a}`` inside the unit ball."""
    a = _check(a)
    return 2.0 * math.pi * (1.0 - a * a)


# neck parameter: a / c at which c cosh(a/c) is smallest (x tanh x = 1)
_X_NECK = brentq(lambda x: x * math.tanh(x) - 1.0, 0.5, 2.0, xtol=1e-15)


@dataclass(frozen=True)
class CatenoidInstance:
    """Plane offset ``a``, circle radius ``r`` and the catenary parameters solving
    ``c cosh(a/c) = r`` in increasing order."""

    a: float
    r: float
    roots: tuple

    def residual(self, c):
        return abs(c * math.cosh(self.a / c) - self.r)


@dataclass(frozen=True)
class NoCatenoid:
    a: float


@dataclass(frozen=True)
class CatenoidArea:
    value: float
    c: float
    which_root: str
    other_value: float = None


def catenoid_roots(a):
    """Both solutions ``c`` of ``c cosh(a/c) = sqrt(1 - a^2)`` (empty if none)."""
    a = _check(a)
    r = math.sqrt(1.0 - a * a)

    def g(c):
        return c * math.cosh(a / c) - r

    c_neck = a / _X_NECK
    if g(c_neck) > 0:
        return CatenoidInstance(a, r, ())
    if g(c_neck) == 0:
        return CatenoidInstance(a, r, (c_neck,))
    hi = max(2.0 * r, 2.0 * c_neck)
    c_wide = brentq(g, c_neck, hi, xtol=1e-16, rtol=4 * np.finfo(float).eps, maxiter=500)
    lo = c_neck
    while g(lo) < 0:
        lo /= 2.0
    c_thin = brentq(g, lo, c_neck, xtol=1e-16, rtol=4 * np.finfo(float).eps, maxiter=500)
    return CatenoidInstance(a, r, (c_thin, c_wide))


def _area_closed(a, c):
    return math.pi * c * (2.0 * a + c * math.sinh(2.0 * a / c))


def catenoid_area_quadrature(a, c):
    """``2 pi int_{-a}^{a} y sqrt(1 + y'^2) dz`` for ``y = c cosh(z/c)`` by adaptive quadrature."""
    def integrand(z):
        y = c * math.cosh(z / c)
        dy = math.sinh(z / c)
        return y * math.sqrt(1.0 + dy * dy)

    val, _ = quad(integrand, -a, a, epsabs=0.0, epsrel=1e-13, limit=200)
    return 2.0 * math.pi * val


def catenoid_area(a):
    """Area of the stable (smaller-area) catenoid spanning the two circles, or
    :class:`NoCatenoid` when the circles are too far apart."""
    inst = catenoid_roots(a)
    if not inst.roots:
        return NoCatenoid(inst.a)
    areas = [_area_closed(inst.a, c) for c in inst.roots]
    k = int(np.argmin(areas))
    which = "wide" if inst.roots[k] == max(inst.roots) else "thin"
    other = areas[1 - k] if len(areas) == 2 else None
    return CatenoidArea(areas[k], inst.roots[k], which, other)


def area_gap(a):
    """``disc_area(a) - catenoid_area(a)``; ``nan`` when no catenoid exists."""
    cat = catenoid_area(a)
    if isinstance(cat, NoCatenoid):
        return float("nan")
    return disc_area(a) - cat.value


@dataclass(frozen=True)
class DiscJump:
    a: float
    formula: str = "disc-jump"


@dataclass(frozen=True)
class CatenoidRegion:
    a: float
    c: float
    formula: str = "catenoid-plateau"


@dataclass(frozen=True)
class Critical:
    a: float
    c: float
    lam: tuple = (-1.0, 1.0)
    formula: str = "lambda-family"


def classify_regime(a, tol=CRITICAL_TOL):
    """Which competitor minimises area at offset ``a``."""
    a = _check(a)
    cat = catenoid_area(a)
    if isinstance(cat, NoCatenoid):
        return DiscJump(a)
    gap = disc_area(a) - cat.value
    if abs(gap) <= tol:
        return Critical(a, cat.c)
    if gap < 0:
        return DiscJump(a)
    return CatenoidRegion(a, cat.c)


def _existence_limit():
    # largest a with a catenoid: sqrt(1 - a^2) = a cosh(x)/x at the neck
    k = math.cosh(_X_NECK) / _X_NECK
    return 1.0 / math.sqrt(1.0 + k * k)


def find_critical(tol=1e-10, n_scan=200, log=None):
    """Offset ``a*`` where the discs and the catenoid have equal area.

    Scans ``(0, a_max)`` for a sign change of :func:`area_gap`, then bisects
    until ``|gap| <= tol``.
    """
    a_max = _existence_limit() * (1.0 - 1e-12)
    grid = np.linspace(a_max / n_scan, a_max, n_scan)
    gaps = np.array([area_gap(a) for a in grid])
    sign = np.sign(gaps)
    flips = np.nonzero(sign[:-1] * sign[1:] < 0)[0]
    if len(flips) == 0:
        raise NoSignChange("disc and catenoid areas never cross on the scanned bracket")
    lo, hi = float(grid[flips[0]]), float(grid[flips[0] + 1])
    g_lo = area_gap(lo)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        g_mid = area_gap(mid)
        if log is not None:
            log.append((mid, g_mid))
        if abs(g_mid) <= tol:
            break
        if (g_mid > 0) == (g_lo > 0):
            lo, g_lo = mid, g_mid
        else:
            hi = mid
    else:
        raise NoSignChange("bisection did not reach the requested tolerance")
    return mid


def minimiser(a, points, lam=None):
    """Evaluate the minimiser at points ``(..., 3)`` in the unit ball.

    In the critical regime ``lam`` picks the value inside the catenoid.
    """
    reg = classify_regime(a)
    p = np.asarray(points, float)
    z = p[..., 2]
    rho = np.hypot(p[..., 0], p[..., 1])
    out = np.where(np.abs(z) > a, 1.0, -1.0)
    if isinstance(reg, DiscJump):
        return out
    inside = (np.abs(z) < a) & (rho < reg.c * np.cosh(z / reg.c))
    fill = 1.0 if isinstance(reg, CatenoidRegion) else (0.0 if lam is None else float(lam))
    return np.where(inside, fill, out)
