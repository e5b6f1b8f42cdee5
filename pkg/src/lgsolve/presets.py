"""Named domains and boundary data used by scenarios, the CLI and the tests."""
from __future__ import annotations

import csv
import math
import re

import numpy as np

from .boundary import BoundaryFunction, Jump, _bump, _bump_mass, fat_cantor_indicator
from .geometry import Domain, UnboundedDomain, disc, ellipse, polygon_domain

__all__ = [
    "make_domain",
    "make_data",
    "strip_exp",
    "hyperbola",
    "cusp_cubic",
    "brothers",
    "cos_theta",
    "staircase",
    "two_plateaus",
    "random_trig",
    "constant",
    "bump_train",
    "exp_decay",
    "monotone_y",
    "single_bump",
    "two_bumps",
    "inverse_square",
    "mollifier",
    "DOMAIN_NAMES",
    "DATA_NAMES",
]


def mollifier(x):
    """Standard unit-mass mollifier supported in ``(-1, 1)``."""
    return _bump(x) / _bump_mass()


# -- unbounded domains ---------------------------------------------------------------

def strip_exp():
    """``{x > 0, e^-x - 1 <= y <= 1 - e^-x}``: a horn with a right-angle corner at the origin."""

    def curve(tau):
        tau = np.asarray(tau, float)
        x = np.abs(tau)
        y = np.where(tau < 0, 1.0 - np.exp(-x), np.exp(-x) - 1.0)
        return np.stack([x, y], axis=-1)

    def indicator(p):
        p = np.asarray(p, float)
        x, y = p[..., 0], p[..., 1]
        return np.maximum(np.abs(y) - (1.0 - np.exp(-np.maximum(x, 0.0))), -x)

    return UnboundedDomain(curve, indicator, "strip_exp", breakpoints=(0.0,), far=60.0, strip_width=2.0)


def hyperbola():
    """``{x > 0, y > 0, xy > 1}``."""

    def curve(tau):
        tau = np.asarray(tau, float)
        return np.stack([np.exp(tau), np.exp(-tau)], axis=-1)

    def indicator(p):
        p = np.asarray(p, float)
        x, y = p[..., 0], p[..., 1]
        return np.maximum(1.0 - x * y, -np.minimum(x, y))

    return UnboundedDomain(curve, indicator, "hyperbola", far=20.0)


def cusp_cubic(allow_nonconvex=False):
    """``{x > 0, |y| <= x^3}``; not convex, accepted only with the escape hatch."""

    def curve(tau):
        tau = np.asarray(tau, float)
        x = np.abs(tau)
        return np.stack([x, np.where(tau < 0, x**3, -x**3)], axis=-1)

    def indicator(p):
        p = np.asarray(p, float)
        x, y = p[..., 0], p[..., 1]
        return np.maximum(np.abs(y) - np.maximum(x, 0.0) ** 3, -x)

    return UnboundedDomain(curve, indicator, "cusp_cubic", breakpoints=(0.0,), far=10.0,
                           allow_nonconvex=allow_nonconvex)


# -- bounded data ----------------------------------------------------------------------

def _jumps_at(domain, J, f):
    d = 1e-9 * domain.perimeter
    return [Jump(float(j), float(f(np.array([j - d]))[0]), float(f(np.array([j + d]))[0])) for j in J]


def _sector_data(domain, J, pieces, name, **kw):
    J = np.sort(np.asarray(J, float))

    def f(s):
        s = np.mod(np.asarray(s, float), domain.perimeter)
        p = domain.point_at(s)
        k = np.searchsorted(J, s, side="right") % len(J)
        out = np.zeros(s.shape)
        for idx, g in enumerate(pieces):
            sel = (k % len(pieces)) == idx
            if np.any(sel):
                out[sel] = g(p[sel])
        return out

    return BoundaryFunction(domain, f, _jumps_at(domain, J, f), name=name, **kw)


def brothers(domain):
    """``x^2 - y^2 + 1`` where ``|x| > 1/sqrt 2`` and ``x^2 - y^2 - 1`` elsewhere on the unit circle."""
    diag = np.array([[1, 1], [-1, 1], [-1, -1], [1, -1]]) / math.sqrt(2)
    s, dist = domain.param_of(diag, return_distance=True)
    if np.any(dist > 1e-6):
        raise ValueError("brothers data is defined on the unit disc")
    xb = lambda p: p[:, 0] ** 2 - p[:, 1] ** 2 + 1.0
    yb = lambda p: p[:, 0] ** 2 - p[:, 1] ** 2 - 1.0
    return _sector_data(domain, s, [xb, yb], "brothers", sup=2.0)


def two_plateaus(domain):
    """Indicator of ``|x| > |y|`` on the unit circle: two symmetric plateaus of height 1."""
    diag = np.array([[1, 1], [-1, 1], [-1, -1], [1, -1]]) / math.sqrt(2)
    s = domain.param_of(diag)
    one = lambda p: np.ones(len(p))
    zero = lambda p: np.zeros(len(p))
    return _sector_data(domain, s, [one, zero], "two_plateaus", sup=1.0)


def cos_theta(domain):
    def f(s):
        p = domain.point_at(s)
        return np.cos(np.arctan2(p[..., 1], p[..., 0]))

    return BoundaryFunction(domain, f, name="cos_theta", sup=1.0)


def constant(domain, c=0.0):
    return BoundaryFunction(domain, lambda s: np.full(np.shape(s), float(c)), name=f"constant({c:g})", sup=abs(c))


def staircase(domain, n_jumps=10, offset=0.37):
    """Piecewise constant data with ``n_jumps`` jumps: plateau ``k`` has value ``k / (n - 1)``."""
    L = domain.perimeter
    J = (np.arange(n_jumps) + offset) * L / n_jumps

    def f(s):
        s = np.mod(np.asarray(s, float), L)
        k = (np.searchsorted(J, s, side="right") - 1) % n_jumps
        return k / (n_jumps - 1.0)

    out = BoundaryFunction(domain, f, _jumps_at(domain, J, f), tag="BV", name=f"staircase({n_jumps})", sup=1.0)
    return out


def random_trig(domain, seed=0, modes=4, amplitude=1.0):
    """Random trigonometric polynomial in the boundary angle (continuous data)."""
    rng = np.random.default_rng(seed)
    a = rng.normal(size=modes) / (1 + np.arange(modes))
    b = rng.normal(size=modes) / (1 + np.arange(modes))
    c0 = rng.normal() * 0.2
    k = np.arange(1, modes + 1)

    def f(s):
        p = domain.point_at(s)
        th = np.arctan2(p[..., 1], p[..., 0])[..., None]
        return amplitude * (c0 + np.sum(a * np.cos(k * th) + b * np.sin(k * th), axis=-1))

    return BoundaryFunction(domain, f, name=f"random_trig(seed={seed})")


def cantor(domain, measure_kept=0.5, depth=8):
    return fat_cantor_indicator(domain, measure_kept, depth)


# -- unbounded data --------------------------------------------------------------------

def bump_train(domain, n_max=None):
    """``sum_n (1/n) rho(x - n^2)`` with ``rho`` the standard mollifier."""

    def f(p):
        x = np.asarray(p, float)[..., 0]
        out = np.zeros(x.shape)
        n_hi = int(math.isqrt(int(max(np.max(x), 0.0) + 1)) + 2) if x.size else 1
        if n_max is not None:
            n_hi = min(n_hi, n_max)
        for n in range(1, n_hi + 1):
            out += mollifier(x - n * n) / n
        return out

    return BoundaryFunction(domain, f, name="bump_train", tag="C0", decays=True, integrable=False,
                            sup=float(mollifier(np.array(0.0))))


def exp_decay(domain):
    """``e^{-x}``."""
    return BoundaryFunction(domain, lambda p: np.exp(-np.asarray(p, float)[..., 0]), name="exp_decay", sup=1.0,
                            integrable=False)


def monotone_y(domain):
    """``f(x, y) = y``."""
    return BoundaryFunction(domain, lambda p: np.asarray(p, float)[..., 1], name="monotone_y", sup=1.0,
                            integrable=False)


def single_bump(domain, centre=1.0, height=1.0, width=0.9):
    """``height * rho((x - centre)/width) / rho(0)``: compactly supported in ``x``."""
    peak = float(mollifier(np.array(0.0)))

    def f(p):
        x = np.asarray(p, float)[..., 0]
        return height * mollifier((x - centre) / width) / peak

    return BoundaryFunction(domain, f, name=f"bump({centre:g})", support_depth=centre + width, sup=height)


def two_bumps(domain):
    """Bumps of heights 1 and 1/2 centred at depths 1 and 20."""
    b1 = single_bump(domain, 1.0, 1.0)
    b2 = single_bump(domain, 20.0, 0.5)
    return BoundaryFunction(domain, lambda p: b1.func(p) + b2.func(p), name="two_bumps", support_depth=20.9, sup=1.0)


def inverse_square(domain):
    """``1 / (x + 1)^2``."""
    return BoundaryFunction(domain, lambda p: 1.0 / (np.asarray(p, float)[..., 0] + 1.0) ** 2,
                            name="inverse_square", decays=True, sup=1.0)


# -- name parsing -----------------------------------------------------------------------

DOMAIN_NAMES = ("disc", "ellipse(a,b)", "strip_exp", "cusp_cubic", "hyperbola", "csv:<path>")
DATA_NAMES = ("brothers", "cantor(p,depth)", "cos_theta", "exp_decay", "bump_train", "staircase(n)",
              "constant(c)", "two_plateaus", "random_trig(seed)", "monotone_y", "bump(x0)", "two_bumps",
              "inverse_square")


def _args(spec):
    m = re.fullmatch(r"\s*([A-Za-z_]+)\s*(?:\((.*)\))?\s*", spec)
    if not m:
        raise ValueError(f"cannot parse {spec!r}")
    name, inner = m.group(1), m.group(2)
    args = [float(a) for a in inner.split(",")] if inner else []
    return name, args


def make_domain(spec, allow_nonconvex=False, n=None):
    """Domain from a preset name, e.g. ``disc``, ``ellipse(2,1)``, ``csv:path.csv``."""
    if spec.startswith("csv:"):
        with open(spec[4:], newline="") as fh:
            rows = [r for r in csv.reader(fh) if r and not r[0].strip().startswith("#")]
        try:
            float(rows[0][0])
        except ValueError:
            rows = rows[1:]
        verts = np.array([[float(r[0]), float(r[1])] for r in rows])
        return polygon_domain(verts, name=spec, allow_nonconvex=allow_nonconvex)
    name, args = _args(spec)
    if name == "disc":
        return disc(n or 4096, *(args[:1] or [1.0]))
    if name == "ellipse":
        return ellipse(*args[:2], n=n or 4096)
    if name == "strip_exp":
        return strip_exp()
    if name == "hyperbola":
        return hyperbola()
    if name == "cusp_cubic":
        return cusp_cubic(allow_nonconvex)
    raise ValueError(f"unknown domain {spec!r}; known: {', '.join(DOMAIN_NAMES)}")


def make_data(spec, domain):
    """Boundary data from a preset name on ``domain``."""
    name, args = _args(spec)
    bounded = isinstance(domain, Domain)
    table_b = {
        "brothers": lambda: brothers(domain),
        "cantor": lambda: cantor(domain, args[0] if args else 0.5, int(args[1]) if len(args) > 1 else 8),
        "cos_theta": lambda: cos_theta(domain),
        "staircase": lambda: staircase(domain, int(args[0]) if args else 10),
        "constant": lambda: constant(domain, args[0] if args else 0.0),
        "two_plateaus": lambda: two_plateaus(domain),
        "random_trig": lambda: random_trig(domain, int(args[0]) if args else 0),
    }
    table_u = {
        "bump_train": lambda: bump_train(domain),
        "exp_decay": lambda: exp_decay(domain),
        "monotone_y": lambda: monotone_y(domain),
        "bump": lambda: single_bump(domain, args[0] if args else 1.0),
        "two_bumps": lambda: two_bumps(domain),
        "inverse_square": lambda: inverse_square(domain),
        "constant": lambda: BoundaryFunction(domain, lambda p: np.full(np.shape(p)[:-1], args[0] if args else 0.0),
                                             name="constant", support_depth=None if args and args[0] else 0.0,
                                             sup=abs(args[0]) if args else 0.0),
    }
    table = table_b if bounded else table_u
    if name not in table:
        raise ValueError(f"data {spec!r} is not available on {'bounded' if bounded else 'unbounded'} domains")
    return table[name]()
