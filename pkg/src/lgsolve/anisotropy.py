"""Planar norms, their polars, ellipticity constants and strict-convexity checks.

A :class:`Norm2D` also knows its Wulff shape (the unit ball of the polar norm)
well enough to project onto it, which the grid oracle uses as the dual
constraint.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import DegenerateChord

__all__ = [
    "Norm2D",
    "StrictlyConvexBall",
    "NotStrict",
    "l2",
    "l1",
    "linf",
    "lp",
    "poly",
    "norm_sum",
    "scaled",
    "certify_strict_ball",
    "regularized_sequence",
    "chord_cost",
    "parse_norm",
]

N_DIRECTIONS = 4096
STRICT_MARGIN = 1e-9
_GOLD = (math.sqrt(5) - 1) / 2


@dataclass(frozen=True)
class StrictlyConvexBall:
    margin: float
    strict = True


@dataclass(frozen=True)
class NotStrict:
    witness: tuple
    margin: float
    strict = False


def _unit(theta):
    return np.stack([np.cos(theta), np.sin(theta)], axis=-1)


class Norm2D:
    """A norm on the plane.

    Parameters
    ----------
    func : callable
        Vectorised evaluator ``func(xi) -> phi(xi)`` over the last axis.
    name : str
    wulff : dict, optional
        Minkowski description of the polar unit ball, ``{"disc": r, "box": a,
        "diamond": c}``; used for closed-form projections.
    """

    def __init__(self, func, name, wulff=None):
        self._func = func
        self.name = name
        self.wulff = dict(wulff) if wulff else None
        self._cache = {}

    def __call__(self, xi):
        return self._func(np.asarray(xi, float))

    def __repr__(self):
        return f"Norm2D({self.name})"

    # -- constants -------------------------------------------------------------
    @property
    def ellipticity(self):
        """``(lambda, Lambda)`` with ``lambda |xi| <= phi(xi) <= Lambda |xi|`` on sampled directions."""
        if "ell" not in self._cache:
            vals = self(_unit(2 * np.pi * np.arange(N_DIRECTIONS) / N_DIRECTIONS))
            self._cache["ell"] = (float(vals.min()), float(vals.max()))
        return self._cache["ell"]

    @property
    def certificate(self):
        if "cert" not in self._cache:
            self._cache["cert"] = certify_strict_ball(self)
        return self._cache["cert"]

    @property
    def is_strict(self):
        return self.certificate.strict

    # -- polar -------------------------------------------------------------------
    def unit_sphere(self, n=N_DIRECTIONS):
        theta = 2 * np.pi * np.arange(n) / n
        u = _unit(theta)
        return theta, u / self(u)[:, None]

    def polar_value(self, eta, refine=True):
        """``phi0(eta) = sup{<eta, xi> : phi(xi) <= 1}`` by sampling plus golden-section refinement."""
        eta = np.asarray(eta, float)
        shape = eta.shape[:-1]
        e = eta.reshape(-1, 2)
        theta, b = self.unit_sphere()
        dots = e @ b.T
        k = np.argmax(dots, axis=1)
        best = dots[np.arange(len(e)), k]
        if refine:
            d = 2 * np.pi / len(theta)
            lo, hi = theta[k] - d, theta[k] + d

            def val(t):
                u = _unit(t)
                return np.sum(e * u, axis=1) / self(u)

            x1 = hi - _GOLD * (hi - lo)
            x2 = lo + _GOLD * (hi - lo)
            f1, f2 = val(x1), val(x2)
            for _ in range(60):
                left = f1 > f2
                hi = np.where(left, x2, hi)
                lo = np.where(left, lo, x1)
                fresh = np.where(left, hi - _GOLD * (hi - lo), lo + _GOLD * (hi - lo))
                ff = val(fresh)
                x1, x2 = np.where(left, fresh, x2), np.where(left, x1, fresh)
                f1, f2 = np.where(left, ff, f2), np.where(left, f1, ff)
            best = np.maximum(best, np.maximum(f1, f2))
        return best.reshape(shape)

    def polar(self):
        """The polar norm as a new :class:`Norm2D` (sampled construction)."""
        if "polar" not in self._cache:
            self._cache["polar"] = Norm2D(self.polar_value, f"polar({self.name})")
        return self._cache["polar"]

    # -- projection onto the polar unit ball --------------------------------------
    def project_polar_ball(self, px, py):
        """Euclidean projection of the vector field ``(px, py)`` onto ``{phi0 <= 1}``."""
        w = self.wulff or {}
        kinds = {k for k, v in w.items() if v}
        if kinds == {"disc"}:
            r = w["disc"]
            nrm = np.maximum(np.hypot(px, py) / r, 1.0)
            return px / nrm, py / nrm
        if kinds == {"box"}:
            a = w["box"]
            return np.clip(px, -a, a), np.clip(py, -a, a)
        if kinds == {"diamond"}:
            return _project_l1_ball(px, py, w["diamond"])
        if kinds == {"box", "disc"}:
            a, r = w["box"], w["disc"]
            cx, cy = np.clip(px, -a, a), np.clip(py, -a, a)
            rx, ry = px - cx, py - cy
            nrm = np.maximum(np.hypot(rx, ry) / r, 1.0)
            return cx + rx / nrm, cy + ry / nrm
        return self._project_polygon(px, py)

    def _project_polygon(self, px, py, n=256):
        if "wulff_poly" not in self._cache:
            theta = 2 * np.pi * np.arange(n) / n
            u = _unit(theta)
            r = 1.0 / self.polar_value(u)
            self._cache["wulff_poly"] = u * r[:, None]
        V = self._cache["wulff_poly"]
        E = np.roll(V, -1, axis=0) - V
        p = np.stack([px, py], axis=-1)
        shp = p.shape
        p = p.reshape(-1, 2)
        inside = np.all(E[None, :, 0] * (p[:, None, 1] - V[None, :, 1])
                        - E[None, :, 1] * (p[:, None, 0] - V[None, :, 0]) >= 0, axis=1)
        out = p.copy()
        q = p[~inside]
        if len(q):
            rel = q[:, None, :] - V[None]
            t = np.clip(np.sum(rel * E[None], axis=-1) / np.sum(E * E, axis=-1), 0, 1)
            proj = V[None] + t[..., None] * E[None]
            d2 = np.sum((q[:, None, :] - proj) ** 2, axis=-1)
            k = np.argmin(d2, axis=1)
            out[~inside] = proj[np.arange(len(q)), k]
        out = out.reshape(shp)
        return out[..., 0], out[..., 1]


def _project_l1_ball(px, py, c):
    """Projection onto ``{|x| + |y| <= c}`` (closed form in two dimensions)."""
    ax, ay = np.abs(px), np.abs(py)
    outside = ax + ay > c
    # distance to the face x + y = c in the first quadrant
    shift = 0.5 * (ax + ay - c)
    qx = np.clip(ax - shift, 0.0, c)
    qy = c - qx
    qx = np.where(outside, qx, ax)
    qy = np.where(outside, qy, ay)
    return np.sign(px) * qx, np.sign(py) * qy


# -- presets ----------------------------------------------------------------------

def l2():
    return Norm2D(lambda x: np.hypot(x[..., 0], x[..., 1]), "l2", {"disc": 1.0})


def l1():
    return Norm2D(lambda x: np.abs(x[..., 0]) + np.abs(x[..., 1]), "l1", {"box": 1.0})


def linf():
    return Norm2D(lambda x: np.maximum(np.abs(x[..., 0]), np.abs(x[..., 1])), "linf", {"diamond": 1.0})


def lp(p):
    p = float(p)
    if p < 1:
        raise ValueError("lp needs p >= 1")
    if p == 1:
        return l1()
    if p == 2:
        return l2()
    if math.isinf(p):
        return linf()

    def f(x):
        ax, ay = np.abs(x[..., 0]), np.abs(x[..., 1])
        m = np.maximum(ax, ay)
        safe = np.where(m > 0, m, 1.0)
        return np.where(m > 0, m * ((ax / safe) ** p + (ay / safe) ** p) ** (1 / p), 0.0)

    return Norm2D(f, f"lp({p:g})")


def poly(vertices):
    """Gauge of a centrally symmetric convex polygon containing the origin."""
    V = np.asarray(vertices, float).reshape(-1, 2)
    if 0.5 * np.sum(V[:, 0] * np.roll(V[:, 1], -1) - V[:, 1] * np.roll(V[:, 0], -1)) < 0:
        V = V[::-1]
    E = np.roll(V, -1, axis=0) - V
    nrm = np.stack([E[:, 1], -E[:, 0]], axis=1)
    c = np.sum(nrm * V, axis=1)
    if np.any(c <= 0):
        raise ValueError("polygon must contain the origin in its interior")
    A = nrm / c[:, None]

    def f(x):
        return np.max(np.tensordot(x, A.T, axes=1), axis=-1)

    label = ",".join(f"{a:g}" for a in V.ravel())
    return Norm2D(f, f"poly({label})")


def _merge_wulff(a, wa, b, wb):
    if wa is None or wb is None:
        return None
    out = {}
    for k in set(wa) | set(wb):
        out[k] = a * wa.get(k, 0.0) + b * wb.get(k, 0.0)
    return out


def norm_sum(a, n1, b, n2):
    """``a * n1 + b * n2`` for nonnegative weights."""
    if a < 0 or b < 0 or a + b == 0:
        raise ValueError("weights must be nonnegative and not both zero")
    return Norm2D(lambda x: a * n1(x) + b * n2(x), f"sum({a:g}*{n1.name},{b:g}*{n2.name})",
                  _merge_wulff(a, n1.wulff, b, n2.wulff))


def scaled(a, n):
    return Norm2D(lambda x: a * n(x), f"{a:g}*{n.name}", _merge_wulff(a, n.wulff, 0.0, {}))


def regularized_sequence(n, k):
    """``phi + |.|/k``: a norm with strictly convex unit ball approximating ``phi``."""
    if k < 1:
        raise ValueError("k must be >= 1")
    out = norm_sum(1.0, n, 1.0 / k, l2())
    out.name = f"{n.name}+l2/{k}"
    return out


def certify_strict_ball(n, samples=512):
    """Sampled strict-convexity certificate of the unit ball of ``n``.

    The margin is the minimum over distinct sampled unit-sphere pairs of
    ``1 - phi(midpoint)``.  Below ``1e-9`` the ball is reported as not strict,
    with the widest offending pair as witness.
    """
    if samples < 64:
        raise ValueError("samples must be >= 64")
    _, b = n.unit_sphere(samples)
    i, j = np.triu_indices(samples, k=1)
    mid = 0.5 * (b[i] + b[j])
    margin = 1.0 - n(mid)
    m = float(margin.min())
    if m < STRICT_MARGIN:
        bad = np.nonzero(margin < STRICT_MARGIN)[0]
        sep = np.hypot(*(b[i[bad]] - b[j[bad]]).T)
        k = bad[int(np.nonzero(sep >= sep.max() - 1e-12)[0][0])]
        wit = (tuple(np.round(b[i[k]], 12).tolist()), tuple(np.round(b[j[k]], 12).tolist()))
        return NotStrict(wit, m)
    return StrictlyConvexBall(m)


def chord_cost(n, p, q, diam=1.0):
    """Anisotropic length ``phi(R(q - p))`` of the segment ``pq``, ``R`` the +90 degree rotation."""
    p = np.asarray(p, float)
    q = np.asarray(q, float)
    d = q - p
    length = np.hypot(d[..., 0], d[..., 1])
    if np.any(length < 1e-12 * diam):
        raise DegenerateChord(f"chord shorter than {1e-12 * diam:.3g}")
    rot = np.stack([-d[..., 1], d[..., 0]], axis=-1)
    return n(rot)


def parse_norm(spec):
    """Build a norm from a config string: ``l2``, ``l1``, ``linf``, ``lp(3)``,
    ``poly(x1,y1,...)``, ``sum(a*n1,b*n2)``, ``l1+l2/k``."""
    s = spec.strip().replace(" ", "").replace("·", "*")
    if s in ("l2", "euclidean"):
        return l2()
    if s == "l1":
        return l1()
    if s in ("linf", "l_inf"):
        return linf()
    if s.startswith("lp(") and s.endswith(")"):
        return lp(float(s[3:-1]))
    if s.startswith("poly(") and s.endswith(")"):
        return poly([float(v) for v in s[5:-1].split(",")])
    if s.startswith("sum(") and s.endswith(")"):
        inner = s[4:-1]
        depth, cut = 0, None
        for idx, ch in enumerate(inner):
            depth += ch == "("
            depth -= ch == ")"
            if ch == "," and depth == 0:
                cut = idx
                break
        if cut is None:
            raise ValueError(f"bad sum norm {spec!r}")
        terms = []
        for t in (inner[:cut], inner[cut + 1:]):
            if "*" in t:
                a, rest = t.split("*", 1)
                terms.append((float(a), parse_norm(rest)))
            else:
                terms.append((1.0, parse_norm(t)))
        return norm_sum(terms[0][0], terms[0][1], terms[1][0], terms[1][1])
    if "+l2/" in s:
        base, k = s.split("+l2/")
        return regularized_sequence(parse_norm(base), int(k))
    raise ValueError(f"unknown norm {spec!r}")
