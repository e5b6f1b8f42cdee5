"""Least gradient problems on unbounded convex domains via truncation.

The domain is cut at increasing depths ``M_n`` below a supporting halfplane,
each truncation is solved with the bounded chord solver, and the iterates are
compared on a fixed probe slab until they stop changing.  Chords reaching past
depth ``M_n`` are level lines escaping to infinity.
"""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np
import shapely

from .anisotropy import l2
from .boundary import BoundaryFunction, extend_truncated
from .chord_solver import SolutionField, solve
from .exceptions import NoConeDirections, NonIntegrableData, NoStabilization, NotC0Data, NotStripDomain
from .geometry import Halfplane, UnboundedDomain, slab_params, supporting_halfplane, truncate

log = logging.getLogger(__name__)

__all__ = [
    "TruncationSchedule",
    "ProbeSlab",
    "Escape",
    "Closed",
    "EscapeReport",
    "UnboundedResult",
    "solve_truncated",
    "solve_unbounded",
    "escape_report",
    "verify_single_escape",
    "u_shortcut_saving",
    "solve_c0_unique",
    "steer_nonunique",
    "steering_cap",
    "boundary_along",
    "slab_tv",
    "certify_strip_bv",
]


@dataclass
class TruncationSchedule:
    """Depths ``M_n = start + step * (n - 1)`` for ``n = 1..budget``."""

    halfplane: Halfplane
    offsets: tuple = None
    probe_depth: float = 5.0
    stab_tol: float = 1e-4
    probe_box: tuple = None

    def __post_init__(self):
        if self.offsets is None:
            self.offsets = tuple(5.0 * n for n in range(1, 9))
        self.offsets = tuple(float(m) for m in self.offsets)
        gaps = np.diff(self.offsets)
        if len(self.offsets) == 0 or self.offsets[0] <= 0 or np.any(gaps < 2.0):
            raise ValueError("offsets must be positive and increase by at least 2")
        if self.stab_tol <= 0 or self.probe_depth <= 0:
            raise ValueError("probe depth and stabilisation tolerance must be positive")

    @classmethod
    def default(cls, domain, base=None, step=5.0, budget=8, **kw):
        """Schedule ``M_n = step * n`` anchored at ``base`` (default: the boundary
        point closest to the origin)."""
        base = np.zeros(2) if base is None else np.asarray(base, float)
        h = supporting_halfplane(domain, base)
        return cls(h, tuple(step * n for n in range(1, budget + 1)), **kw)

    @property
    def budget(self):
        return len(self.offsets)


class ProbeSlab:
    """Midpoint grid on ``{0 < depth < probe_depth}`` (optionally clipped to a box)."""

    def __init__(self, domain, halfplane, depth, box=None, n=120):
        self.depth = float(depth)
        self.halfplane = halfplane
        tau_a, tau_b = slab_params(domain, halfplane, depth)
        pts, _ = domain.sample(tau_a, tau_b, density=32)
        region = shapely.Polygon(pts)
        if box is not None:
            region = shapely.intersection(region, shapely.box(*box))
        self.region = region
        x0, y0, x1, y1 = region.bounds
        xs = x0 + (np.arange(n) + 0.5) * (x1 - x0) / n
        ys = y0 + (np.arange(n) + 0.5) * (y1 - y0) / n
        X, Y = np.meshgrid(xs, ys)
        P = np.stack([X.ravel(), Y.ravel()], axis=-1)
        keep = domain.contains(P, closed=False) & shapely.contains_xy(region, P[:, 0], P[:, 1])
        d = halfplane.depth(P)
        keep &= (d > 0) & (d < depth)
        self.points = P[keep]
        self.cell = (x1 - x0) * (y1 - y0) / n**2
        self.area = self.cell * len(self.points)

    def l1(self, a, b):
        return float(np.sum(np.abs(a - b)) * self.cell)


@dataclass
class Closed:
    level: float
    chords: list


@dataclass
class Escape:
    level: float
    foot: tuple
    direction: tuple
    far: tuple


@dataclass
class EscapeReport:
    """Per-level classification of chords; ``M`` is the depth past which a chord escapes."""

    levels: list
    escapes: list
    closed: list
    halfplane: Halfplane = None
    M: float = None

    @property
    def counts(self):
        return [len(e) for e in self.escapes]

    def to_dict(self):
        return {
            "M": self.M,
            "levels": [float(t) for t in self.levels],
            "escape_counts": self.counts,
            "escapes": [[{"foot": list(e.foot), "direction": list(e.direction)} for e in es] for es in self.escapes],
            "closed_chords": [len(c.chords) for c in self.closed],
        }


@dataclass
class UnboundedResult:
    field: SolutionField
    schedule: TruncationSchedule
    probe: ProbeSlab
    increments: list
    iterates: int
    stabilized: bool
    escape: EscapeReport
    level_range: tuple
    wall_clock: float = 0.0
    certificate: dict = field(default_factory=dict)
    history: list = field(default_factory=list)

    def __call__(self, points):
        return self.field(points)

    predict = __call__

    @property
    def M(self):
        return self.field.domain.M


# -- truncated solves -----------------------------------------------------------------

def _data_range(f, h, M, cap_values=None):
    d = f.domain
    tau_a, tau_b = slab_params(d, h, M + 1.0)
    taus = np.linspace(tau_a, tau_b, 20001)
    v = f.at_points(d.curve(taus))
    lo, hi = float(np.min(v)), float(np.max(v))
    if cap_values is None:
        lo, hi = min(lo, 0.0), max(hi, 0.0)
    return lo, hi


def solve_truncated(d, f, h, M, norm=None, K=200, cap_values=None, seed=0, level_range=None, **kw):
    """Solve on ``truncate(d, h, M)`` with extended data; returns the field."""
    T = truncate(d, h, M)
    g = extend_truncated(f, h, M, domain=T, cap_values=cap_values)
    return solve(T, g, norm, K=K, seed=seed, level_range=level_range, **kw)


def solve_unbounded(d, f, norm=None, sched=None, K=200, cap_values=None, seed=0, on_exhaust="raise",
                    min_iterates=3, **kw):
    """Truncation loop with probe-slab stabilisation.

    Iterates stop once two consecutive L1 increments on the probe slab fall
    below ``stab_tol * |probe|``.  The level grid is shared by all iterates.

    Raises :class:`NoStabilization` (carrying the last result) when the schedule
    is exhausted, unless ``on_exhaust="return"``.
    """
    if not isinstance(d, UnboundedDomain):
        raise TypeError("solve_unbounded expects an UnboundedDomain")
    if f.domain is not d:
        raise ValueError("data lives on a different domain")
    norm = l2() if norm is None else norm
    sched = TruncationSchedule.default(d) if sched is None else sched
    t0 = time.perf_counter()
    h = sched.halfplane
    probe = ProbeSlab(d, h, sched.probe_depth, sched.probe_box)
    rng = _data_range(f, h, sched.offsets[-1], cap_values)
    prev = None
    increments = []
    history = []
    last = None
    stable = False
    for n, M in enumerate(sched.offsets, start=1):
        fld = solve_truncated(d, f, h, M, norm, K, cap_values, seed, level_range=rng, **kw)
        vals = np.nan_to_num(fld(probe.points))
        if prev is not None:
            increments.append(probe.l1(vals, prev))
            log.info("truncation M=%g: probe L1 increment %.3g", M, increments[-1])
        history.append({"M": M, "tv": fld.total_variation(),
                        "increment": increments[-1] if prev is not None else None})
        prev = vals
        last = fld
        thr = sched.stab_tol * probe.area
        if n >= min_iterates and len(increments) >= 2 and increments[-1] < thr and increments[-2] < thr:
            stable = True
            break
    res = UnboundedResult(last, sched, probe, increments, len(history), stable, escape_report(last),
                          rng, time.perf_counter() - t0, history=history)
    last.knobs.update({"offsets": list(sched.offsets), "probe_depth": sched.probe_depth,
                       "stab_tol": sched.stab_tol})
    if not stable and on_exhaust == "raise":
        raise NoStabilization(f"no stabilisation within {sched.budget} truncations", result=res)
    return res


# -- escapes ------------------------------------------------------------------------------

def escape_report(fld):
    """Classify every chord of a truncated solve as closed or escaping.

    A chord escapes when exactly one endpoint lies deeper than ``M`` (on the
    ramp or the synthetic cap); chords entirely beyond ``M`` are ignored.
    """
    T = fld.domain
    h, M = T.halfplane, T.M
    levels, escapes, closed = [], [], []
    for lv in fld.levels:
        es, cl = [], []
        for i, j in lv.pairs:
            p, q = lv.points[i], lv.points[j]
            dp, dq = float(h.depth(p)), float(h.depth(q))
            if dp > M and dq > M:
                continue
            if dp > M or dq > M:
                foot, far = (p, q) if dq > M else (q, p)
                v = far - foot
                v = v / np.hypot(*v)
                es.append(Escape(lv.t, tuple(foot.tolist()), tuple(v.tolist()), tuple(far.tolist())))
            else:
                cl.append((tuple(p.tolist()), tuple(q.tolist())))
        levels.append(lv.t)
        escapes.append(es)
        closed.append(Closed(lv.t, cl))
    return EscapeReport(levels, escapes, closed, h, M)


def u_shortcut_saving(e1, e2, h, D):
    """Length saved by cutting two escaping halflines at depth ``D`` and joining
    the cut points with a segment (the U-shaped competitor)."""
    nu = np.asarray(h.normal, float)
    pts = []
    for e in (e1, e2):
        foot = np.asarray(e.foot, float)
        v = np.asarray(e.direction, float)
        rate = float(v @ nu)
        if rate <= 0:
            raise ValueError("halfline does not go deeper into the domain")
        lam = (D - float(h.depth(foot))) / rate
        pts.append((foot, foot + lam * v, lam))
    (p1, p2, l1), (q1, q2, l2_) = pts
    connector = float(np.hypot(*(p2 - q2)))
    return {"removed": l1 + l2_, "connector": connector, "saving": l1 + l2_ - connector,
            "p2": p2.tolist(), "q2": q2.tolist(), "depth": D}


def verify_single_escape(report, D=None):
    """Pass iff every level has at most one escaping component.

    On failure the witness holds the U-shortcut for the first offending level.
    """
    D = report.M if D is None else D
    for t, es in zip(report.levels, report.escapes):
        if len(es) > 1:
            w = u_shortcut_saving(es[0], es[1], report.halfplane, D)
            w["level"] = float(t)
            w["count"] = len(es)
            return {"pass": False, "witness": w}
    return {"pass": True, "witness": None, "max_count": max(report.counts, default=0)}


# -- C0 data ------------------------------------------------------------------------------

def _tail_sup(f, h, M, far_depth):
    d = f.domain
    ta, tb = slab_params(d, h, M)
    fa, fb = slab_params(d, h, max(far_depth, M + 1.0))
    taus = np.concatenate([np.linspace(fa, ta, 20001), np.linspace(tb, fb, 20001)])
    return float(np.max(np.abs(f.at_points(d.curve(taus)))))


def solve_c0_unique(d, f, norm=None, sched=None, K=200, **kw):
    """Truncation loop for data vanishing at infinity, with a containment certificate.

    With ``delta = sup |f|`` beyond depth ``M``, every level ``|t| > delta`` of
    the final solve must have all chord endpoints within depth ``M``; the
    certificate lists the per-level margins ``M - max endpoint depth``.
    """
    if f.tag not in ("C0compact", "C0"):
        raise NotC0Data(f"{f.name}: data is not known to vanish at infinity")
    res = solve_unbounded(d, f, norm, sched, K, **kw)
    fld = res.field
    T = fld.domain
    h, M = T.halfplane, T.M
    far = max(4 * M, (f.support_depth or 0.0) + M)
    delta = _tail_sup(f, h, M, far)
    margins = []
    for lv in fld.levels:
        if abs(lv.t) <= delta or not lv.pairs:
            continue
        idx = np.unique(np.asarray(lv.pairs).ravel())
        deepest = float(np.max(h.depth(lv.points[idx])))
        margins.append((float(lv.t), M - deepest, deepest))
    ok = all(m >= 0 for _, m, _ in margins)
    res.certificate = {
        "pass": bool(ok),
        "tail_sup": delta,
        "M": M,
        "levels_checked": len(margins),
        "min_margin": min((m for _, m, _ in margins), default=float(M)),
        "margins": margins,
    }
    return res


# -- steering -----------------------------------------------------------------------------

def boundary_along(d, p, v, lam_max=1e6):
    """Boundary point ``p - lam v`` with the smallest ``lam >= 0`` (bisection on the indicator)."""
    p = np.atleast_2d(p)
    lo = np.zeros(len(p))
    hi = np.full(len(p), 1.0)
    for _ in range(60):
        out = d.indicator(p - hi[:, None] * v) > 0
        if np.all(out) or np.max(hi) > lam_max:
            break
        hi = np.where(out, hi, 2 * hi)
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        out = d.indicator(p - mid[:, None] * v) > 0
        hi = np.where(out, mid, hi)
        lo = np.where(out, lo, mid)
    return p - lo[:, None] * v


def _cone_axes(d):
    a, b = (np.asarray(v, float) for v in d.asymptotic_directions())
    if abs(a[0] * b[1] - a[1] * b[0]) < 1e-3:
        raise NoConeDirections(f"{d.name}: both boundary ends escape in the same direction")
    # the branch running closest to vertical carries the x-dependent extension
    vx, vy = (a, b) if abs(a[1]) >= abs(b[1]) else (b, a)
    return vx, vy


def steering_cap(d, f, bias):
    """Cap values extending ``f`` constantly along one asymptotic direction.

    ``axis-x`` transports boundary values along the branch direction closest to
    vertical, ``axis-y`` along the one closest to horizontal.  ``mixed(x0)`` uses
    ``axis-x`` left of ``x0``, ``axis-y`` below the corner's height and the
    corner value elsewhere.
    """
    vx, vy = _cone_axes(d)
    bias = bias.replace("_", "-").lower()

    def along(v):
        return lambda p: f.at_points(boundary_along(d, np.asarray(p, float), v))

    if bias in ("axis-x", "axisx", "x"):
        return along(vx)
    if bias in ("axis-y", "axisy", "y"):
        return along(vy)
    if bias.startswith("mixed"):
        x0 = float(bias[bias.index("(") + 1:bias.rindex(")")])
        corner = boundary_along(d, np.array([[x0, 1e3]]), vx)[0]
        c_val = float(f.at_points(corner[None])[0])
        fx, fy = along(vx), along(vy)

        def cap(p):
            p = np.asarray(p, float)
            out = np.full(len(p), c_val)
            a = p[:, 0] < corner[0]
            b = ~a & (p[:, 1] < corner[1])
            if np.any(a):
                out[a] = fx(p[a])
            if np.any(b):
                out[b] = fy(p[b])
            return out

        return cap
    raise ValueError(f"unknown steering bias {bias!r}")


def steer_nonunique(d, f, bias="axis-x", norm=None, sched=None, K=200, **kw):
    """Truncation loop whose cap data follows ``steering_cap(d, f, bias)``.

    The data ``f`` is kept on the whole true boundary of each truncation.
    """
    cap = steering_cap(d, f, bias)
    if sched is None:
        sched = TruncationSchedule.default(d, base=_closest_boundary_point(d))
    res = solve_unbounded(d, f, norm, sched, K, cap_values=cap, **kw)
    res.certificate = {"bias": bias}
    res.field.knobs["bias"] = bias
    return res


def _closest_boundary_point(d):
    return d.curve(np.array(d.param_near(np.zeros(2))))


# -- strip domains ------------------------------------------------------------------------

def slab_tv(fld, X, X0=0.0):
    """Discrete total variation of ``fld`` restricted to ``{X0 < depth < X}``."""
    h = fld.domain.halfplane
    tv = 0.0
    for lv in fld.levels:
        if not lv.pairs:
            continue
        P = lv.points
        i, j = np.asarray(lv.pairs).T
        p, q = P[i], P[j]
        dp, dq = h.depth(p), h.depth(q)
        lo, hi = np.minimum(dp, dq), np.maximum(dp, dq)
        span = hi - lo
        inside = np.clip(np.minimum(hi, X) - np.maximum(lo, X0), 0.0, None)
        frac = np.where(span > 1e-15, inside / np.where(span > 1e-15, span, 1.0),
                        ((lo > X0) & (lo < X)).astype(float))
        e = q - p
        cost = fld.norm(np.stack([-e[:, 1], e[:, 0]], axis=-1))
        tv += float(np.sum(frac * cost))
    return tv * fld.dt


def _boundary_l1(f, h, depth, density=64):
    d = f.domain
    ta, tb = slab_params(d, h, depth)
    pts, _ = d.sample(ta, tb, density=density)
    v = np.abs(f.at_points(pts))
    seg = np.hypot(*np.diff(pts, axis=0).T)
    return float(np.sum(0.5 * (v[1:] + v[:-1]) * seg))


def certify_strip_bv(d, fld, f, depths=None, n_grid=200):
    """Uniform BV bound on expanding slabs of a strip-like domain.

    The bound is ``(2 C + 1)(||f||_L1 + w sup|f|)`` with ``w`` the strip width and
    Poincare constant ``C = w``.  Returns slab total variations, slab BV norms
    and whether all stay below the bound.
    """
    w = getattr(d, "strip_width", None)
    if w is None:
        raise NotStripDomain(f"{d.name}: no uniform cross-section bound")
    if not f.integrable:
        raise NonIntegrableData(f"{f.name}: boundary data is not in L1, so no uniform BV bound applies")
    T = fld.domain
    h, M = T.halfplane, T.M
    depths = np.linspace(1.0, M, 8) if depths is None else np.asarray(depths, float)
    reach = f.support_depth + 1.0 if f.support_depth is not None else 4.0 * M
    l1_f = _boundary_l1(f, h, max(M + 1.0, reach))
    sup_f = float(f.sup) if f.sup is not None else float(np.max(np.abs(f.at_points(T.vertices))))
    C = float(w)
    bound = (2 * C + 1) * (l1_f + w * sup_f)
    x0, y0, x1, y1 = T.bounds()
    xs = x0 + (np.arange(n_grid) + 0.5) * (x1 - x0) / n_grid
    ys = y0 + (np.arange(n_grid) + 0.5) * (y1 - y0) / n_grid
    X, Y = np.meshgrid(xs, ys)
    P = np.stack([X.ravel(), Y.ravel()], axis=-1)
    P = P[T.contains(P)]
    cell = (x1 - x0) * (y1 - y0) / n_grid**2
    dep = h.depth(P)
    absu = np.abs(np.nan_to_num(fld(P)))
    tvs, bvs = [], []
    for X_ in depths:
        tv = slab_tv(fld, X_)
        mass = float(np.sum(absu[dep < X_]) * cell)
        tvs.append(tv)
        bvs.append(tv + mass)
    return {
        "pass": bool(max(bvs, default=0.0) <= bound),
        "poincare_constant": C,
        "width": float(w),
        "f_l1": l1_f,
        "f_sup": sup_f,
        "bound": bound,
        "depths": [float(x) for x in depths],
        "slab_tv": tvs,
        "slab_bv": bvs,
        "sup_slab_tv": max(tvs, default=0.0),
    }
