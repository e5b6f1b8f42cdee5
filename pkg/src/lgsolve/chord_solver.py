"""Level-by-level least gradient solver on bounded convex domains.

For each level ``t`` the boundary set ``{f >= t}`` is closed off by straight
chords forming a minimal-cost noncrossing matching of the crossing points,
ties being broken towards the largest enclosed area.  The solution is
``u(p) = sup{t_k : p in E_k}``.
"""
from __future__ import annotations

import logging
import time
import warnings
from dataclasses import dataclass, field

import numpy as np
import shapely

from .anisotropy import Norm2D, l2, regularized_sequence
from .boundary import BoundaryFunction, MollificationKernel, mollify
from .exceptions import DegenerateLevel, NestingViolation, NotStrictBall
from .matching import dp_matching

log = logging.getLogger(__name__)

__all__ = [
    "LevelCrossings",
    "LevelSolution",
    "SolutionField",
    "level_grid",
    "level_crossings",
    "min_noncrossing_matching",
    "solve",
    "solve_with_regularization",
    "trace_deviation",
    "tie_families",
    "default_schedule",
]

N_SAMPLES = 4096
TIE_TOL = 1e-9
NESTING_TOL = 1e-6
BISECT_TOL = 1e-10


@dataclass
class LevelCrossings:
    """Sign changes of ``f - t`` along the boundary, in counter-clockwise order.

    ``up[i]`` is true when ``f`` rises through ``t`` at ``s[i]``, so the arc
    from ``s[i]`` to ``s[i+1]`` lies in ``{f >= t}``.
    """

    t: float
    s: np.ndarray
    up: np.ndarray
    above: bool = False  # for zero crossings: whether f >= t everywhere

    @property
    def m(self):
        return len(self.s) // 2


@dataclass
class LevelSolution:
    t: float
    s: np.ndarray
    up: np.ndarray
    points: np.ndarray
    pairs: list
    cost: float
    area: float
    outer: bool
    tie: bool = False
    limit_s: np.ndarray | None = None
    limit_up: np.ndarray | None = None
    limit_pairs: list = field(default_factory=list)
    limit_alt_pairs: list = field(default_factory=list)

    @property
    def chords(self):
        return [(self.points[i], self.points[j]) for i, j in self.pairs]


# -- level grid and crossings -----------------------------------------------------

def level_grid(fmin, fmax, K, seed=0):
    """``K`` levels strictly inside ``(fmin, fmax)`` with a fixed-seed jitter below ``dt/10``."""
    dt = (fmax - fmin) / K
    base = fmin + (np.arange(K) + 0.5) * dt
    jitter = np.random.default_rng(seed).uniform(-0.05, 0.05, K) * dt
    return base + jitter, dt


def _sample_params(f, n=N_SAMPLES, eps=None):
    L = f.domain.perimeter
    s = np.arange(n) * (L / n)
    src = getattr(f, "parent", None)
    if src is not None and src.jumps:
        J = src.jump_params
        extra = [J]
        r = eps if eps is not None else getattr(getattr(f, "kernel", None), "eps", 0.0)
        for frac in (0.25, 0.5, 0.75, 1.0, 1.25):
            extra += [J - frac * r, J + frac * r]
        Js = np.sort(np.mod(J, L))
        extra.append(0.5 * (Js + np.roll(Js, -1) + np.where(np.arange(len(Js)) == len(Js) - 1, L, 0.0)))
        s = np.concatenate([s] + extra)
    return np.unique(np.mod(s, L))


def _all_crossings(f, levels, n_samples=N_SAMPLES):
    """Crossings for every level at once; returns a list of :class:`LevelCrossings`."""
    L = f.domain.perimeter
    S = _sample_params(f, n_samples)
    V = f(S)
    S2 = np.append(S, S[0] + L)
    V2 = np.append(V, V[0])
    out_lo, out_hi, out_t, out_up, out_k = [], [], [], [], []
    flags = []
    for k, t in enumerate(levels):
        b = V2 >= t
        if np.any((V2[:-1] == t) & (V2[1:] == t)):
            raise DegenerateLevel(f"flat boundary arc at level {t!r}")
        idx = np.nonzero(b[:-1] != b[1:])[0]
        flags.append(bool(b[0]))
        out_lo.append(S2[idx])
        out_hi.append(S2[idx + 1])
        out_t.append(np.full(len(idx), t))
        out_up.append(b[idx + 1])
        out_k.append(np.full(len(idx), k))
    lo = np.concatenate(out_lo)
    hi = np.concatenate(out_hi)
    tt = np.concatenate(out_t)
    up = np.concatenate(out_up)
    kk = np.concatenate(out_k)
    s = _bisect_levels(f, lo, hi, tt, up, L)
    res = []
    for k, t in enumerate(levels):
        sel = kk == k
        sk, uk = s[sel], up[sel]
        order = np.argsort(sk, kind="stable")
        res.append(LevelCrossings(float(t), sk[order], uk[order], flags[k]))
    return res


def _bisect_levels(f, lo, hi, t, rising, L):
    if len(lo) == 0:
        return lo
    tol = BISECT_TOL * L
    lo = lo.copy()
    hi = hi.copy()
    n_iter = int(np.ceil(np.log2(max(float(np.max(hi - lo)), tol) / tol))) + 1
    for _ in range(n_iter):
        mid = 0.5 * (lo + hi)
        above = f(np.mod(mid, L)) >= t
        go_left = above == rising
        hi = np.where(go_left, mid, hi)
        lo = np.where(go_left, lo, mid)
    return np.mod(0.5 * (lo + hi), L)


def level_crossings(f, t, n_samples=N_SAMPLES):
    """Crossing parameters of ``f - t``, bracketed to ``1e-10 * L``."""
    return _all_crossings(f, [t], n_samples)[0]


# -- matching --------------------------------------------------------------------

def _matrices(domain, norm, s, up):
    P = domain.point_at(s)
    D = P[None, :, :] - P[:, None, :]
    C = norm(np.stack([-D[..., 1], D[..., 0]], axis=-1))
    n = len(s)
    i, j = np.triu_indices(n, k=1)
    A = np.zeros((n, n))
    sgn = np.where(up, 1.0, -1.0)
    if n:
        A[i, j] = sgn[i] * domain.cap_area(s[i], s[j])
    outer = bool(up[-1]) if n else False
    return P, C, A, outer


def min_noncrossing_matching(domain, crossings, norm, tie_tol=None, detect_ties=True):
    """Minimal-cost noncrossing matching of a level's crossings.

    Returns ``(pairs, cost, area, tie, alt_pairs, points, outer)``.
    """
    tol = TIE_TOL * domain.perimeter if tie_tol is None else tie_tol
    s, up = crossings.s, crossings.up
    if len(s) == 0:
        outer = bool(crossings.above)
        return [], 0.0, domain.area if outer else 0.0, False, [], np.zeros((0, 2)), outer
    P, C, A, outer = _matrices(domain, norm, s, up)
    res = dp_matching(C, A, tol, domain.area if outer else 0.0, detect_ties=detect_ties)
    return res.pairs, res.cost, res.area, res.tie, res.alt_pairs, P, outer


def _limit_crossings(s, up, jumps, radius, L):
    """Snap crossings caused by a declared jump onto the jump parameter and drop
    coincident pairs, giving the crossings of the unmollified data."""
    if len(jumps) == 0 or len(s) == 0:
        return s, up
    d = np.abs(((s[:, None] - jumps[None, :]) + 0.5 * L) % L - 0.5 * L)
    k = np.argmin(d, axis=1)
    near = d[np.arange(len(s)), k] <= radius * (1 + 1e-9)
    s2 = np.where(near, jumps[k], s)
    keep_s, keep_up, keep_j = [], [], []
    for si, ui, ji in zip(s2, up, np.where(near, k, -1)):
        if keep_s and ji >= 0 and keep_j[-1] == ji:
            keep_s.pop()
            keep_up.pop()
            keep_j.pop()
            continue
        keep_s.append(si)
        keep_up.append(ui)
        keep_j.append(ji)
    if len(keep_s) >= 2 and keep_j[0] >= 0 and keep_j[0] == keep_j[-1]:
        keep_s, keep_up = keep_s[1:-1], keep_up[1:-1]
    s2 = np.asarray(keep_s, float)
    up2 = np.asarray(keep_up, bool)
    order = np.argsort(s2, kind="stable")
    return s2[order], up2[order]


# -- solution field -------------------------------------------------------------------

class SolutionField:
    """Piecewise-constant reconstruction ``u(p) = sup{t_k : p in E_k}``."""

    def __init__(self, domain, norm, data, levels, dt, source=None, constant=None):
        self.domain = domain
        self.norm = norm
        self.data = data
        self.source = source if source is not None else data
        self.levels = levels
        self.t = np.array([lv.t for lv in levels], dtype=float)
        self.dt = float(dt)
        self.constant = constant
        self.nesting = {}
        self.schedule_log = []
        self.knobs = {}
        self._pack()

    def _pack(self):
        K = len(self.levels)
        mmax = max([len(lv.pairs) for lv in self.levels] + [1])
        self._A = np.zeros((K, mmax, 2))
        self._B = np.zeros((K, mmax, 2))
        self._valid = np.zeros((K, mmax), dtype=bool)
        self._outer = np.array([lv.outer for lv in self.levels], dtype=bool)
        for k, lv in enumerate(self.levels):
            for c, (i, j) in enumerate(lv.pairs):
                self._A[k, c] = lv.points[i]
                self._B[k, c] = lv.points[j]
                self._valid[k, c] = True

    # membership -----------------------------------------------------------------
    def _member(self, k, pts):
        A = self._A[k]
        B = self._B[k]
        e = B - A
        rel = pts[:, None, :] - A
        inside_cap = (e[..., 0] * rel[..., 1] - e[..., 1] * rel[..., 0] < 0) & self._valid[k]
        parity = np.count_nonzero(inside_cap, axis=-1) % 2 == 1
        return self._outer[k] ^ parity

    def member(self, k, points):
        """Boolean membership of ``points`` in ``E_k``."""
        pts = np.atleast_2d(np.asarray(points, float))
        return self._member(np.full(len(pts), k), pts)

    def __call__(self, points, method="bisect"):
        pts = np.asarray(points, float)
        shape = pts.shape[:-1]
        pts = pts.reshape(-1, 2)
        inside = self.domain.contains(pts)
        out = np.full(len(pts), np.nan)
        if self.constant is not None:
            out[inside] = self.constant
            return out.reshape(shape)
        q = pts[inside]
        K = len(self.levels)
        if method == "scan":
            best = np.full(len(q), -1)
            for k in range(K):
                best = np.where(self._member(np.full(len(q), k), q), k, best)
        else:
            lo = np.full(len(q), -1)
            hi = np.full(len(q), K)
            while np.any(hi - lo > 1):
                act = hi - lo > 1
                mid = (lo + hi) // 2
                inm = np.zeros(len(q), dtype=bool)
                inm[act] = self._member(mid[act], q[act])
                lo = np.where(act & inm, mid, lo)
                hi = np.where(act & ~inm, mid, hi)
            best = lo
        out[inside] = self.t[np.maximum(best, 0)]
        return out.reshape(shape)

    predict = __call__

    # geometry of superlevel sets -------------------------------------------------
    def _cap_polygon(self, s_i, s_j):
        pts = self.domain.arc_points(s_i, s_j, self.poly_stride)
        # an arc inside one boundary edge bounds no area
        return shapely.Polygon(pts) if len(pts) >= 3 else shapely.Polygon()

    @property
    def poly_stride(self):
        return max(1, self.domain.n // 1024)

    def _domain_polygon(self):
        return shapely.Polygon(self.domain.vertices[self.domain.decimation(self.poly_stride)])

    def superlevel_polygon(self, k, pairs=None, s=None, outer=None):
        lv = self.levels[k]
        pairs = lv.pairs if pairs is None else pairs
        s = lv.s if s is None else s
        outer = lv.outer if outer is None else outer
        geom = self._domain_polygon() if outer else shapely.Polygon()
        for i, j in pairs:
            geom = shapely.symmetric_difference(geom, self._cap_polygon(s[i], s[j]))
        return shapely.make_valid(geom) if not geom.is_valid else geom

    def check_nesting(self, tol=NESTING_TOL):
        """Largest ``area(E_{k+1} minus E_k)`` over consecutive levels."""
        if self.constant is not None or len(self.levels) < 2:
            self.nesting = {"max_excess_area": 0.0, "tol": tol * self.domain.area, "ok": True, "worst_level": None}
            return self.nesting
        polys = [self.superlevel_polygon(k) for k in range(len(self.levels))]
        excess = np.array([shapely.area(shapely.difference(polys[k + 1], polys[k]))
                           for k in range(len(polys) - 1)])
        worst = int(np.argmax(excess))
        self.nesting = {
            "max_excess_area": float(excess[worst]),
            "tol": tol * self.domain.area,
            "ok": bool(excess[worst] <= tol * self.domain.area),
            "worst_level": float(self.t[worst]),
        }
        return self.nesting

    # energies --------------------------------------------------------------------------
    @property
    def level_costs(self):
        return np.array([lv.cost for lv in self.levels])

    def total_variation(self):
        """Discrete anisotropic total variation ``dt * sum_k cost_k``."""
        if self.constant is not None:
            return 0.0
        return float(self.dt * np.sum(self.level_costs))

    def boundary_mass(self, data=None, n=N_SAMPLES * 4):
        """Quadrature of ``phi(nu) |f|`` along the boundary."""
        data = self.data if data is None else data
        d = self.domain
        s = (np.arange(n) + 0.5) * (d.perimeter / n)
        w = self.norm(d.outward_normal_at(s)) * (d.perimeter / n)
        return float(np.sum(w * np.abs(data(s))))

    def scale(self, data=None, n=N_SAMPLES * 4):
        """Energy scale: anisotropic perimeter times the oscillation of the data."""
        data = self.data if data is None else data
        d = self.domain
        s = (np.arange(n) + 0.5) * (d.perimeter / n)
        per = float(np.sum(self.norm(d.outward_normal_at(s))) * (d.perimeter / n))
        v = data(s)
        return per * float(np.max(v) - np.min(v))

    def tie_families(self):
        return tie_families(self)

    def trace_deviation(self, f=None, **kw):
        return trace_deviation(self, self.source if f is None else f, **kw)

    def chord_segments(self):
        """``(level, p, q)`` triples for every chord."""
        out = []
        for lv in self.levels:
            for i, j in lv.pairs:
                out.append((lv.t, lv.points[i], lv.points[j]))
        return out


# -- main entry points ------------------------------------------------------------------

def default_schedule(eps, L):
    """Decreasing mollification radii ending at ``eps``, capped at ``L / 8``."""
    sched = [min(100 * eps, L / 8), min(10 * eps, L / 8), eps]
    out = []
    for e in sched:
        if not out or e < out[-1]:
            out.append(e)
    return out


def _solve_levels(domain, fn, norm, K, seed, source, radius, detect_ties, n_samples, level_range=None):
    L = domain.perimeter
    if level_range is None:
        v = fn(_sample_params(fn, n_samples))
        fmin, fmax = float(np.min(v)), float(np.max(v))
    else:
        fmin, fmax = map(float, level_range)
    if fmax - fmin <= 1e-12 * (1.0 + abs(fmax)):
        return None, 0.0, 0.5 * (fmin + fmax)
    levels, dt = level_grid(fmin, fmax, K, seed)
    try:
        crossings = _all_crossings(fn, levels, n_samples)
    except DegenerateLevel:
        levels, dt = level_grid(fmin, fmax, K, seed + 7919)
        crossings = _all_crossings(fn, levels, n_samples)
    jumps = source.jump_params if source is not None and source.jumps else np.zeros(0)
    sols = []
    tol = TIE_TOL * L
    for lc in crossings:
        pairs, cost, area, tie, alt, P, outer = min_noncrossing_matching(domain, lc, norm, tol, detect_ties=False)
        sol = LevelSolution(lc.t, lc.s, lc.up, P, pairs, cost, area, outer)
        if detect_ties:
            if len(jumps):
                ls, lu = _limit_crossings(lc.s, lc.up, jumps, radius, L)
            else:
                ls, lu = lc.s, lc.up
            sol.limit_s, sol.limit_up = ls, lu
            if len(ls) >= 4:
                lcx = LevelCrossings(lc.t, ls, lu, lc.above)
                lp, _, _, ltie, lalt, _, _ = min_noncrossing_matching(domain, lcx, norm, tol, detect_ties=True)
                sol.limit_pairs = lp
                sol.tie = bool(ltie)
                sol.limit_alt_pairs = lalt
        sols.append(sol)
    return sols, dt, None


def _solve_once(domain, fn, norm, K, seed, source, radius, detect_ties, check_nesting, n_samples, level_range=None):
    sols, dt, const = _solve_levels(domain, fn, norm, K, seed, source, radius, detect_ties, n_samples,
                                    level_range)
    if sols is None:
        field_ = SolutionField(domain, norm, fn, [], 0.0, source=source, constant=const)
        field_.check_nesting()
        return field_
    field_ = SolutionField(domain, norm, fn, sols, dt, source=source)
    if check_nesting:
        rep = field_.check_nesting()
        if not rep["ok"]:
            log.info("nesting residual %.3g above tolerance, retrying with a new jitter", rep["max_excess_area"])
            sols, dt, _ = _solve_levels(domain, fn, norm, K, seed + 104729, source, radius, detect_ties, n_samples,
                                        level_range)
            field_ = SolutionField(domain, norm, fn, sols, dt, source=source)
            rep = field_.check_nesting()
            rep["retried"] = True
            if not rep["ok"]:
                raise NestingViolation(
                    f"superlevel sets not nested: excess area {rep['max_excess_area']:.3g} at t={rep['worst_level']:.4g}")
    return field_


def solve(domain, f, norm=None, K=200, mollify_eps=1e-3, schedule=None, seed=0, detect_ties=True,
          check_nesting=True, n_samples=N_SAMPLES, level_range=None):
    """Solve the least gradient problem on a bounded convex domain.

    Parameters
    ----------
    domain : Domain
    f : BoundaryFunction
        Data on ``domain``.  Data with declared jumps (or a positive-measure
        discontinuity set) is mollified over a decreasing radius schedule and
        the finest solve is returned; the schedule is logged on the result.
    norm : Norm2D, default Euclidean
        Must have a strictly convex unit ball; see :func:`solve_with_regularization`.
    K : int
        Number of levels.
    level_range : (float, float), optional
        Fixed ``(min, max)`` for the level grid instead of the sampled range of
        ``f``; keeps levels identical across a family of related problems.
    """
    norm = l2() if norm is None else norm
    if not norm.is_strict:
        raise NotStrictBall(f"{norm.name}: unit ball is not strictly convex ({norm.certificate}); "
                            "use solve_with_regularization")
    if f.domain is not domain:
        raise ValueError("data lives on a different domain")
    t0 = time.perf_counter()
    needs_smoothing = bool(f.jumps) or f.pathological_measure > 0
    if not needs_smoothing:
        field_ = _solve_once(domain, f, norm, K, seed, f, 0.0, detect_ties, check_nesting, n_samples, level_range)
        field_.knobs = {"K": K, "seed": seed, "norm": norm.name, "mollify_eps": None}
        field_.wall_clock = time.perf_counter() - t0
        return field_
    sched = list(schedule) if schedule is not None else default_schedule(mollify_eps, domain.perimeter)
    field_ = None
    entries = []
    for eps in sched:
        fn = mollify(f, MollificationKernel(eps))
        field_ = _solve_once(domain, fn, norm, K, seed, f, eps, detect_ties, check_nesting, n_samples, level_range)
        entries.append({"eps": eps, "tv": field_.total_variation(), "nesting": field_.nesting.get("max_excess_area")})
        log.info("mollification radius %.3g: TV %.6g", eps, entries[-1]["tv"])
    field_.schedule_log = entries
    field_.knobs = {"K": K, "seed": seed, "norm": norm.name, "mollify_eps": sched[-1], "schedule": sched}
    field_.wall_clock = time.perf_counter() - t0
    return field_


def l1_distance(u, v, domain, n=400):
    """``int |u - v|`` over the domain on an ``n x n`` midpoint grid.

    Fields with jumps need ``n`` large enough that no grid column sits inside
    the smeared jump of one of them; below a few hundred the midpoint rule
    aliases against jump lines.
    """
    x0, y0, x1, y1 = domain.bounds()
    xs = x0 + (np.arange(n) + 0.5) * (x1 - x0) / n
    ys = y0 + (np.arange(n) + 0.5) * (y1 - y0) / n
    X, Y = np.meshgrid(xs, ys)
    pts = np.stack([X.ravel(), Y.ravel()], axis=-1)
    inside = domain.contains(pts)
    a = u(pts[inside]) if callable(u) else u
    b = v(pts[inside]) if callable(v) else v
    return float(np.sum(np.abs(a - b)) * (x1 - x0) * (y1 - y0) / n**2)


def solve_with_regularization(domain, f, norm, K=200, k_max=6, **kw):
    """Solve for ``phi + |.|/k``, ``k = 1..k_max``; returns the last field and the log
    of L1 increments between consecutive iterates."""
    fields = []
    increments = []
    for k in range(1, k_max + 1):
        fk = solve(domain, f, regularized_sequence(norm, k), K=K, **kw)
        if fields:
            increments.append(l1_distance(fields[-1], fk, domain))
        fields.append(fk)
    decreasing = all(b <= a + 1e-12 for a, b in zip(increments, increments[1:]))
    if not decreasing:
        warnings.warn("regularisation increments are not decreasing", RuntimeWarning, stacklevel=2)
    ties = [sum(lv.tie for lv in fk.levels) for fk in fields]
    log_ = {"increments": increments, "decreasing": decreasing, "tied_levels": ties,
            "norms": [fk.norm.name for fk in fields]}
    last = fields[-1]
    last.regularization_log = log_
    last.iterates = fields
    return last, log_


# -- diagnostics ------------------------------------------------------------------------------

def _ball_mean(field_, f_vals, x, nu_in, r, n_r=6, n_a=32):
    """Mean of ``|f(x) - u|`` over ``B(x, r) cap Omega`` by a polar rule."""
    rg, wr = np.polynomial.legendre.leggauss(n_r)
    rad = 0.5 * r * (rg + 1)
    wr = 0.5 * r * wr * rad
    ang = 2 * np.pi * (np.arange(n_a) + 0.5) / n_a
    off = rad[:, None, None] * np.stack([np.cos(ang), np.sin(ang)], axis=-1)[None]
    pts = x[:, None, None, :] + off[None]
    flat = pts.reshape(-1, 2)
    u = field_(flat).reshape(pts.shape[:-1])
    ok = np.isfinite(u)
    w = np.broadcast_to(wr[None, :, None], u.shape) * ok
    dev = np.where(ok, np.abs(f_vals[:, None, None] - np.where(ok, u, 0.0)), 0.0)
    return np.sum(w * dev, axis=(1, 2)) / np.maximum(np.sum(w, axis=(1, 2)), 1e-300)


def trace_deviation(field_, f, n_points=512, radii_exp=(3, 4, 5, 6, 7), offset_exp=10, n_integral=4096,
                    exclude=None):
    """Boundary trace diagnostics of a solution field against data ``f``.

    Returns a dict with ball-mean deviations at radii ``2^-j diam`` over
    ``n_points`` boundary samples (continuity points only) and the integral
    ``int |u(x - delta nu) - f(x)| ds`` at inward offset ``delta = 2^-offset_exp diam``.
    """
    d = field_.domain
    L = d.perimeter
    jumps = f.jump_params if f.jumps else np.zeros(0)
    ex = exclude if exclude is not None else 0.0

    def far_from_jumps(s):
        if len(jumps) == 0:
            return np.ones(len(s), dtype=bool)
        dist = np.abs(((s[:, None] - jumps[None]) + 0.5 * L) % L - 0.5 * L).min(axis=1)
        return dist > max(ex, 1e-12 * L)

    s = (np.arange(n_points) + 0.5) * (L / n_points)
    keep = far_from_jumps(s)
    s = s[keep]
    x = d.point_at(s)
    nu_in = -d.outward_normal_at(s)
    fv = f(s)
    radii = {}
    for j in radii_exp:
        r = 2.0**-j * d.diam
        m = _ball_mean(field_, fv, x, nu_in, r)
        radii[j] = {"radius": r, "mean": float(np.mean(m)), "max": float(np.max(m))}
    delta = 2.0**-offset_exp * d.diam
    si = (np.arange(n_integral) + 0.5) * (L / n_integral)
    ki = far_from_jumps(si)
    si = si[ki]
    xi = d.point_at(si) - delta * d.outward_normal_at(si)
    ui = field_(xi)
    bad = ~np.isfinite(ui)
    if np.any(bad):
        ui[bad] = field_(d.point_at(si[bad]) - 2 * delta * d.outward_normal_at(si[bad]))
    dev = np.abs(ui - f(si))
    integral = float(np.nansum(dev) * L / n_integral)
    finest = radii[max(radii_exp)]
    return {
        "radii": radii,
        "finest_mean": finest["mean"],
        "finest_max": finest["max"],
        "offset": delta,
        "integral": integral,
        "mean": integral / L,
        "n_points": int(len(s)),
    }


def tie_families(field_, overlap=0.5):
    """Group consecutive tied levels whose tie regions overlap.

    Each family reports the level interval, the region (union of the tie
    regions, as a shapely geometry) with its area, and the range of constants
    that can be assigned on it.
    """
    fams = []
    cur = None
    for k, lv in enumerate(field_.levels):
        if not lv.tie:
            if cur is not None:
                fams.append(cur)
                cur = None
            continue
        outer = bool(lv.limit_up[-1])
        emax = field_.superlevel_polygon(k, lv.limit_pairs, lv.limit_s, outer)
        emin = field_.superlevel_polygon(k, lv.limit_alt_pairs, lv.limit_s, outer)
        region = shapely.difference(emax, emin)
        if region.area <= 1e-9 * field_.domain.area:
            region = shapely.difference(emin, emax)
        if cur is not None:
            inter = shapely.area(shapely.intersection(cur["_last"], region))
            if inter >= overlap * min(region.area, cur["_last"].area):
                cur["levels"].append(lv.t)
                cur["_last"] = region
                cur["region"] = shapely.union(cur["region"], region)
                continue
            fams.append(cur)
        cur = {"levels": [lv.t], "_last": region, "region": region}
    if cur is not None:
        fams.append(cur)
    out = []
    for fam in fams:
        t = np.array(fam["levels"])
        out.append({
            "t_lo": float(t.min()),
            "t_hi": float(t.max()),
            "lambda_range": (float(t.min()), float(t.max())),
            "n_levels": int(len(t)),
            "region": fam["region"],
            "area": float(fam["region"].area),
            "centroid": tuple(np.round(np.asarray(fam["region"].centroid.coords[0]), 12).tolist()),
            "bounds": tuple(float(b) for b in fam["region"].bounds),
        })
    return out
