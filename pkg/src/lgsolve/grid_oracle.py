"""Finite-difference minimiser of the relaxed anisotropic total variation.

The unknown lives on grid nodes strictly inside the region; the adjacent
outside nodes (the ring) carry the boundary data, so jumps across the ring
edges play the role of the boundary mismatch penalty.  The discrete energy is
``h * sum phi(D v)`` with forward differences, minimised by a first-order
primal-dual iteration whose dual variable is projected onto the polar unit
ball of ``phi``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import shapely
from scipy import ndimage
from scipy.interpolate import RegularGridInterpolator

from .anisotropy import l2
from .exceptions import DisconnectedMask
from .geometry import Domain, UnboundedDomain

__all__ = [
    "GridProblem",
    "OracleSolution",
    "build_problem",
    "window_problem",
    "minimize_relaxed",
    "grid_energy",
    "verify_least_gradient",
    "miranda_stability_check",
    "window_polygon",
]

DEFAULT_ITERS = 20000
STEP = 0.99 / math.sqrt(8.0)


@dataclass
class GridProblem:
    xs: np.ndarray
    ys: np.ndarray
    mask: np.ndarray  # free nodes
    ring: np.ndarray  # fixed nodes
    ring_values: np.ndarray  # full-grid array, meaningful on ring
    norm: object
    h: float
    region: object = None  # shapely geometry of the region

    def __post_init__(self):
        both = self.mask | self.ring
        ex = np.zeros_like(self.mask)
        ey = np.zeros_like(self.mask)
        ex[:, :-1] = both[:, :-1] & both[:, 1:] & (self.mask[:, :-1] | self.mask[:, 1:])
        ey[:-1, :] = both[:-1, :] & both[1:, :] & (self.mask[:-1, :] | self.mask[1:, :])
        self.ex = ex
        self.ey = ey

    @property
    def points(self):
        X, Y = np.meshgrid(self.xs, self.ys)
        return np.stack([X, Y], axis=-1)

    def grad(self, v):
        dx = np.zeros_like(v)
        dy = np.zeros_like(v)
        dx[:, :-1] = v[:, 1:] - v[:, :-1]
        dy[:-1, :] = v[1:, :] - v[:-1, :]
        return np.where(self.ex, dx, 0.0), np.where(self.ey, dy, 0.0)

    def grad_T(self, px, py):
        px = np.where(self.ex, px, 0.0)
        py = np.where(self.ey, py, 0.0)
        out = -px - py
        out[:, 1:] += px[:, :-1]
        out[1:, :] += py[:-1, :]
        return out

    def energy(self, v):
        dx, dy = self.grad(v)
        return float(self.h * np.sum(self.norm(np.stack([dx, dy], axis=-1))))

    def fill(self, values_on_mask=None):
        """Full-grid array with ring data and the given (or nearest-ring) interior values."""
        v = np.where(self.ring, self.ring_values, 0.0)
        if values_on_mask is None:
            _, (iy, ix) = ndimage.distance_transform_edt(~self.ring, return_indices=True)
            v = np.where(self.mask, self.ring_values[iy, ix], v)
        else:
            v = np.where(self.mask, values_on_mask, v)
        return v


@dataclass
class OracleSolution:
    problem: GridProblem
    v: np.ndarray
    energy_history: list
    energy: float
    iterations: int
    knobs: dict = field(default_factory=dict)

    def __call__(self, points):
        """Bilinear interpolation of the grid field; NaN away from the region."""
        p = self.problem
        pts = np.asarray(points, float)
        shape = pts.shape[:-1]
        pts = pts.reshape(-1, 2)
        valid = p.mask | p.ring
        vv = np.where(valid, self.v, np.nan)
        interp = RegularGridInterpolator((p.ys, p.xs), vv, bounds_error=False, fill_value=np.nan)
        out = interp(pts[:, ::-1])
        bad = ~np.isfinite(out)
        if np.any(bad):
            near = RegularGridInterpolator((p.ys, p.xs), vv, method="nearest", bounds_error=False, fill_value=np.nan)
            out[bad] = near(pts[bad][:, ::-1])
        if p.region is not None:
            inside = shapely.intersects_xy(p.region, pts[:, 0], pts[:, 1])
            out[~inside] = np.nan
        return out.reshape(shape)

    predict = __call__

    def values_on_mask(self):
        return self.v[self.problem.mask]


def _grid_for(bounds, h, pad=3):
    x0, y0, x1, y1 = bounds
    nx = int(math.ceil((x1 - x0) / h)) + 2 * pad + 1
    ny = int(math.ceil((y1 - y0) / h)) + 2 * pad + 1
    xs = x0 - pad * h + h * np.arange(nx)
    ys = y0 - pad * h + h * np.arange(ny)
    return xs, ys


def _masks(region, xs, ys):
    X, Y = np.meshgrid(xs, ys)
    mask = shapely.contains_xy(region, X, Y)
    lab, n = ndimage.label(mask)
    if n != 1:
        raise DisconnectedMask(f"grid mask has {n} components; refine h")
    grown = ndimage.binary_dilation(mask, structure=ndimage.generate_binary_structure(2, 1))
    ring = grown & ~mask
    return mask, ring, X, Y


def build_problem(domain, data, norm=None, h=None):
    """Grid problem for bounded-domain data ``data`` (arc-length evaluator)."""
    norm = l2() if norm is None else norm
    h = domain.diam / 128 if h is None else h
    region = domain.polygon()
    xs, ys = _grid_for(domain.bounds(), h)
    mask, ring, X, Y = _masks(region, xs, ys)
    rv = np.zeros(mask.shape)
    rp = np.stack([X[ring], Y[ring]], axis=-1)
    rv[ring] = data(domain.param_of(rp))
    return GridProblem(xs, ys, mask, ring, rv, norm, h, region)


def window_polygon(domain, window):
    """Intersection of a box ``(x0, y0, x1, y1)`` with the domain, as a shapely polygon."""
    box = shapely.box(*window)
    if isinstance(domain, UnboundedDomain):
        return shapely.intersection(box, _unbounded_patch(domain, box))
    return shapely.intersection(box, domain.polygon())


def _unbounded_patch(domain, box):
    """Convex polygon: the domain cut by a chord far away from ``box``."""
    x0, y0, x1, y1 = box.bounds
    diag = math.hypot(x1 - x0, y1 - y0)
    centre = np.array([(x0 + x1) / 2, (y0 + y1) / 2])
    tau0 = domain.param_near(centre)
    lo, hi = tau0 - 1.0, tau0 + 1.0
    for _ in range(60):
        if np.hypot(*(domain.curve(np.array(lo)) - centre)) > 4 * diag:
            break
        lo -= hi - lo
    for _ in range(60):
        if np.hypot(*(domain.curve(np.array(hi)) - centre)) > 4 * diag:
            break
        hi += hi - lo
    pts, _ = domain.sample(lo, hi, density=512)
    return shapely.Polygon(pts)


def window_problem(candidate, window, norm=None, h=None, domain=None):
    """Grid problem on ``window cap domain`` with ring data from ``candidate``."""
    norm = l2() if norm is None else norm
    domain = getattr(candidate, "domain", None) if domain is None else domain
    region = window_polygon(domain, window) if domain is not None else shapely.box(*window)
    minx, miny, maxx, maxy = region.bounds
    h = max(maxx - minx, maxy - miny) / 128 if h is None else h
    xs, ys = _grid_for(region.bounds, h)
    mask, ring, X, Y = _masks(region, xs, ys)
    rp = np.stack([X[ring], Y[ring]], axis=-1)
    line = shapely.get_exterior_ring(region) if region.geom_type == "Polygon" else region.boundary
    proj = shapely.line_interpolate_point(line, shapely.line_locate_point(line, shapely.points(rp)))
    q = shapely.get_coordinates(proj)
    c = np.asarray(region.centroid.coords[0])
    q = q + 1e-9 * (c - q)
    rv = np.zeros(mask.shape)
    vals = candidate(q)
    if np.any(~np.isfinite(vals)):
        bad = ~np.isfinite(vals)
        vals[bad] = candidate(q[bad] + 1e-6 * (c - q[bad]))
    rv[ring] = vals
    return GridProblem(xs, ys, mask, ring, rv, norm, h, region)


def minimize_relaxed(problem, iters=DEFAULT_ITERS, v0=None, record_every=50, tol=0.0):
    """Primal-dual iterations on the relaxed grid functional.

    ``v0`` is an optional full-grid initial guess (nearest ring data otherwise).
    The energy is recorded every ``record_every`` iterations.
    """
    if iters < 1:
        raise ValueError("iters must be positive")
    p = problem
    v = p.fill() if v0 is None else np.where(p.ring, p.ring_values, np.where(p.mask, v0, 0.0))
    vbar = v.copy()
    px = np.zeros_like(v)
    py = np.zeros_like(v)
    tau = sigma = STEP
    hist = [p.energy(v)]
    mask = p.mask
    for it in range(1, iters + 1):
        dx, dy = p.grad(vbar)
        px, py = p.norm.project_polar_ball(px + sigma * dx, py + sigma * dy)
        v_new = v - tau * p.grad_T(px, py)
        v_new = np.where(mask, v_new, v)
        vbar = 2 * v_new - v
        v = v_new
        if it % record_every == 0 or it == iters:
            hist.append(p.energy(v))
            if tol and len(hist) > 3 and abs(hist[-2] - hist[-1]) <= tol * max(hist[-1], 1e-300):
                break
    return OracleSolution(p, v, hist, hist[-1], it, {"h": p.h, "iters": iters, "norm": p.norm.name})


def grid_energy(problem, field_):
    """Grid energy of a candidate callable sampled on the problem's free nodes."""
    P = problem.points
    vals = field_(P[problem.mask])
    return problem.energy(problem.fill(_scatter(problem, vals)))


def _scatter(problem, vals):
    out = np.zeros(problem.mask.shape)
    out[problem.mask] = vals
    return out


def verify_least_gradient(candidate, window, norm=None, h=None, iters=DEFAULT_ITERS, rel_tol=1e-3, domain=None):
    """Certify that ``candidate`` cannot be beaten by perturbations supported in ``window``.

    The candidate's own values on the window boundary become the ring data; the
    grid minimiser's energy is compared with the candidate's grid energy and the
    certificate passes when the gap is at most ``rel_tol * scale`` with ``scale``
    the window perimeter times the candidate's oscillation there.
    """
    prob = window_problem(candidate, window, norm, h, domain)
    e_cand = grid_energy(prob, candidate)
    P = prob.points
    vals = candidate(P[prob.mask])
    sol = minimize_relaxed(prob, iters, v0=prob.fill(_scatter(prob, vals)))
    osc = float(np.nanmax(vals) - np.nanmin(vals)) if len(vals) else 0.0
    nrm = prob.norm
    region = prob.region
    perim = _anisotropic_perimeter(region, nrm)
    scale = perim * osc
    gap = e_cand - sol.energy
    return {
        "pass": bool(gap <= rel_tol * scale),
        "candidate_energy": e_cand,
        "oracle_energy": sol.energy,
        "gap": gap,
        "tolerance": rel_tol * scale,
        "scale": scale,
        "window": tuple(float(w) for w in window),
        "h": prob.h,
        "iterations": sol.iterations,
        "oracle": sol,
    }


def _anisotropic_perimeter(region, norm):
    ring = np.asarray(shapely.get_exterior_ring(region).coords) if region.geom_type == "Polygon" \
        else np.asarray(region.boundary.coords)
    e = np.diff(ring, axis=0)
    nrm = np.stack([e[:, 1], -e[:, 0]], axis=-1)
    return float(np.sum(norm(nrm)))


def miranda_stability_check(seq, window, norm=None, h=None, iters=DEFAULT_ITERS, n=80, domain=None):
    """L1 distances between consecutive fields on a window, plus a certificate for the last one."""
    if len(seq) < 3:
        raise ValueError("need at least three fields")
    domain = getattr(seq[-1], "domain", None) if domain is None else domain
    region = window_polygon(domain, window) if domain is not None else shapely.box(*window)
    x0, y0, x1, y1 = region.bounds
    X, Y = np.meshgrid(x0 + (np.arange(n) + 0.5) * (x1 - x0) / n, y0 + (np.arange(n) + 0.5) * (y1 - y0) / n)
    pts = np.stack([X.ravel(), Y.ravel()], axis=-1)
    pts = pts[shapely.contains_xy(region, pts[:, 0], pts[:, 1])]
    cell = (x1 - x0) * (y1 - y0) / n**2
    vals = [np.nan_to_num(f(pts)) for f in seq]
    dist = [float(np.sum(np.abs(a - b)) * cell) for a, b in zip(vals, vals[1:])]
    decreasing = all(b <= a + 1e-12 for a, b in zip(dist, dist[1:]))
    cert = verify_least_gradient(seq[-1], window, norm, h, iters, domain=domain)
    return {"distances": dist, "decreasing": decreasing, "certificate": cert,
            "pass": bool(decreasing and cert["pass"])}
