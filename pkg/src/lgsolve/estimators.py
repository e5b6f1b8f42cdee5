"""Estimator-style wrappers with ``fit`` / ``predict`` and ``get_params``.

Each estimator is configured by preset names (or ready-made objects) and fits
a field that ``predict`` evaluates at points of shape ``(n, 2)``.  Boundary data
may instead be passed to ``fit`` as samples: boundary points ``X`` with values
``y`` are interpolated linearly in arc length.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from . import presets
from ._validation import check_points, check_positive, check_values
from .anisotropy import Norm2D, parse_norm
from .boundary import BoundaryFunction
from .chord_solver import solve
from .geometry import Domain, UnboundedDomain
from .grid_oracle import build_problem, minimize_relaxed
from .unbounded import TruncationSchedule, solve_c0_unique, solve_unbounded, steer_nonunique

__all__ = ["LeastGradientSolver", "GridOracle", "TruncationSolver", "data_from_samples"]


def _domain(spec):
    return spec if isinstance(spec, (Domain, UnboundedDomain)) else presets.make_domain(spec)


def _norm(spec):
    return spec if isinstance(spec, Norm2D) else parse_norm(spec)


def _data(spec, domain):
    if isinstance(spec, BoundaryFunction):
        if spec.domain is not domain:
            raise ValueError("boundary data was built on a different domain")
        return spec
    return presets.make_data(spec, domain)


def data_from_samples(domain, X, y, name="samples"):
    """Continuous boundary data interpolating ``y`` at boundary points ``X``."""
    X = check_points(X)
    y = check_values(y, len(X))
    s = domain.param_of(X)
    order = np.argsort(s)
    s, y = s[order], y[order]
    L = domain.perimeter
    s_ext = np.concatenate([s[-1:] - L, s, s[:1] + L])
    y_ext = np.concatenate([y[-1:], y, y[:1]])
    return BoundaryFunction(domain, lambda t: np.interp(np.mod(t, L), s_ext, y_ext), name=name)


class _FieldEstimator(BaseEstimator):
    def predict(self, X):
        check_is_fitted(self, "field_")
        return np.asarray(self.field_(check_points(X)), dtype=float)

    def _resolve(self, X, y):
        domain = _domain(self.domain)
        if X is not None:
            if y is None:
                raise ValueError("boundary samples X need values y")
            if not isinstance(domain, Domain):
                raise ValueError("boundary samples are supported on bounded domains only")
            return domain, data_from_samples(domain, X, y)
        return domain, _data(self.data, domain)


class LeastGradientSolver(_FieldEstimator):
    """Level-by-level chord solver on a bounded convex domain."""

    def __init__(self, domain="disc", data="cos_theta", norm="l2", n_levels=200, mollify_eps=1e-3,
                 seed=0, detect_ties=True, check_nesting=True):
        self.domain = domain
        self.data = data
        self.norm = norm
        self.n_levels = n_levels
        self.mollify_eps = mollify_eps
        self.seed = seed
        self.detect_ties = detect_ties
        self.check_nesting = check_nesting

    def fit(self, X=None, y=None):
        check_positive(self.n_levels, "n_levels", integer=True)
        check_positive(self.mollify_eps, "mollify_eps")
        domain, data = self._resolve(X, y)
        self.field_ = solve(domain, data, _norm(self.norm), K=self.n_levels, mollify_eps=self.mollify_eps,
                            seed=self.seed, detect_ties=self.detect_ties, check_nesting=self.check_nesting)
        self.total_variation_ = self.field_.total_variation()
        self.tie_families_ = self.field_.tie_families()
        return self


class GridOracle(_FieldEstimator):
    """Primal-dual minimiser of the relaxed anisotropic energy on a grid."""

    def __init__(self, domain="disc", data="cos_theta", norm="l2", h=None, n_iter=20000):
        self.domain = domain
        self.data = data
        self.norm = norm
        self.h = h
        self.n_iter = n_iter

    def fit(self, X=None, y=None):
        check_positive(self.n_iter, "n_iter", integer=True)
        if self.h is not None:
            check_positive(self.h, "h")
        domain, data = self._resolve(X, y)
        self.problem_ = build_problem(domain, data, _norm(self.norm), self.h)
        self.field_ = minimize_relaxed(self.problem_, self.n_iter)
        self.energy_ = self.field_.energy
        return self


class TruncationSolver(_FieldEstimator):
    """Truncation loop on an unbounded domain.

    ``mode`` is ``"auto"`` (plain loop), ``"c0"`` (with the containment
    certificate) or a steering bias ``"axis-x"``, ``"axis-y"``, ``"mixed(x0)"``.
    """

    def __init__(self, domain="strip_exp", data="bump_train", norm="l2", n_levels=200, offsets=None,
                 probe_depth=5.0, stab_tol=1e-4, probe_box=None, mode="auto", seed=0, on_exhaust="raise"):
        self.domain = domain
        self.data = data
        self.norm = norm
        self.n_levels = n_levels
        self.offsets = offsets
        self.probe_depth = probe_depth
        self.stab_tol = stab_tol
        self.probe_box = probe_box
        self.mode = mode
        self.seed = seed
        self.on_exhaust = on_exhaust

    def fit(self, X=None, y=None):
        check_positive(self.n_levels, "n_levels", integer=True)
        check_positive(self.probe_depth, "probe_depth")
        check_positive(self.stab_tol, "stab_tol")
        domain = _domain(self.domain)
        data = _data(self.data, domain)
        norm = _norm(self.norm)
        kw = dict(probe_depth=self.probe_depth, stab_tol=self.stab_tol, probe_box=self.probe_box)
        if self.mode in ("auto", "c0"):
            sched = TruncationSchedule.default(domain, **kw)
        else:
            base = domain.curve(np.array(domain.param_near(np.zeros(2))))
            sched = TruncationSchedule.default(domain, base=base, **kw)
        if self.offsets is not None:
            sched = TruncationSchedule(sched.halfplane, tuple(self.offsets), **kw)
        args = dict(norm=norm, sched=sched, K=self.n_levels, seed=self.seed, on_exhaust=self.on_exhaust)
        if self.mode == "auto":
            self.result_ = solve_unbounded(domain, data, **args)
        elif self.mode == "c0":
            self.result_ = solve_c0_unique(domain, data, **args)
        else:
            self.result_ = steer_nonunique(domain, data, self.mode, **args)
        self.field_ = self.result_.field
        self.escape_report_ = self.result_.escape
        return self
