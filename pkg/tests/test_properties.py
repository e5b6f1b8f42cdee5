"""Property-based checks of invariants."""
import math

import numpy as np
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from lgsolve import boundary as bd
from lgsolve import catenoid as cat
from lgsolve import geometry as geo
from lgsolve import presets
from lgsolve.anisotropy import l1, l2, linf, lp, regularized_sequence
from lgsolve.chord_solver import _matrices, solve
from lgsolve.matching import brute_force_matching, dp_matching

coord = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)
point = st.tuples(coord, coord)
vec = arrays(np.float64, 2, elements=st.floats(-100, 100, allow_nan=False))
NORMS = [l2(), l1(), linf(), lp(3), regularized_sequence(l1(), 3)]
DISC = geo.disc(n=1024)


@given(point, point, point)
def test_orientation_antisymmetric_and_cyclic(a, b, c):
    o = geo.orient2d(a, b, c)
    assert geo.orient2d(b, a, c) == -o
    assert geo.orient2d(b, c, a) == o


@given(st.sampled_from(NORMS), vec, vec, st.floats(-50, 50, allow_nan=False))
def test_norm_axioms(n, x, y, a):
    assert n(x + y) <= n(x) + n(y) + 1e-9 * (1 + n(x) + n(y))
    assert math.isclose(n(a * x), abs(a) * n(x), rel_tol=1e-9, abs_tol=1e-9)
    lam, Lam = n.ellipticity
    r = float(np.hypot(*x))
    assert lam * r * (1 - 1e-3) <= n(x) <= Lam * r * (1 + 1e-3)


@given(st.sampled_from(NORMS), vec, vec)
def test_polar_inequality(n, eta, xi):
    if n(xi) > 1e-9:
        assert float(eta @ xi) <= n.polar_value(eta[None])[0] * n(xi) * (1 + 1e-6) + 1e-9


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 6), st.integers(0, 2**31 - 1))
def test_dp_equals_brute_force(m, seed):
    rng = np.random.default_rng(seed)
    s = np.sort(rng.uniform(0, DISC.perimeter, 2 * m))
    up = np.arange(2 * m) % 2 == seed % 2
    _, C, A, _ = _matrices(DISC, l2(), s, up)
    a = dp_matching(C, A)
    b = brute_force_matching(C, A)
    assert a.cost == b.cost


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 7), st.integers(0, 2**31 - 1))
def test_dp_matching_is_noncrossing_and_perfect(m, seed):
    rng = np.random.default_rng(seed)
    C = rng.uniform(0.1, 2.0, (2 * m, 2 * m))
    C = C + C.T
    res = dp_matching(C, np.zeros_like(C))
    used = sorted(i for p in res.pairs for i in p)
    assert used == list(range(2 * m))
    for i, j in res.pairs:
        for k, l in res.pairs:
            assert not (i < k < j < l)


@settings(max_examples=25, deadline=None)
@given(st.floats(1e-3, 0.2), st.floats(-0.9, 0.9), st.integers(2, 12))
def test_mollified_data_stays_in_range(eps, beta, n_jumps):
    f = presets.staircase(DISC, n_jumps)
    g = bd.mollify(f, bd.MollificationKernel(eps, beta))
    _, v = g.sample(512)
    assert v.min() >= -1e-12 and v.max() <= 1 + 1e-12


@settings(max_examples=40, deadline=None)
@given(st.floats(0.01, 0.55))
def test_catenoid_roots_and_areas(a):
    inst = cat.catenoid_roots(a)
    for c in inst.roots:
        assert inst.residual(c) <= 1e-12
    res = cat.catenoid_area(a)
    if inst.roots:
        assert res.value <= res.other_value + 1e-12
        assert math.isclose(res.value, cat.catenoid_area_quadrature(a, res.c), abs_tol=1e-10)


@settings(max_examples=6, deadline=None)
@given(st.integers(0, 10_000))
def test_solution_bounded_by_data(seed):
    f = presets.random_trig(DISC, seed=seed, modes=3)
    fld = solve(DISC, f, l2(), K=60)
    _, v = f.sample(2048)
    P = np.random.default_rng(seed).uniform(-0.95, 0.95, size=(200, 2))
    P = P[np.hypot(*P.T) < 0.95]
    u = fld(P)
    assert np.all(u >= v.min() - fld.dt) and np.all(u <= v.max() + fld.dt)
    assert fld.nesting["ok"]
    assert fld.total_variation() <= fld.boundary_mass(f) + 1e-3 * fld.scale(f)


@settings(max_examples=6, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.05, 0.5))
def test_adding_a_constant_shifts_solution(seed, c):
    f = presets.random_trig(DISC, seed=seed, modes=3)
    g = bd.BoundaryFunction(DISC, lambda s: f(s) + c, name="shifted")
    uf = solve(DISC, f, l2(), K=60)
    ug = solve(DISC, g, l2(), K=60)
    P = np.random.default_rng(seed + 1).uniform(-0.9, 0.9, size=(100, 2))
    P = P[np.hypot(*P.T) < 0.9]
    assert np.all(np.abs(ug(P) - uf(P) - c) <= uf.dt + ug.dt)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.0, 2 * math.pi), st.floats(0.0, 2 * math.pi))
def test_cap_areas_partition_disc(s0, s1):
    if abs(s0 - s1) > 1e-6:
        assert math.isclose(DISC.cap_area(s0, s1) + DISC.cap_area(s1, s0), DISC.area, rel_tol=1e-9)
