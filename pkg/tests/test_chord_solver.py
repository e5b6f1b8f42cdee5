import numpy as np
import pytest

from lgsolve import geometry as geo
from lgsolve import presets
from lgsolve.anisotropy import l1, l2, regularized_sequence
from lgsolve.boundary import BoundaryFunction
from lgsolve.chord_solver import level_crossings, level_grid, l1_distance, solve
from lgsolve.exceptions import NotStrictBall


@pytest.fixture(scope="module")
def disc():
    return geo.disc()


@pytest.fixture(scope="module")
def cos_field(disc):
    return solve(disc, presets.cos_theta(disc), l2(), K=200)


def test_level_grid_inside_range():
    t, dt = level_grid(-1.0, 1.0, 50, seed=3)
    assert dt == pytest.approx(0.04)
    assert np.all(np.diff(t) > 0)
    assert t.min() > -1 and t.max() < 1
    t2, _ = level_grid(-1.0, 1.0, 50, seed=3)
    assert np.array_equal(t, t2)


def test_level_crossings_of_cos(disc):
    c = level_crossings(presets.cos_theta(disc), 0.5)
    assert c.m == 1
    pts = disc.point_at(c.s)
    assert np.allclose(pts[:, 0], 0.5, atol=1e-6)


def test_cos_theta_solution_is_x(disc, cos_field):
    P = np.random.default_rng(0).uniform(-0.7, 0.7, size=(200, 2))
    assert np.max(np.abs(cos_field(P) - P[:, 0])) <= 1.5 * cos_field.dt
    # |grad x| = 1, so the total variation is the disc area
    assert cos_field.total_variation() == pytest.approx(np.pi, rel=2e-3)
    assert cos_field.boundary_mass() == pytest.approx(4.0, rel=1e-3)
    assert cos_field.nesting["ok"]


def test_predict_alias_and_outside(cos_field):
    P = np.array([[0.2, 0.1], [3.0, 0.0]])
    out = cos_field.predict(P)
    assert np.isfinite(out[0]) and np.isnan(out[1])


def test_bisect_matches_linear_scan(cos_field):
    P = np.random.default_rng(1).uniform(-0.9, 0.9, size=(300, 2))
    P = P[np.hypot(*P.T) < 0.95]
    assert np.array_equal(cos_field(P, method="bisect"), cos_field(P, method="scan"))


def test_constant_data(disc):
    fld = solve(disc, presets.constant(disc, 0.7), l2(), K=50)
    assert np.allclose(fld(np.array([[0.0, 0.0], [0.5, 0.2]])), 0.7)
    assert fld.total_variation() == 0


def test_maximum_principle(disc):
    f = presets.random_trig(disc, seed=4)
    fld = solve(disc, f, l2(), K=100)
    _, v = f.sample(4096)
    P = np.random.default_rng(2).uniform(-0.99, 0.99, size=(500, 2))
    P = P[np.hypot(*P.T) < 0.99]
    u = fld(P)
    assert u.min() >= v.min() - fld.dt and u.max() <= v.max() + fld.dt


def test_non_strict_norm_rejected(disc):
    with pytest.raises(NotStrictBall):
        solve(disc, presets.cos_theta(disc), l1(), K=20)


def test_domain_mismatch(disc):
    other = geo.disc()
    with pytest.raises(ValueError):
        solve(disc, presets.cos_theta(other), l2(), K=20)


def test_two_plateaus_tie(disc):
    fld = solve(disc, presets.two_plateaus(disc), l2(), K=40, mollify_eps=1e-3)
    fams = fld.tie_families()
    assert len(fams) == 1
    assert fams[0]["area"] == pytest.approx(2.0, rel=0.1)


def test_schedule_log(disc):
    fld = solve(disc, presets.staircase(disc, 4), l2(), K=40, schedule=[1e-2, 1e-3])
    assert [e["eps"] for e in fld.schedule_log] == [1e-2, 1e-3]
    assert fld.knobs["mollify_eps"] == 1e-3


def test_anisotropic_energy(disc):
    norm = regularized_sequence(l1(), 2)
    fld = solve(disc, presets.cos_theta(disc), norm, K=100)
    assert fld.total_variation() <= fld.boundary_mass() + 1e-3 * fld.scale()


def test_seed_determinism(disc):
    f = presets.random_trig(disc, seed=9)
    a = solve(disc, f, l2(), K=60, seed=5)
    b = solve(disc, f, l2(), K=60, seed=5)
    P = np.array([[0.1, 0.2], [-0.4, 0.3]])
    assert np.array_equal(a(P), b(P))
    assert l1_distance(a, b, disc) == 0


def test_user_boundary_function(disc):
    f = BoundaryFunction(disc, lambda s: disc.point_at(s)[..., 1], name="y")
    fld = solve(disc, f, l2(), K=100)
    assert fld(np.array([[0.3, 0.4]]))[0] == pytest.approx(0.4, abs=fld.dt * 1.5)
