import numpy as np
import pytest

from lgsolve import geometry as geo
from lgsolve import presets
from lgsolve.exceptions import NoConeDirections, NonIntegrableData, NoStabilization, NotC0Data, NotStripDomain
from lgsolve.unbounded import (Escape, EscapeReport, ProbeSlab, TruncationSchedule, boundary_along,
                               certify_strip_bv, escape_report, slab_tv, solve_c0_unique, solve_truncated,
                               solve_unbounded, steering_cap, u_shortcut_saving, verify_single_escape)


@pytest.fixture(scope="module")
def strip():
    return presets.strip_exp()


@pytest.fixture(scope="module")
def h0(strip):
    return geo.supporting_halfplane(strip, (0.0, 0.0))


def test_schedule_validation(h0):
    s = TruncationSchedule(h0)
    assert s.offsets == tuple(5.0 * n for n in range(1, 9))
    assert s.budget == 8
    with pytest.raises(ValueError):
        TruncationSchedule(h0, (5.0, 6.0))
    with pytest.raises(ValueError):
        TruncationSchedule(h0, (5.0, 10.0), stab_tol=0.0)


def test_probe_slab(strip, h0):
    p = ProbeSlab(strip, h0, 3.0, n=60)
    assert np.all(h0.depth(p.points) < 3.0)
    exact = 2 * (3.0 - (1 - np.exp(-3.0)))  # integral of 2(1 - e^-x) over (0, 3)
    assert p.area == pytest.approx(exact, rel=0.03)
    assert p.l1(np.ones(len(p.points)), np.zeros(len(p.points))) == pytest.approx(p.area)


def test_monotone_data_escapes_once(strip, h0):
    fld = solve_truncated(strip, presets.monotone_y(strip), h0, 10.0, K=40, level_range=(-1.0, 1.0))
    rep = escape_report(fld)
    assert set(rep.counts) == {1}
    assert verify_single_escape(rep)["pass"]
    for es in rep.escapes:
        assert es[0].direction[0] > 0.9


def test_bump_stays_bounded(strip, h0):
    f = presets.make_data("bump(1)", strip)
    fld = solve_truncated(strip, f, h0, 10.0, K=40)
    assert set(escape_report(fld).counts) == {0}


def test_u_shortcut_formula(h0):
    # two horizontal halflines at distance 1, cut at depth D = 10 from feet at depth 0
    e1 = Escape(0.0, (0.0, 0.5), (1.0, 0.0), (20.0, 0.5))
    e2 = Escape(0.0, (0.0, -0.5), (1.0, 0.0), (20.0, -0.5))
    w = u_shortcut_saving(e1, e2, h0, 10.0)
    assert w["saving"] == pytest.approx(19.0)
    rep = EscapeReport([0.0], [[e1, e2]], [], h0, 10.0)
    v = verify_single_escape(rep)
    assert not v["pass"] and v["witness"]["saving"] > 0
    with pytest.raises(ValueError):
        u_shortcut_saving(Escape(0.0, (0, 0), (-1.0, 0.0), (0, 0)), e2, h0, 10.0)


def test_solve_unbounded_exhaustion(strip):
    f = presets.monotone_y(strip)
    sched = TruncationSchedule.default(strip, budget=3, stab_tol=1e-12)
    with pytest.raises(NoStabilization) as err:
        solve_unbounded(strip, f, sched=sched, K=40)
    res = err.value.result
    assert res is not None and not res.stabilized
    assert len(res.increments) == 2
    res2 = solve_unbounded(strip, f, sched=sched, K=40, on_exhaust="return")
    assert not res2.stabilized


def test_c0_certificate(strip):
    f = presets.make_data("bump(1)", strip)
    sched = TruncationSchedule.default(strip, budget=4)
    res = solve_c0_unique(strip, f, sched=sched, K=60, on_exhaust="return")
    c = res.certificate
    assert c["pass"] and c["levels_checked"] > 0 and c["min_margin"] >= 0
    assert c["tail_sup"] == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(NotC0Data):
        solve_c0_unique(strip, presets.monotone_y(strip), sched=sched, K=20)


def test_strip_bv_bound(strip):
    f = presets.make_data("bump(1)", strip)
    res = solve_unbounded(strip, f, sched=TruncationSchedule.default(strip, budget=3), K=60,
                          on_exhaust="return")
    b = certify_strip_bv(strip, res.field, f)
    assert b["pass"]
    assert b["poincare_constant"] == b["width"]
    assert max(b["slab_bv"]) <= b["bound"]
    with pytest.raises(NonIntegrableData):
        certify_strip_bv(strip, res.field, presets.bump_train(strip))
    H = presets.hyperbola()
    with pytest.raises(NotStripDomain):
        certify_strip_bv(H, res.field, f)


def test_slab_tv_monotone_in_X(strip, h0):
    fld = solve_truncated(strip, presets.bump_train(strip), h0, 12.0, K=60)
    vals = [slab_tv(fld, X) for X in (1.0, 3.0, 6.0, 10.0)]
    assert all(b >= a for a, b in zip(vals, vals[1:]))
    assert slab_tv(fld, 12.0) == pytest.approx(slab_tv(fld, 5.0) + slab_tv(fld, 12.0, X0=5.0), rel=1e-12)


def test_boundary_along_hits_boundary():
    H = presets.hyperbola()
    p = np.array([[2.0, 3.0], [1.5, 1.5]])
    q = boundary_along(H, p, np.array([0.0, 1.0]))
    assert np.allclose(q[:, 0] * q[:, 1], 1.0, atol=1e-9)
    assert np.allclose(q[:, 0], p[:, 0])


def test_steering_caps_differ():
    H = presets.hyperbola()
    f = presets.exp_decay(H)
    p = np.array([[5.0, 5.0]])
    ax = steering_cap(H, f, "axis-x")(p)[0]
    ay = steering_cap(H, f, "axis-y")(p)[0]
    assert ax == pytest.approx(np.exp(-5.0), rel=1e-6)
    assert ay == pytest.approx(np.exp(-0.2), rel=1e-6)
    mixed = steering_cap(H, f, "mixed(3)")
    assert mixed(np.array([[2.0, 50.0]]))[0] == pytest.approx(np.exp(-2.0), rel=1e-6)
    with pytest.raises(ValueError):
        steering_cap(H, f, "sideways")


def test_parallel_branches_have_no_cone(strip):
    with pytest.raises(NoConeDirections):
        steering_cap(strip, presets.monotone_y(strip), "axis-x")
