import numpy as np
import pytest

from lgsolve import anisotropy as an
from lgsolve.exceptions import DegenerateChord


def test_presets_values():
    x = np.array([3.0, -4.0])
    assert an.l2()(x) == pytest.approx(5.0)
    assert an.l1()(x) == pytest.approx(7.0)
    assert an.linf()(x) == pytest.approx(4.0)
    assert an.lp(3)(x) == pytest.approx((27 + 64) ** (1 / 3))


def test_ellipticity():
    lam, Lam = an.l1().ellipticity
    assert lam == pytest.approx(1.0)
    assert Lam == pytest.approx(np.sqrt(2), rel=1e-6)


def test_polar_norms():
    eta = np.array([[0.3, -0.7], [1.0, 2.0]])
    assert np.allclose(an.l2().polar_value(eta), np.hypot(*eta.T), rtol=1e-6)
    assert np.allclose(an.l1().polar_value(eta), np.max(np.abs(eta), axis=1), rtol=1e-6)
    assert np.allclose(an.linf().polar_value(eta), np.sum(np.abs(eta), axis=1), rtol=1e-6)


def test_strict_ball_certificates():
    assert an.l2().is_strict
    assert not an.l1().is_strict
    assert not an.linf().is_strict
    assert an.regularized_sequence(an.l1(), 3).is_strict
    wit = an.l1().certificate.witness
    assert len(wit) == 2


def test_poly_norm_matches_l1():
    square = an.poly([1, 0, 0, 1, -1, 0, 0, -1])
    x = np.random.default_rng(0).normal(size=(20, 2))
    assert np.allclose(square(x), an.l1()(x))


def test_parse_norm():
    assert an.parse_norm("l2").name == "l2"
    assert an.parse_norm("l1+l2/4")(np.array([1.0, 0.0])) == pytest.approx(1.25)
    assert an.parse_norm("sum(2*l1,1*l2)")(np.array([0.0, 1.0])) == pytest.approx(3.0)
    with pytest.raises(ValueError):
        an.parse_norm("nonsense")


def test_invalid_inputs():
    with pytest.raises(ValueError):
        an.lp(0.5)
    with pytest.raises(ValueError):
        an.norm_sum(-1, an.l1(), 1, an.l2())
    with pytest.raises(ValueError):
        an.regularized_sequence(an.l1(), 0)
    with pytest.raises(DegenerateChord):
        an.chord_cost(an.l2(), [0, 0], [0, 0])


def test_chord_cost_rotation():
    # the cost of a horizontal chord is the norm of the vertical normal
    n = an.norm_sum(1.0, an.l1(), 0.0, an.l2())
    assert an.chord_cost(an.l2(), [0, 0], [2, 0]) == pytest.approx(2.0)
    assert an.chord_cost(n, [0, 0], [1, 1]) == pytest.approx(2.0)


def test_project_polar_ball_feasible():
    rng = np.random.default_rng(1)
    px, py = rng.normal(size=(2, 100)) * 3
    for n in (an.l2(), an.l1(), an.regularized_sequence(an.l1(), 2)):
        qx, qy = n.project_polar_ball(px, py)
        assert np.all(n.polar_value(np.stack([qx, qy], -1)) <= 1 + 1e-6)
