import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from lgsolve.exceptions import ConfigError
from lgsolve import geometry as geo
from lgsolve.estimators import GridOracle, LeastGradientSolver, TruncationSolver, data_from_samples
from lgsolve._validation import check_box, check_points, check_positive, check_values


def test_params_roundtrip():
    est = LeastGradientSolver(n_levels=50, norm="l1+l2/2")
    p = est.get_params()
    assert p["n_levels"] == 50 and p["norm"] == "l1+l2/2"
    c = clone(est)
    assert c.get_params() == p
    est.set_params(n_levels=60)
    assert est.n_levels == 60


def test_fit_predict_cos():
    est = LeastGradientSolver(n_levels=100).fit()
    P = np.array([[0.2, 0.3], [-0.5, 0.0]])
    assert np.allclose(est.predict(P), P[:, 0], atol=2 * est.field_.dt)
    assert est.total_variation_ == pytest.approx(np.pi, rel=5e-3)
    assert est.tie_families_ == []


def test_fit_from_boundary_samples():
    d = geo.disc()
    ang = np.linspace(0, 2 * np.pi, 400, endpoint=False)
    X = np.stack([np.cos(ang), np.sin(ang)], axis=1)
    y = X[:, 1]
    est = LeastGradientSolver(domain=d, n_levels=100).fit(X, y)
    assert est.predict(np.array([[0.1, 0.4]]))[0] == pytest.approx(0.4, abs=0.03)
    g = data_from_samples(d, X, y)
    assert g(d.param_of(np.array([[0.0, 1.0]])))[0] == pytest.approx(1.0, abs=1e-3)


def test_predict_before_fit():
    with pytest.raises(NotFittedError):
        LeastGradientSolver().predict(np.zeros((1, 2)))


def test_invalid_parameters():
    with pytest.raises(ConfigError):
        LeastGradientSolver(n_levels=0).fit()
    with pytest.raises(ConfigError):
        GridOracle(n_iter=-5).fit()
    with pytest.raises(ValueError):
        LeastGradientSolver().fit(np.zeros((3, 2)))
    with pytest.raises(ValueError):
        LeastGradientSolver(domain="strip_exp", data="bump_train").fit(np.zeros((3, 2)), np.zeros(3))


def test_grid_oracle_estimator():
    est = GridOracle(domain=geo.disc(n=512), h=0.05, n_iter=2000).fit()
    assert np.isfinite(est.energy_)
    assert est.predict(np.array([[0.3, 0.0]]))[0] == pytest.approx(0.3, abs=0.05)


def test_truncation_estimator_c0():
    est = TruncationSolver(data="bump(1)", n_levels=60, offsets=(5, 10, 15), mode="c0",
                           on_exhaust="return").fit()
    assert est.result_.certificate["pass"]
    assert set(est.escape_report_.counts) == {0}
    assert est.predict(np.array([[1.0, 0.0]]))[0] > 0


def test_validation_helpers():
    assert check_points([[1, 2]]).shape == (1, 2)
    with pytest.raises(ValueError):
        check_points([[1, 2, 3]])
    with pytest.raises(ValueError):
        check_points([[np.nan, 0.0]])
    with pytest.raises(ValueError):
        check_values([1.0, 2.0], 3)
    with pytest.raises(ConfigError):
        check_positive(-1, "x")
    with pytest.raises(ConfigError):
        check_positive(1.5, "n", integer=True)
    assert check_box([0, 0, 1, 2]) == (0.0, 0.0, 1.0, 2.0)
    with pytest.raises(ConfigError):
        check_box([1, 0, 0, 1])
