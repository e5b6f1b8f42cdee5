import numpy as np
import pytest

from lgsolve import geometry as geo
from lgsolve.anisotropy import l2
from lgsolve.chord_solver import _matrices
from lgsolve.matching import brute_force_matching, dp_matching, enumerate_matchings

CATALAN = [1, 1, 2, 5, 14, 42, 132]


@pytest.mark.parametrize("m", range(7))
def test_enumeration_counts(m):
    assert sum(1 for _ in enumerate_matchings(2 * m)) == CATALAN[m]


def test_dp_on_square():
    # edge midpoints of a unit square: both matchings of neighbours cost sqrt(2)
    d = geo.polygon_domain([(0, 0), (1, 0), (1, 1), (0, 1)])
    s = np.array([0.5, 1.5, 2.5, 3.5])
    _, C, A, _ = _matrices(d, l2(), s, np.array([True, False, True, False]))
    res = dp_matching(C, A, tol=1e-12)
    assert res.cost == pytest.approx(np.sqrt(2))
    assert res.tie


def test_dp_rectangle_prefers_short_chords():
    d = geo.polygon_domain([(0, 0), (4, 0), (4, 1), (0, 1)])
    s = np.array([1.0, 3.0, 6.0, 8.0])  # two points on the bottom, two on the top
    _, C, A, _ = _matrices(d, l2(), s, np.array([True, False, True, False]))
    res = dp_matching(C, A)
    assert sorted(res.pairs) == [(0, 3), (1, 2)]
    assert res.cost == pytest.approx(2.0)


def test_odd_count_rejected():
    with pytest.raises(ValueError):
        dp_matching(np.zeros((3, 3)), np.zeros((3, 3)))


def test_empty():
    assert dp_matching(np.zeros((0, 0)), np.zeros((0, 0))).pairs == []


def test_random_against_brute_force():
    rng = np.random.default_rng(3)
    d = geo.disc()
    for _ in range(100):
        m = int(rng.integers(1, 7))
        s = np.sort(rng.uniform(0, d.perimeter, 2 * m))
        up = np.arange(2 * m) % 2 == 0
        _, C, A, _ = _matrices(d, l2(), s, up)
        a = dp_matching(C, A, tol=1e-12)
        b = brute_force_matching(C, A, tol=1e-12)
        assert a.cost == b.cost
        assert a.area == pytest.approx(b.area)
        assert a.tie == b.tie
