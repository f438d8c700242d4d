import itertools
import math

import numpy as np
import pytest

from torilab.equidist import (
    GOLDEN_TEST_POINT,
    approximating_translates,
    discrepancy_estimate,
    orbit,
    weyl_sum,
)
from torilab.errors import GridOverflow
from torilab.torus import torus_distance

FREQUENCIES = [(1, 0, 0, 0), (0, 1, 0, 0), (1, 1, 0, 0), (1, -1, 0, 0), (2, 1, 1, 1)]


def test_weyl_origin():
    for k in FREQUENCIES:
        assert weyl_sum(np.zeros(4), range(1, 50), k).magnitude == pytest.approx(1.0, abs=1e-15)


def test_weyl_rational_full_period():
    y = np.array([1 / 7, 3 / 7, 0, 5 / 7])
    for k in [(1, 0, 0, 0), (0, 1, 1, 1), (2, 0, 0, 3)]:
        assert weyl_sum(y, range(1, 7 * 300 + 1), k).magnitude <= 1e-12


def test_weyl_golden_point():
    assert weyl_sum(GOLDEN_TEST_POINT, range(1, 10**4 + 1), (1, 0, 0, 0)).magnitude <= 0.02


def test_weyl_decays_between_scales():
    for k in FREQUENCIES:
        small = weyl_sum(GOLDEN_TEST_POINT, range(1, 101), k).magnitude
        large = weyl_sum(GOLDEN_TEST_POINT, range(1, 10**4 + 1), k).magnitude
        assert large < small


def test_weyl_against_direct_sum():
    y = np.array([0.1234, 0.5678, 0.9012, 0.3456])
    k = (2, -1, 3, 1)
    n = np.arange(1, 500)
    direct = abs(np.mean(np.exp(2j * np.pi * (n[:, None] * y) @ np.array(k))))
    assert weyl_sum(y, n, k).magnitude == pytest.approx(direct, abs=1e-12)


def test_weyl_zero_frequency_rejected():
    with pytest.raises(ValueError):
        weyl_sum(np.zeros(4), [1, 2], (0, 0, 0, 0))


@pytest.mark.parametrize("m", [3, 4, 6])
def test_discrepancy_regular_grid(m):
    pts = np.array(list(itertools.product(np.arange(m) / m, repeat=4)))
    assert discrepancy_estimate(pts, m) <= 2 * 2 / m + 1e-12


def test_discrepancy_single_point():
    for grid in (2, 5):
        assert discrepancy_estimate(np.array([[0.01, 0.02, 0.03, 0.04]]), grid) >= 1 - 1 / grid**4 - 1e-12


def test_discrepancy_bounds_and_refinement():
    rng = np.random.default_rng(6)
    for _ in range(10):
        pts = rng.random((int(rng.integers(1, 300)), 4))
        d2, d4, d8 = (discrepancy_estimate(pts, gr) for gr in (2, 4, 8))
        assert 0 <= d2 <= d4 <= d8 <= 1


def test_discrepancy_brute_force_small():
    rng = np.random.default_rng(9)
    pts = rng.random((40, 2))
    grid = 5
    best = 0.0
    for j1 in range(1, grid + 1):
        for j2 in range(1, grid + 1):
            inside = np.mean((pts[:, 0] < j1 / grid) & (pts[:, 1] < j2 / grid))
            best = max(best, abs(inside - j1 * j2 / grid**2))
    assert discrepancy_estimate(pts, grid) == pytest.approx(best, abs=1e-15)


def test_discrepancy_golden_orbit_nonincreasing():
    d = [discrepancy_estimate(orbit(GOLDEN_TEST_POINT, N), 10) for N in (100, 1000, 10000)]
    assert d[0] >= d[1] >= d[2]


def test_discrepancy_decays_on_irrational_projection():
    y = np.array(GOLDEN_TEST_POINT[:2])
    d = [discrepancy_estimate(orbit(y, N), 20) for N in (100, 1000, 10000)]
    assert d[0] > d[1] > d[2]


def test_grid_overflow():
    with pytest.raises(GridOverflow):
        discrepancy_estimate(np.zeros((1, 4)), 101)


def test_approximation_exact_hit(std_torus):
    y = np.array([0.3, 0.1, 0.7, 0.2])
    tr = approximating_translates(std_torus, y, y, 5)
    n, a, d = tr.steps[0]
    assert n == 1 and d == 0.0


def test_approximation_trace_contract(std_torus):
    rng = np.random.default_rng(12)
    y, x = rng.random(4), rng.random(4)
    tr = approximating_translates(std_torus, y, x, 20000, chunk=777)
    ds = [d for _, _, d in tr.steps]
    assert all(b < a for a, b in zip(ds, ds[1:]))
    for n, a, d in tr.steps:
        lifted = n * y + np.array(a)
        amb = (lifted - x) @ std_torus.basis.T
        assert np.linalg.norm(amb) == pytest.approx(d, abs=1e-9)
        assert d == pytest.approx(torus_distance(std_torus, x, (n * y) % 1.0), abs=1e-9)
    # chunking does not change the trace
    assert tr.steps == approximating_translates(std_torus, y, x, 20000).steps


def test_approximation_long_run(std_torus):
    rng = np.random.default_rng(2024)
    y, x = rng.random(4), rng.random(4)
    assert approximating_translates(std_torus, y, x, 10**5).final_dist <= 0.05

