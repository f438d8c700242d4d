import numpy as np
import pytest

from conftest import brute_theta
from torilab.divisor import (
    ThetaDivisor,
    contains,
    divisor_parts,
    evaluate,
    quasi_period_factor,
    sample_points,
    tangent_direction,
)
from torilab.errors import SingularPoint
from torilab.theta import ThetaCharacteristic
from torilab.torus import NearestPoints, pairwise_torus_distances


def _bisect(f, lo, hi, iters=80):
    flo = f(lo)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def test_evaluate_zero_found_by_bisection(square_torus, theta_div):
    # on i*I2 theta factors as theta3(z1) theta3(z2), real along z1 = 1/2 + i t
    rng = np.random.default_rng(0)
    z2 = complex(rng.random(), rng.random())
    f = lambda t: brute_theta([0.5 + 1j * t, z2], square_torus.omega).real
    t0 = _bisect(f, 0.3, 0.7)
    p = square_torus.coords_of(np.array([0.5 + 1j * t0, z2]))
    assert abs(evaluate(square_torus, theta_div, p)) <= 1e-9


def test_evaluate_parity_of_multiplier(std_torus):
    plus = ThetaDivisor.principal(2, multiplier=1)
    minus = ThetaDivisor.principal(2, multiplier=-1)
    P = np.random.default_rng(1).random((30, 4))
    assert np.allclose(evaluate(std_torus, plus, P), evaluate(std_torus, minus, P), rtol=1e-12, atol=1e-14)


def test_evaluate_origin(square_torus, theta_div):
    assert abs(evaluate(square_torus, theta_div, np.zeros(4)) - 1.1803405990160962) <= 1e-9
    assert not contains(square_torus, theta_div, np.zeros(4), 1e-6)


def test_contains_exact_zero(std_torus):
    odd = ThetaDivisor(ThetaCharacteristic(("1/2", "0"), ("1/2", "0")))
    for eps in (1e-3, 1e-9, 1e-15):
        assert contains(std_torus, odd, np.zeros(4), eps)


def test_contains_rejects_nonpositive_eps(std_torus, theta_div):
    with pytest.raises(ValueError):
        contains(std_torus, theta_div, np.zeros(4), 0.0)


def test_sample_points_contract(std_torus, shifted_div):
    pts = sample_points(std_torus, shifted_div, 10, seed=42)
    assert len(pts) == 10
    assert all(dp.residual <= 1e-9 for dp in pts)
    assert all(contains(std_torus, shifted_div, dp.point, 1e-8) for dp in pts)
    again = sample_points(std_torus, shifted_div, 10, seed=42)
    assert all(np.array_equal(a.point, b.point) and a.residual == b.residual for a, b in zip(pts, again))
    P = np.array([dp.point for dp in pts])
    D = pairwise_torus_distances(std_torus, P, P)
    assert np.all(D[~np.eye(10, dtype=bool)] > 1e-6)


def test_sample_points_multiplier_two(std_torus):
    D = ThetaDivisor.principal(2, translate=(0.05 + 0.02j, 0.01 - 0.03j), multiplier=2)
    for dp in sample_points(std_torus, D, 5, seed=3):
        assert contains(std_torus, D, dp.point, 1e-8)


def test_union_of_seeds_covers_better(std_torus, theta_div):
    probes = np.array([dp.point for dp in sample_points(std_torus, theta_div, 40, seed=999)])
    cloud = np.empty((0, 4))
    radii = []
    for seed in range(1, 33):
        cloud = np.vstack([cloud, [dp.point for dp in sample_points(std_torus, theta_div, 4, seed=seed)]])
        if seed in (1, 2, 4, 8, 16, 32):
            radii.append(float(np.max(NearestPoints(std_torus, cloud).query(probes)[0])))
    assert all(b <= a for a, b in zip(radii, radii[1:]))


def _polish(torus, D, p, steps=6):
    z = torus.lift(p)
    for _ in range(steps):
        parts = divisor_parts(torus, D, z[None, :], 1e-14, gradient=True)
        v, g = parts.value()[0], parts.gradient()[0]
        z = z - v * g.conj() / np.vdot(g, g).real
    return torus.coords_of(z) % 1.0


def test_tangent_direction_properties(std_torus, shifted_div):
    for dp in sample_points(std_torus, shifted_div, 5, seed=8):
        v = tangent_direction(std_torus, shifted_div, dp.point)
        grad = divisor_parts(std_torus, shifted_div, std_torus.lift(dp.point)[None, :], gradient=True).gradient()[0]
        scale = np.linalg.norm(grad)
        assert abs(grad @ v) <= 1e-8 * max(1.0, scale)
        assert abs(np.linalg.norm(v) - 1) <= 1e-12
        k = int(np.argmax(np.abs(v) > 1e-12))
        assert abs(v[k].imag) <= 1e-12
        # nudge off the divisor, polish back, and recompute
        q = _polish(std_torus, shifted_div, dp.point + 1e-7)
        w = tangent_direction(std_torus, shifted_div, q)
        assert np.linalg.norm(v - w) <= 1e-6


def test_tangent_direction_singular_point(square_torus, theta_div):
    # on E x E the theta divisor is two crossing curves; they meet where
    # both factors vanish, at z = ((1+i)/2, (1+i)/2)
    with pytest.raises(SingularPoint):
        tangent_direction(square_torus, theta_div, np.array([0.5, 0.5, 0.5, 0.5]))


def test_quasi_period_invariance(std_torus):
    D = ThetaDivisor(ThetaCharacteristic(("1/2", "0"), ("0", "1/2")), (0.1 + 0.03j, -0.05 + 0.02j), 2)
    rng = np.random.default_rng(12)
    tol = 1e-12
    for _ in range(20):
        p = rng.random(4)
        shift = rng.integers(-2, 3, size=4)
        z = std_torus.lift(p)
        lam = std_torus.lift(shift.astype(float))
        a = divisor_parts(std_torus, D, (z + lam)[None, :], tol).value()[0]
        b = quasi_period_factor(std_torus, D, z, shift) * divisor_parts(std_torus, D, z[None, :], tol).value()[0]
        assert abs(a - b) <= 10 * tol * max(1.0, abs(a))
