"""Property tests for the invariants of each module."""

from fractions import Fraction

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from conftest import STANDARD_OMEGA
from torilab.density import CongruenceCondition, crt_pair, density_of_union
from torilab.equidist import discrepancy_estimate, weyl_sum
from torilab.segments import attribute_solution, enumerate_segments
from torilab.theta import theta_values
from torilab.torus import (
    Endomorphism,
    TorsionPoint,
    apply_endomorphism,
    make_torus,
    reduce_mod_lattice,
    torsion_order,
    torus_distance,
)

TORUS = make_torus(STANDARD_OMEGA)
reals4 = arrays(np.float64, 4, elements=st.floats(-50, 50, allow_nan=False))
unit4 = arrays(np.float64, 4, elements=st.floats(0, 1, exclude_max=True))
ints4 = arrays(np.int64, 4, elements=st.integers(-1000, 1000))
fractions = st.builds(lambda p, q: Fraction(p, q), st.integers(-60, 60), st.integers(1, 60))
torsion = st.lists(fractions, min_size=4, max_size=4).map(TorsionPoint)


def _circ(a, b):
    d = np.abs(a - b)
    return np.minimum(d, 1 - d)


@settings(max_examples=100, deadline=None)
@given(reals4, ints4)
def test_reduce_invariant_under_integer_shift(v, m):
    a = reduce_mod_lattice(v + m)
    b = reduce_mod_lattice(v)
    assert np.all((a >= 0) & (a < 1))
    assert np.all(_circ(a, b) <= 1e-12)


@settings(max_examples=100, deadline=None)
@given(st.integers(-10, 10), st.integers(-10, 10), unit4)
def test_scalar_composition(a, b, p):
    lhs = apply_endomorphism(Endomorphism.scalar(a, 2), apply_endomorphism(Endomorphism.scalar(b, 2), p))
    rhs = apply_endomorphism(Endomorphism.scalar(a * b, 2), p)
    assert np.all(_circ(lhs, rhs) <= 1e-11)


@settings(max_examples=200, deadline=None)
@given(torsion)
def test_torsion_order_annihilates(t):
    k = torsion_order(t)
    assert t.scaled(k).is_origin()
    # minimality
    assert all(not t.scaled(d).is_origin() for d in range(1, k) if k % d == 0)


@settings(max_examples=100, deadline=None)
@given(unit4, unit4, unit4)
def test_triangle_inequality(p, q, r):
    assert torus_distance(TORUS, p, r) <= torus_distance(TORUS, p, q) + torus_distance(TORUS, q, r) + 1e-12


@settings(max_examples=100, deadline=None)
@given(unit4, unit4, ints4)
def test_distance_symmetric_and_periodic(p, q, m):
    d = torus_distance(TORUS, p, q)
    assert abs(d - torus_distance(TORUS, q, p)) <= 1e-12
    assert abs(d - torus_distance(TORUS, p, q + m)) <= 1e-9


@settings(max_examples=100, deadline=None)
@given(
    arrays(np.float64, 4, elements=st.floats(-1, 1)),
    arrays(np.int64, 2, elements=st.integers(-2, 2)),
    arrays(np.int64, 2, elements=st.integers(-2, 2)),
)
def test_theta_quasi_periodicity(x, m, n):
    tol = 1e-12
    om = STANDARD_OMEGA
    z = x[:2] + 1j * x[2:]
    lam = n + om @ m
    lhs = theta_values((z + lam)[None, :], om, tol=tol)[0]
    rhs = np.exp(-1j * np.pi * (m @ om @ m) - 2j * np.pi * (m @ z)) * theta_values(z[None, :], om, tol=tol)[0]
    assert abs(lhs - rhs) <= 10 * tol * max(1.0, abs(lhs))


@settings(max_examples=100, deadline=None)
@given(arrays(np.float64, 4, elements=st.floats(-2, 2)))
def test_theta_even(x):
    z = x[:2] + 1j * x[2:]
    a, b = theta_values(np.array([z, -z]), STANDARD_OMEGA, tol=1e-12)
    assert abs(a - b) <= 2e-12 * max(1.0, abs(a))


conditions = st.lists(
    st.integers(1, 30).flatmap(lambda k: st.builds(CongruenceCondition, st.integers(0, k - 1), st.just(k))),
    min_size=1,
    max_size=6,
)


@settings(max_examples=200, deadline=None)
@given(conditions)
def test_density_bounds_and_integrality(conds):
    res = density_of_union(conds)
    assert 0 <= res.delta <= 1
    assert (res.delta * res.bad_set_modulus).denominator == 1
    assert max(Fraction(1, c.k) for c in conds) <= res.delta <= sum(Fraction(1, c.k) for c in conds)


@settings(max_examples=100, deadline=None)
@given(conditions, conditions)
def test_density_monotone(a, b):
    assert density_of_union(a + b).delta >= density_of_union(a).delta


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 50), st.integers(1, 50), st.integers(0, 50), st.integers(1, 50))
def test_crt_solution_satisfies_both(r1, m1, r2, m2):
    r1, r2 = r1 % m1, r2 % m2
    sol = crt_pair(r1, m1, r2, m2)
    if sol is None:
        assert (r1 - r2) % np.gcd(m1, m2) != 0
    else:
        r, L = sol
        assert r % m1 == r1 and r % m2 == r2 and L == np.lcm(m1, m2)


@settings(max_examples=200, deadline=None)
@given(st.integers(-12, 12).filter(bool), unit4)
def test_attribution_contains_point(n, y):
    d = attribute_solution(y, n)
    assert d.contains(y)
    assert d.height <= abs(n)


@settings(max_examples=30, deadline=None)
@given(st.integers(-6, 6).filter(bool), st.integers(1, 2))
def test_segment_invariants(n, g):
    segs = list(enumerate_segments(n, g))
    assert len(segs) == (n if n > 0 else -n + 1) ** (2 * g)
    assert all(s.height <= abs(n) and not any(iv.is_empty() for iv in s.intervals) for s in segs)


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 60).flatmap(lambda n: arrays(np.float64, (n, 4), elements=st.floats(0, 1, exclude_max=True))), st.integers(2, 8))
def test_discrepancy_in_unit_interval(pts, grid):
    assert 0 <= discrepancy_estimate(pts, grid) <= 1


@settings(max_examples=100, deadline=None)
@given(unit4, arrays(np.int64, 4, elements=st.integers(-3, 3)).filter(lambda k: k.any()), st.integers(1, 300))
def test_weyl_magnitude_bounded(y, k, N):
    assert 0 <= weyl_sum(y, range(1, N + 1), k).magnitude <= 1
