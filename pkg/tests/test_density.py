from fractions import Fraction

import numpy as np
import pytest

from torilab.density import (
    CongruenceCondition,
    crt_pair,
    density_by_enumeration,
    density_by_inclusion_exclusion,
    density_of_union,
    empirical_bad_fraction,
    exceptional_set,
    find_torsion_pairs,
    solve_discrete_log,
)
from torilab.errors import ModulusOverflow
from torilab.torus import TorsionPoint, torus_distance

TP = TorsionPoint.parse


def brute_density(conds):
    """Residue count over one full period, independent of both library paths."""
    L = 1
    for c in conds:
        L = L * c.k // np.gcd(L, c.k)
    hits = sum(1 for n in range(L) if any(n % c.k == c.e for c in conds))
    return Fraction(hits, L)


def brute_log(t, tp):
    k = 1
    for c in t:
        k = k * c.denominator // np.gcd(k, c.denominator)
    for e in range(k):
        if t.scaled(e) == tp:
            return e, k
    return None


def test_condition_validation():
    with pytest.raises(ValueError):
        CongruenceCondition(2, 2)
    with pytest.raises(ValueError):
        CongruenceCondition(0, 0)


def test_discrete_log_examples():
    c = solve_discrete_log(TP(["1/5", "0", "0", "0"]), TP(["3/5", "0", "0", "0"]))
    assert (c.e, c.k) == (3, 5)
    c = solve_discrete_log(TP(["1/2", "1/3", "0", "0"]), TP(["1/2", "2/3", "0", "0"]))
    assert (c.e, c.k) == (5, 6)
    assert solve_discrete_log(TP(["1/2", "0", "0", "0"]), TP(["1/3", "0", "0", "0"])) is None


def test_discrete_log_against_brute_force():
    rng = np.random.default_rng(17)
    checked = 0
    while checked < 500:
        dens = rng.integers(1, 25, size=4)
        t = TorsionPoint([Fraction(int(rng.integers(0, q)), int(q)) for q in dens])
        if rng.random() < 0.5:
            tp = t.scaled(int(rng.integers(0, 1000)))
        else:
            tp = TorsionPoint([Fraction(int(rng.integers(0, q)), int(q)) for q in rng.integers(1, 25, size=4)])
        got = solve_discrete_log(t, tp)
        want = brute_log(t, tp)
        assert (None if got is None else (got.e, got.k)) == want
        checked += 1


def test_torsion_pairs_examples():
    assert find_torsion_pairs([TP(["1/5", "0", "0", "0"])], []) == []
    pairs = find_torsion_pairs([TP(["1/5", "0", "0", "0"])], [TP(["3/5", "0", "0", "0"]), TP(["1/3", "0", "0", "0"])])
    assert [(c.e, c.k) for _, c in pairs] == [(3, 5)]
    assert exceptional_set(pairs) == [TP(["3/5", "0", "0", "0"])]
    origin = TP(["0"] * 4)
    pairs = find_torsion_pairs([TP(["1/7", "2/7", "0", "0"])], [origin])
    assert [(c.e, c.k) for _, c in pairs] == [(0, 7)]


def test_density_examples():
    assert density_of_union([]).delta == 0
    assert density_of_union([CongruenceCondition(1, 2)]).delta == Fraction(1, 2)
    res = density_of_union([CongruenceCondition(1, 2), CongruenceCondition(2, 3)])
    assert res.delta == Fraction(2, 3)
    assert res.as_dict()["delta"] == "2/3"
    assert res.bad_set_modulus == 6


def _random_conditions(rng, max_k=40, max_n=6):
    out = []
    for _ in range(int(rng.integers(1, max_n + 1))):
        k = int(rng.integers(1, max_k + 1))
        out.append(CongruenceCondition(int(rng.integers(0, k)), k))
    return out


def test_enumeration_equals_inclusion_exclusion():
    rng = np.random.default_rng(23)
    for _ in range(200):
        conds = _random_conditions(rng)
        res = density_of_union(conds)
        if res.bad_set_modulus > 10**4:
            continue
        assert density_by_enumeration(conds) == density_by_inclusion_exclusion(conds) == brute_density(conds)


def test_density_invariants():
    rng = np.random.default_rng(29)
    for _ in range(100):
        conds = _random_conditions(rng)
        res = density_of_union(conds)
        assert 0 <= res.delta <= 1
        assert (res.delta * res.bad_set_modulus).denominator == 1
        assert max(Fraction(1, c.k) for c in conds) <= res.delta <= sum(Fraction(1, c.k) for c in conds)
        extra = _random_conditions(rng, max_n=1)
        assert density_of_union(conds + extra).delta >= res.delta


def test_large_modulus_uses_inclusion_exclusion():
    primes = [101, 103, 107, 109]
    conds = [CongruenceCondition(1, p) for p in primes]
    res = density_of_union(conds)
    assert res.method == "inclusion-exclusion"
    prod = 1 - np.prod([Fraction(p - 1, p) for p in primes])
    assert res.delta == prod
    with pytest.raises(ModulusOverflow):
        density_by_enumeration(conds)


def test_inclusion_exclusion_budget():
    conds = [CongruenceCondition(0, k) for k in range(2, 24)]
    with pytest.raises(ModulusOverflow):
        density_by_inclusion_exclusion(conds)


def test_crt_pair_against_brute_force():
    for m1 in range(1, 13):
        for m2 in range(1, 13):
            for r1 in range(m1):
                for r2 in range(m2):
                    got = crt_pair(r1, m1, r2, m2)
                    sols = [x for x in range(m1 * m2) if x % m1 == r1 and x % m2 == r2]
                    if not sols:
                        assert got is None
                    else:
                        assert got == (sols[0], int(np.lcm(m1, m2)))


def test_empirical_origin_never_approaches(std_torus):
    x = np.array([0.3, 0.4, 0.1, 0.2])
    eps = 0.5 * torus_distance(std_torus, x, np.zeros(4))
    assert empirical_bad_fraction(std_torus, x, np.zeros(4), 1000, eps) == 0.0


def test_empirical_torsion_fraction(std_torus):
    t, tp = TP(["1/5", "0", "2/5", "0"]), TP(["3/5", "0", "1/5", "0"])
    assert (solve_discrete_log(t, tp).e, solve_discrete_log(t, tp).k) == (3, 5)
    for N in (50, 500, 5000):
        frac = empirical_bad_fraction(std_torus, tp.as_float(), t.as_float(), N, 1e-9)
        assert abs(frac - 0.2) <= 1 / N


def test_empirical_matches_exact_density_on_torsion(std_torus):
    ys = [TP(["1/4", "0", "1/2", "0"]), TP(["0", "1/6", "0", "1/3"])]
    xs = [TP(["1/2", "0", "0", "0"]), TP(["0", "1/2", "0", "0"]), TP(["0", "0", "0", "2/3"])]
    pairs = find_torsion_pairs(ys, xs)
    res = density_of_union([c for _, c in pairs])
    from torilab.density import empirical_union_fraction

    N = 10 * res.bad_set_modulus
    frac = empirical_union_fraction(std_torus, [x.as_float() for x in xs], [y.as_float() for y in ys], N, 1e-9)
    assert frac == pytest.approx(float(res.delta), abs=1e-12)


def test_empirical_generic_volume_heuristic(std_torus):
    rng = np.random.default_rng(31)
    x = rng.random(4)
    y = np.array([np.sqrt(2) % 1, np.sqrt(3) % 1, np.sqrt(5) % 1, np.sqrt(7) % 1])
    eps = 0.01
    frac = empirical_bad_fraction(std_torus, x, y, 10**5, eps)
    assert frac <= 10 * eps**4
