"""Torsion-forced congruences and their natural density.

If t is a torsion point of Y and t' one of X, then t' lies on [n]Y at t
exactly when n t = t', i.e. for n in one residue class e mod k where k is
the order of t.  The density of the union of those classes is the share of
n for which X ∩ [n]Y is forced to be nonempty by torsion.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd, lcm

import numpy as np

from .errors import ModulusOverflow
from .torus import AbelianTorus, TorsionPoint, reduce_mod_lattice, torsion_order

ENUMERATION_LIMIT = 10**6
INCLUSION_EXCLUSION_LIMIT = 20


@dataclass(frozen=True, order=True)
class CongruenceCondition:
    e: int
    k: int

    def __post_init__(self):
        if self.k < 1 or not (0 <= self.e < self.k):
            raise ValueError(f"need 0 <= e < k, got e={self.e}, k={self.k}")

    def holds(self, n: int) -> bool:
        return n % self.k == self.e


@dataclass(frozen=True)
class DensityResult:
    delta: Fraction
    conditions: tuple
    bad_set_modulus: int
    method: str = "enumeration"

    def as_dict(self) -> dict:
        return {
            "delta": f"{self.delta.numerator}/{self.delta.denominator}",
            "delta_decimal": float(self.delta),
            "bad_set_modulus": self.bad_set_modulus,
            "method": self.method,
            "conditions": [[c.e, c.k] for c in self.conditions],
        }


def crt_pair(r1: int, m1: int, r2: int, m2: int):
    """Solve x = r1 (mod m1), x = r2 (mod m2) for arbitrary moduli.

    Returns (r, lcm) or None when the system is inconsistent.
    """
    g = gcd(m1, m2)
    if (r2 - r1) % g:
        return None
    m1g, m2g = m1 // g, m2 // g
    # m1 * s = r2 - r1 (mod m2) has s = ((r2 - r1)/g) * inv(m1/g) mod m2/g
    s = ((r2 - r1) // g) * pow(m1g, -1, m2g) % m2g if m2g > 1 else 0
    L = m1 * m2g
    return (r1 + m1 * s) % L, L


def solve_discrete_log(t: TorsionPoint, t_prime: TorsionPoint) -> CongruenceCondition | None:
    """Least e in [0, k) with e t = t' (k the order of t), or None if t' is
    not a multiple of t.

    Coordinatewise, e p/q = p'/q' (mod 1) needs q' | q and then fixes e modulo
    q; the coordinate conditions are glued by the Chinese remainder theorem.
    """
    if len(t) != len(t_prime):
        raise ValueError("torsion points have different dimensions")
    k = torsion_order(t)
    r, m = 0, 1
    for c, cp in zip(t, t_prime):
        p, q = c.numerator, c.denominator
        pp, qp = cp.numerator, cp.denominator
        if q % qp:
            return None
        if q == 1:
            continue
        target = pp * (q // qp)
        sol = crt_pair(r, m, target * pow(p, -1, q) % q, q)
        if sol is None:
            return None
        r, m = sol
    # m equals k here; keep the check explicit
    assert k % m == 0
    return CongruenceCondition(r % k, k)


def find_torsion_pairs(y_torsion, x_torsion):
    """All (t, t') with t' in <t>, each paired with its congruence condition.

    The matched t' values make up the exceptional set V.
    """
    out = []
    for t in y_torsion:
        for tp in x_torsion:
            cond = solve_discrete_log(t, tp)
            if cond is not None:
                out.append(((t, tp), cond))
    return out


def exceptional_set(pairs) -> list[TorsionPoint]:
    seen = []
    for (_, tp), _ in pairs:
        if tp not in seen:
            seen.append(tp)
    return seen


def _modulus(conditions) -> int:
    return lcm(*(c.k for c in conditions)) if conditions else 1


def density_by_enumeration(conditions) -> Fraction:
    L = _modulus(conditions)
    if L > ENUMERATION_LIMIT:
        raise ModulusOverflow(f"modulus {L} exceeds the enumeration budget {ENUMERATION_LIMIT}")
    mask = np.zeros(L, dtype=bool)
    for c in conditions:
        mask[c.e :: c.k] = True
    return Fraction(int(mask.sum()), L)


def density_by_inclusion_exclusion(conditions) -> Fraction:
    """Alternating sum over subsets; an inconsistent subset prunes all its
    supersets, which contribute nothing either."""
    conds = list(conditions)
    if len(conds) > INCLUSION_EXCLUSION_LIMIT:
        raise ModulusOverflow(
            f"{len(conds)} conditions exceed the inclusion-exclusion budget of {INCLUSION_EXCLUSION_LIMIT}"
        )
    total = Fraction(0)
    stack = [(i, conds[i].e, conds[i].k, 1) for i in range(len(conds))]
    while stack:
        i, r, m, size = stack.pop()
        total += Fraction(1 if size % 2 else -1, m)
        for j in range(i + 1, len(conds)):
            sol = crt_pair(r, m, conds[j].e, conds[j].k)
            if sol is not None:
                stack.append((j, sol[0], sol[1], size + 1))
    return total


def density_of_union(conditions) -> DensityResult:
    """Natural density of {n >= 1 : n = e_i (mod k_i) for some i}."""
    conds = tuple(conditions)
    L = _modulus(conds)
    if not conds:
        return DensityResult(Fraction(0), conds, 1, "empty")
    if L <= ENUMERATION_LIMIT:
        return DensityResult(density_by_enumeration(conds), conds, L, "enumeration")
    return DensityResult(density_by_inclusion_exclusion(conds), conds, L, "inclusion-exclusion")


def _multiples(y: np.ndarray, n_lo: int, n_hi: int) -> np.ndarray:
    n = np.arange(n_lo, n_hi, dtype=float)
    return reduce_mod_lattice(n[:, None] * y[None, :])


def _near(torus: AbelianTorus, pts: np.ndarray, x: np.ndarray, eps: float) -> np.ndarray:
    """Boolean mask of rows of ``pts`` within ``eps`` of x in the torus metric."""
    import itertools

    d = pts - x[None, :]
    best = np.full(len(pts), np.inf)
    for s in itertools.product((-1, 0, 1), repeat=pts.shape[1]):
        amb = (d + np.array(s)) @ torus.basis.T
        np.minimum(best, np.einsum("ij,ij->i", amb, amb), out=best)
    return best < eps * eps


def bad_n_mask(torus: AbelianTorus, x_points, y_points, N: int, eps: float, V=(), chunk: int = 65536) -> np.ndarray:
    """mask[n-1] is True when some x is within eps of some n y while x stays
    farther than eps from every point of V ("neither empty nor in V")."""
    xs = [reduce_mod_lattice(np.asarray(x, dtype=float)) for x in x_points]
    ys = [reduce_mod_lattice(np.asarray(y, dtype=float)) for y in y_points]
    Vf = [np.asarray(v.as_float() if isinstance(v, TorsionPoint) else v, dtype=float) for v in V]
    live = []
    for x in xs:
        if not any(_near(torus, x[None, :], v, eps)[0] for v in Vf):
            live.append(x)
    mask = np.zeros(N, dtype=bool)
    for lo in range(1, N + 1, chunk):
        hi = min(N + 1, lo + chunk)
        for y in ys:
            mult = _multiples(y, lo, hi)
            for x in live:
                mask[lo - 1 : hi - 1] |= _near(torus, mult, x, eps)
    return mask


def empirical_bad_fraction(torus: AbelianTorus, x, y, N: int, eps: float, V=()) -> float:
    """Share of n in [1, N] with n y within eps of x, x not within eps of V."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    return float(bad_n_mask(torus, [x], [y], N, eps, V).mean())


def empirical_union_fraction(torus: AbelianTorus, x_points, y_points, N: int, eps: float, V=()) -> float:
    """Finite-set version of :func:`empirical_bad_fraction`."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    return float(bad_n_mask(torus, x_points, y_points, N, eps, V).mean())
