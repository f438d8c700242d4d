"""Translated, pulled-back theta divisors {z : theta[char](m z + c) = 0}."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import SamplingExhausted, SingularPoint
from .theta import ThetaCharacteristic, ThetaParts, theta_parts
from .torus import AbelianTorus, NearestPoints, reduce_mod_lattice

MEMBERSHIP_EPS = 1e-8
SMOOTH_THRESHOLD = 1e-6
SAMPLE_RESIDUAL = 1e-9
DEDUP_DIST = 1e-6


@dataclass(frozen=True)
class ThetaDivisor:
    char: ThetaCharacteristic
    translate: tuple = field(default=())
    multiplier: int = 1

    def __post_init__(self):
        if int(self.multiplier) == 0:
            raise ValueError("divisor multiplier must be nonzero")
        c = tuple(complex(x) for x in self.translate) or (0j,) * self.char.g
        if len(c) != self.char.g:
            raise ValueError("translate length does not match the characteristic")
        object.__setattr__(self, "translate", c)
        object.__setattr__(self, "multiplier", int(self.multiplier))

    @classmethod
    def principal(cls, g: int, translate=None, multiplier: int = 1) -> ThetaDivisor:
        return cls(ThetaCharacteristic.zero(g), tuple(translate) if translate is not None else (), multiplier)

    @property
    def g(self) -> int:
        return self.char.g

    @property
    def dim(self) -> int:
        return self.g - 1

    @property
    def c(self) -> np.ndarray:
        return np.array(self.translate, dtype=complex)

    def to_dict(self) -> dict:
        return {
            "alpha": [str(a) for a in self.char.alpha],
            "beta": [str(b) for b in self.char.beta],
            "translate": [[z.real, z.imag] for z in self.translate],
            "multiplier": self.multiplier,
        }


@dataclass(frozen=True)
class DivisorPoint:
    point: np.ndarray
    residual: float


def divisor_parts(torus: AbelianTorus, D: ThetaDivisor, z, tol: float = 1e-12, gradient: bool = False) -> ThetaParts:
    """Theta parts of D at ambient points ``z`` (rows); gradients are d/dz,
    i.e. already multiplied by the divisor multiplier."""
    Z = np.atleast_2d(np.asarray(z, dtype=complex))
    parts = theta_parts(D.multiplier * Z + D.c, torus, D.char, tol, gradient)
    if gradient:
        parts.reduced_grad = parts.reduced_grad * D.multiplier
        parts.shift_grad = parts.shift_grad * D.multiplier
    return parts


def evaluate(torus: AbelianTorus, D: ThetaDivisor, p, tol: float = 1e-12):
    """theta[char](m z(p) + c), z(p) the lift of the reduced point p.

    Accepts one point or a stack of points.
    """
    P = np.asarray(p, dtype=float)
    single = P.ndim == 1
    z = torus.lift(reduce_mod_lattice(np.atleast_2d(P)))
    vals = divisor_parts(torus, D, z, tol).value()
    return complex(vals[0]) if single else vals


def contains(torus: AbelianTorus, D: ThetaDivisor, p, eps: float = MEMBERSHIP_EPS) -> bool:
    if eps <= 0:
        raise ValueError("membership tolerance must be positive")
    return abs(evaluate(torus, D, p)) <= eps


def _line_roots(torus, D, base, direction, half_width, res, newton_iters=30):
    """Zeros of t -> theta_D(z0 + t w) for complex t in a square, sorted by |t|."""
    g = torus.g
    ticks = (np.arange(res) + 0.5) / res * 2 * half_width - half_width
    T = (ticks[:, None] + 1j * ticks[None, :]).ravel()
    z0 = torus.lift(base)
    Z = z0[None, :] + T[:, None] * direction[None, :]
    mod = divisor_parts(torus, D, Z, 1e-10).normalized_modulus().reshape(res, res)
    pad = np.pad(mod, 1, constant_values=np.inf)
    is_min = np.ones_like(mod, dtype=bool)
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di or dj:
                is_min &= mod <= pad[1 + di : 1 + di + res, 1 + dj : 1 + dj + res]
    t = T[is_min.ravel()]
    if t.size == 0:
        return np.empty(0, dtype=complex)
    for _ in range(newton_iters):
        parts = divisor_parts(torus, D, z0[None, :] + t[:, None] * direction[None, :], 1e-14, gradient=True)
        f = parts.reduced
        df = parts.reduced_grad @ direction
        step = np.where(np.abs(df) > 0, f / np.where(df == 0, 1, df), 0)
        step = np.where(np.abs(step) > half_width / 4, step * (half_width / 4) / np.abs(step), step)
        t = t - step
        if np.all(np.abs(step) < 1e-15):
            break
    keep = (np.abs(t.real) <= 1.5 * half_width) & (np.abs(t.imag) <= 1.5 * half_width)
    t = t[keep]
    return t[np.argsort(np.abs(t), kind="stable")]


def sample_points(
    torus: AbelianTorus,
    D: ThetaDivisor,
    count: int,
    seed: int,
    half_width: float = 0.6,
    res: int = 40,
) -> list[DivisorPoint]:
    """Random points on D, one per random complex line through the domain.

    Line i uses its own generator seeded with (seed, i), so the output does
    not depend on how lines are batched.  Points are kept in line order;
    a point closer than 1e-6 to an earlier one is dropped.
    """
    if count < 1:
        raise ValueError("count must be at least 1")
    g = torus.g
    found: list[DivisorPoint] = []
    kept = np.empty((0, 2 * g))
    for i in range(10 * count):
        rng = np.random.default_rng([int(seed) & (2**63 - 1), i])
        base = rng.random(2 * g)
        direction = rng.normal(size=g) + 1j * rng.normal(size=g)
        direction /= np.linalg.norm(direction)
        for t in _line_roots(torus, D, base, direction, half_width, res):
            z = torus.lift(base) + t * direction
            p = reduce_mod_lattice(torus.coords_of(z))
            resid = abs(evaluate(torus, D, p))
            if resid > SAMPLE_RESIDUAL:
                continue
            if len(kept) and np.min(NearestPoints(torus, kept).query(p[None, :])[0]) <= DEDUP_DIST:
                continue
            found.append(DivisorPoint(p, resid))
            kept = np.vstack([kept, p])
            break
        if len(found) == count:
            return found
    raise SamplingExhausted(f"found {len(found)} of {count} points after {10 * count} lines")


def tangent_direction(torus: AbelianTorus, D: ThetaDivisor, p) -> np.ndarray:
    """Unit vector v with sum_i grad_i v_i = 0 at the lift of p, with its first
    nonzero component made real positive."""
    p = reduce_mod_lattice(p)
    z = torus.lift(p)
    parts = divisor_parts(torus, D, z[None, :], 1e-14, gradient=True)
    resid = abs(parts.value()[0])
    if resid > SAMPLE_RESIDUAL:
        raise ValueError(f"point is not on the divisor (|theta| = {resid:.3e})")
    grad = parts.gradient()[0]
    scale = parts.damping[0] * math.exp(-parts.log_prefactor[0].real)
    if np.linalg.norm(grad) * scale < SMOOTH_THRESHOLD:
        raise SingularPoint(f"gradient norm {np.linalg.norm(grad) * scale:.3e} below smoothness threshold")
    _, _, vh = np.linalg.svd(grad[None, :])
    v = vh[1].conj()
    v = v / np.linalg.norm(v)
    k = int(np.argmax(np.abs(v) > 1e-12))
    v = v * (abs(v[k]) / v[k])
    v[k] = abs(v[k])
    return v


def quasi_period_factor(torus: AbelianTorus, D: ThetaDivisor, z, shift) -> complex:
    """Factor q with theta_D(z + lambda) = q * theta_D(z) for the lattice vector
    lambda = shift[:g] + omega shift[g:] (integer ``shift``)."""
    g = torus.g
    n = np.asarray(shift[:g], dtype=float) * D.multiplier
    mvec = np.asarray(shift[g:], dtype=float) * D.multiplier
    alpha, beta = D.char.arrays()
    w = D.multiplier * np.asarray(z, dtype=complex) + D.c
    om = torus.omega
    expo = -1j * math.pi * (mvec @ om @ mvec) - 2j * math.pi * (mvec @ (w + beta)) + 2j * math.pi * (alpha @ n)
    return complex(np.exp(expo))
