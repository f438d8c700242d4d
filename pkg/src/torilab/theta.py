"""Riemann theta functions with characteristics.

    theta[a, b](z; omega) = sum_m exp(pi i (m+a)^T omega (m+a) + 2 pi i (m+a)^T (z+b))

Evaluation first rewrites the characteristic as a shift of the argument,
then uses quasi-periodicity to move the argument into the strip where
Y^{-1} Im(w) lies in [-1/2, 1/2]^g (Y = Im omega).  There the summands
are Gaussians centred within half a lattice step of the origin, so a
fixed ball of lattice points, sized by :func:`truncation_radius`,
carries everything above the requested absolute error.
"""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import TolOutOfRange

_CHUNK = 4096
# split constants for the Gaussian tail bounds (see truncation_radius)
_S_SPLIT = 0.25
_T_SPLIT = 0.5


@dataclass(frozen=True)
class ThetaCharacteristic:
    alpha: tuple
    beta: tuple

    def __post_init__(self):
        from fractions import Fraction

        a = tuple(Fraction(x) % 1 for x in self.alpha)
        b = tuple(Fraction(x) % 1 for x in self.beta)
        if len(a) != len(b):
            raise ValueError("alpha and beta must have the same length")
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "beta", b)

    @classmethod
    def zero(cls, g: int) -> ThetaCharacteristic:
        return cls((0,) * g, (0,) * g)

    @property
    def g(self) -> int:
        return len(self.alpha)

    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        return (np.array([float(x) for x in self.alpha]), np.array([float(x) for x in self.beta]))

    def is_zero(self) -> bool:
        return not any(self.alpha) and not any(self.beta)

    def parity(self) -> int:
        """0 for even, 1 for odd half-integer characteristics."""
        if any(x.denominator > 2 for x in self.alpha + self.beta):
            raise ValueError("parity is defined for half-integer characteristics only")
        return int(4 * sum(a * b for a, b in zip(self.alpha, self.beta))) % 2


@dataclass(frozen=True)
class ThetaValue:
    value: complex
    gradient: np.ndarray | None
    claimed_abs_error: float


def _omega_of(omega) -> np.ndarray:
    return np.asarray(getattr(omega, "omega", omega), dtype=complex)


def _char_arrays(char, g):
    if char is None:
        return np.zeros(g), np.zeros(g)
    if char.g != g:
        raise ValueError(f"characteristic has length {char.g}, torus has g = {g}")
    return char.arrays()


def _tail_bound(R: float, lam: float, g: int, deriv: int) -> float:
    """Bound on sum over {x in Z^g + shift, |x| > R} of the summand moduli
    for the reduced sum (without the e^{pi b0^T Y b0} prefactor).

    exp(-pi lam |x|^2) <= exp(-pi lam (1-s) R^2) exp(-pi lam s |x|^2) outside
    the ball, and a shifted 1-D Gaussian sum is at most 1 + sqrt(pi/a).
    For the gradient the factor 2 pi |m_j| <= 2 pi (|x| + sqrt(g)/2) is
    absorbed by |x| exp(-pi lam t |x|^2) <= (2 pi lam t e)^{-1/2}.
    """
    pre = 1.0
    if deriv:
        pre = 2 * math.pi * (1.0 / math.sqrt(2 * math.pi * lam * _T_SPLIT * math.e) + math.sqrt(g) / 2)
        lam = lam * (1 - _T_SPLIT)
    full = (1 + 1 / math.sqrt(lam * _S_SPLIT)) ** g
    return pre * full * math.exp(-math.pi * lam * (1 - _S_SPLIT) * R * R)


def _radius_for(tol: float, lam: float, lam_max: float, g: int, deriv: int) -> float:
    # the e^{pi b0^T Y b0} prefactor is at most e^{pi g lam_max / 4}
    k = _tail_bound(0.0, lam, g, deriv) * math.exp(math.pi * g * lam_max / 4)
    if k <= tol:
        return 0.0
    lam_eff = lam * (1 - _T_SPLIT) if deriv else lam
    return math.sqrt(math.log(k / tol) / (math.pi * lam_eff * (1 - _S_SPLIT)))


def truncation_radius(omega, tol: float, deriv: int = 0) -> float:
    """Radius R of the ball |m + b0| <= R carrying the reduced theta sum to
    absolute error ``tol`` (``deriv=1``: each gradient component)."""
    if not (0 < tol < 1):
        raise TolOutOfRange(f"tolerance must lie in (0, 1), got {tol!r}")
    om = _omega_of(omega)
    ev = np.linalg.eigvalsh(om.imag)
    return _radius_for(tol, float(ev[0]), float(ev[-1]), om.shape[0], deriv)


@functools.lru_cache(maxsize=64)
def _ball(g: int, radius_q: int, y_bytes: bytes) -> np.ndarray:
    """Integer points with |m| <= radius_q / 8, sorted by decreasing m^T Y m."""
    radius = radius_q / 8
    r = int(math.floor(radius))
    pts = np.array(list(itertools.product(range(-r, r + 1), repeat=g)), dtype=float)
    pts = pts[np.einsum("ij,ij->i", pts, pts) <= radius * radius]
    y = np.frombuffer(y_bytes, dtype=float).reshape(g, g)
    q = np.einsum("ij,jk,ik->i", pts, y, pts)
    order = np.lexsort((*pts.T[::-1], -q))
    return np.ascontiguousarray(pts[order])


def lattice_ball(omega, R: float) -> np.ndarray:
    """Superset of the lattice points any reduced argument needs at radius R."""
    om = _omega_of(omega)
    g = om.shape[0]
    rad = R + math.sqrt(g) / 2
    return _ball(g, int(math.ceil(rad * 8)), np.ascontiguousarray(om.imag).tobytes())


@dataclass
class ThetaParts:
    """theta[char](z) = exp(log_prefactor) * reduced, grad likewise.

    ``reduced`` is holomorphic in z away from reduction jumps and differs
    from theta by a nowhere-vanishing factor, so it has the same zeros.
    ``damping`` = exp(-pi b0^T Y b0) turns |reduced| into the lattice
    invariant modulus |theta(w)| exp(-pi Im(w)^T Y^{-1} Im(w)).
    """

    reduced: np.ndarray
    reduced_grad: np.ndarray | None
    log_prefactor: np.ndarray
    shift_grad: np.ndarray
    damping: np.ndarray
    abs_error: float

    def value(self) -> np.ndarray:
        return np.exp(self.log_prefactor) * self.reduced

    def gradient(self) -> np.ndarray:
        full = self.reduced_grad + self.shift_grad * self.reduced[:, None]
        return np.exp(self.log_prefactor)[:, None] * full

    def normalized_modulus(self) -> np.ndarray:
        return np.abs(self.reduced) * self.damping


def theta_parts(z, omega, char=None, tol: float = 1e-12, gradient: bool = False) -> ThetaParts:
    """Batch evaluation core.  ``z`` has shape (N, g).

    The truncation is chosen so that theta (and every gradient component
    when requested) is within ``tol`` of the full series at every point.
    """
    if not (0 < tol < 1):
        raise TolOutOfRange(f"tolerance must lie in (0, 1), got {tol!r}")
    om = _omega_of(omega)
    g = om.shape[0]
    Z = np.atleast_2d(np.asarray(z, dtype=complex))
    if Z.shape[1] != g:
        raise ValueError(f"points have dimension {Z.shape[1]}, omega has g = {g}")
    alpha, beta = _char_arrays(char, g)
    Y = om.imag
    Yinv = np.linalg.inv(Y)

    w = Z + beta + om @ alpha
    b = np.imag(w) @ Yinv.T
    p = np.round(b)
    w0 = w - p @ om.T
    w0 = w0 - np.round(w0.real)
    b0 = b - p

    log_pre = (
        1j * math.pi * (alpha @ om @ alpha)
        + 2j * math.pi * ((Z + beta) @ alpha)
        - 1j * math.pi * np.einsum("ij,jk,ik->i", p, om, p)
        - 2j * math.pi * np.einsum("ij,ij->i", p, w0)
    )
    shift_grad = 2j * math.pi * (alpha[None, :] - p)
    damping = np.exp(-math.pi * np.einsum("ij,jk,ik->i", b0, Y, b0))

    ev = np.linalg.eigvalsh(Y)
    lam, lam_max = float(ev[0]), float(ev[-1])
    scale = float(np.max(np.exp(log_pre.real))) if len(Z) else 1.0
    tol_s = tol / scale
    if gradient:
        tol_s = tol_s / (1 + float(np.max(np.abs(shift_grad), initial=0.0)) * math.sqrt(g))
    tol_s = min(tol_s, 0.5)
    R = _radius_for(tol_s, lam, lam_max, g, 0)
    if gradient:
        R = max(R, _radius_for(min(tol / scale, 0.5), lam, lam_max, g, 1))
    M = lattice_ball(om, R)
    quad = 1j * math.pi * np.einsum("ij,jk,ik->i", M, om, M)

    S = np.empty(len(Z), dtype=complex)
    dS = np.empty((len(Z), g), dtype=complex) if gradient else None
    for lo in range(0, len(Z), _CHUNK):
        hi = lo + _CHUNK
        terms = np.exp(quad[None, :] + 2j * math.pi * (w0[lo:hi] @ M.T))
        S[lo:hi] = terms.sum(axis=1)
        if gradient:
            dS[lo:hi] = 2j * math.pi * (terms @ M)

    err = _tail_bound(R, lam, g, 0) * math.exp(math.pi * g * lam_max / 4) * scale
    if gradient:
        err = max(err, _tail_bound(R, lam, g, 1) * math.exp(math.pi * g * lam_max / 4) * scale)
    return ThetaParts(
        reduced=S,
        reduced_grad=dS,
        log_prefactor=log_pre,
        shift_grad=shift_grad,
        damping=damping,
        abs_error=min(err, tol),
    )


def theta(z, omega, char=None, tol: float = 1e-12, gradient: bool = False) -> ThetaValue:
    """theta[char](z; omega) at a single point, within ``tol`` absolutely."""
    parts = theta_parts(np.asarray(z, dtype=complex)[None, :], omega, char, tol, gradient)
    grad = parts.gradient()[0] if gradient else None
    return ThetaValue(complex(parts.value()[0]), grad, parts.abs_error)


def theta_gradient(z, omega, char=None, tol: float = 1e-12) -> np.ndarray:
    return theta(z, omega, char, tol, gradient=True).gradient


def theta_values(z, omega, char=None, tol: float = 1e-12) -> np.ndarray:
    """Vectorized theta over rows of ``z``."""
    return theta_parts(z, omega, char, tol).value()


def grid_normalized_modulus(
    torus,
    r: int,
    char=None,
    multiplier: int = 1,
    translate=None,
    tol: float = 1e-8,
    dtype=np.float32,
) -> np.ndarray:
    """Lattice-invariant modulus of theta[char](m z(p) + c) on the grid
    p in {0, 1/r, ..., (r-1)/r}^2g.

    The summand factorizes into a part depending on the omega-coordinates v
    and a character in the unit coordinates u, so the whole grid is one
    complex matrix product per block of v.  Output axes follow the
    coordinate order (u_1..u_g, v_1..v_g).
    """
    om = _omega_of(torus)
    g = om.shape[0]
    if r ** (2 * g) > 2**26:
        raise ValueError(f"grid of {r}^{2 * g} points is too large")
    alpha, beta = _char_arrays(char, g)
    c = np.zeros(g, dtype=complex) if translate is None else np.asarray(translate, dtype=complex)
    cp = c + beta + om @ alpha
    Y = om.imag
    Yinv = np.linalg.inv(Y)
    bc = Yinv @ cp.imag
    m = int(multiplier)

    ev = np.linalg.eigvalsh(Y)
    lam = float(ev[0])
    # normalized sums have no e^{pi b^T Y b} prefactor
    k = _tail_bound(0.0, lam, g, 0)
    R = math.sqrt(max(math.log(k / tol), 0.0) / (math.pi * lam * (1 - _S_SPLIT)))

    ticks = np.arange(r) / r
    V = np.array(list(itertools.product(ticks, repeat=g)))
    b_all = m * V + bc
    lo = np.floor(-b_all.max(axis=0) - R) - 1
    hi = np.ceil(-b_all.min(axis=0) + R) + 1
    J = np.array(list(itertools.product(*[range(int(a), int(bb) + 1) for a, bb in zip(lo, hi)])), dtype=float)
    # keep j whose distance to the box -b_all is within R
    box_lo, box_hi = -b_all.max(axis=0), -b_all.min(axis=0)
    gap = np.maximum(box_lo - J, 0) + np.maximum(J - box_hi, 0)
    J = J[np.einsum("ij,ij->i", gap, gap) <= (R + 1e-9) ** 2]

    quad = 1j * math.pi * np.einsum("ij,jk,ik->i", J, om, J)
    B = np.exp(2j * math.pi * m * (J @ V.T))  # (|J|, r^g) over u
    out = np.empty((len(V), len(V)), dtype=dtype)  # [v, u]
    step = max(1, _CHUNK * 16 // max(len(V), 1))
    for lo_i in range(0, len(V), step):
        Vb = V[lo_i : lo_i + step]
        w_part = m * (Vb @ om.T) + cp
        bb = m * Vb + bc
        expo = quad[None, :] + 2j * math.pi * (w_part @ J.T)
        expo -= (math.pi * np.einsum("ij,jk,ik->i", bb, Y, bb))[:, None]
        A = np.exp(expo)
        out[lo_i : lo_i + step] = np.abs(A @ B)
    return out.T.reshape((r,) * (2 * g))
