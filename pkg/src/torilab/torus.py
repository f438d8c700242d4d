"""Complex tori C^g / (Z^g + omega Z^g) in lattice coordinates.

A point of the torus is stored by its 2g real coordinates with respect to
the lattice basis e_1..e_2g, the columns of (I | omega).  The first g
coordinates multiply the identity columns, the last g multiply omega.
Reduced coordinates live in the half-open unit cube [0, 1)^2g, which is the
fundamental parallelogram of the lattice.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm

import numpy as np

from .errors import NonSymmetric, NotComplexLinear, NotPositiveDefinite

SYMMETRY_TOL = 1e-12
POSDEF_TOL = 1e-10
LINEARITY_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class AbelianTorus:
    """Principally polarized complex torus with normalized period matrix."""

    omega: np.ndarray
    basis: np.ndarray = field(repr=False)
    basis_inv: np.ndarray = field(repr=False)
    simple: bool = True

    @property
    def g(self) -> int:
        return self.omega.shape[0]

    @property
    def imag(self) -> np.ndarray:
        return self.omega.imag

    def lift(self, coords) -> np.ndarray:
        """Ambient point(s) z = u + omega v in C^g for coordinates (u, v)."""
        a = np.asarray(coords, dtype=float)
        g = self.g
        return a[..., :g] + a[..., g:] @ self.omega.T

    def coords_of(self, z) -> np.ndarray:
        """Unreduced lattice coordinates of ambient point(s) z."""
        z = np.asarray(z, dtype=complex)
        ri = np.concatenate([z.real, z.imag], axis=-1)
        return ri @ self.basis_inv.T

    def complex_structure(self) -> np.ndarray:
        """Multiplication by i written in lattice coordinates."""
        g = self.g
        j0 = np.block([[np.zeros((g, g)), -np.eye(g)], [np.eye(g), np.zeros((g, g))]])
        return self.basis_inv @ j0 @ self.basis

    def __eq__(self, other):
        if not isinstance(other, AbelianTorus):
            return NotImplemented
        return self.simple == other.simple and np.array_equal(self.omega, other.omega)

    def __hash__(self):
        return hash(self.omega.tobytes())


def make_torus(omega, simple: bool = True) -> AbelianTorus:
    """Validate ``omega`` and build the torus C^g / (Z^g + omega Z^g).

    ``simple`` is recorded as given; simplicity is never checked.
    """
    omega = np.array(omega, dtype=complex)
    if omega.ndim != 2 or omega.shape[0] != omega.shape[1] or omega.shape[0] == 0:
        raise ValueError(f"period matrix must be square, got shape {omega.shape}")
    asym = np.max(np.abs(omega - omega.T))
    if asym > SYMMETRY_TOL:
        raise NonSymmetric(f"omega is not symmetric (max |omega - omega^T| = {asym:.3e})")
    omega = (omega + omega.T) / 2
    lam_min = np.linalg.eigvalsh(omega.imag)[0]
    if lam_min <= POSDEF_TOL:
        raise NotPositiveDefinite(
            f"Im(omega) is not positive definite (smallest eigenvalue {lam_min:.3e})"
        )
    g = omega.shape[0]
    full = np.hstack([np.eye(g), omega])
    basis = np.vstack([full.real, full.imag])
    omega.setflags(write=False)
    basis_inv = np.linalg.inv(basis)
    basis.setflags(write=False)
    basis_inv.setflags(write=False)
    return AbelianTorus(omega=omega, basis=basis, basis_inv=basis_inv, simple=simple)


def reduce_mod_lattice(v) -> np.ndarray:
    """Fractional parts of ``v``, each in [0, 1)."""
    v = np.asarray(v, dtype=float)
    r = v - np.floor(v)
    # floor of a tiny negative number leaves exactly 1.0 after subtraction
    return np.where(r >= 1.0, 0.0, r)


@dataclass(frozen=True)
class Endomorphism:
    """Integer matrix acting on lattice coordinates."""

    matrix: np.ndarray
    label: str = "general"

    @classmethod
    def scalar(cls, n: int, g: int) -> Endomorphism:
        return cls(matrix=int(n) * np.eye(2 * g, dtype=np.int64), label=f"scalar {int(n)}")

    @classmethod
    def general(cls, matrix, torus: AbelianTorus) -> Endomorphism:
        m = np.asarray(matrix)
        if m.shape != (2 * torus.g, 2 * torus.g):
            raise ValueError(f"expected a {2 * torus.g}x{2 * torus.g} matrix")
        if not np.all(np.equal(np.mod(m, 1), 0)):
            raise ValueError("endomorphism matrix must be integral")
        m = m.astype(np.int64)
        jm = torus.complex_structure()
        defect = np.max(np.abs(m @ jm - jm @ m))
        if defect > LINEARITY_TOL:
            raise NotComplexLinear(f"matrix is not C-linear (commutator norm {defect:.3e})")
        return cls(matrix=m, label="general")


def apply_endomorphism(phi: Endomorphism, p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    return reduce_mod_lattice(p @ phi.matrix.T)


def multiply(n: int, p) -> np.ndarray:
    """[n] on reduced coordinates; the fast path for scalar endomorphisms."""
    return reduce_mod_lattice(n * np.asarray(p, dtype=float))


class TorsionPoint(tuple):
    """Point with rational coordinates, each a reduced fraction in [0, 1)."""

    def __new__(cls, coords):
        fr = []
        for c in coords:
            f = Fraction(c)
            fr.append(f - (f.numerator // f.denominator))
        return super().__new__(cls, fr)

    @classmethod
    def parse(cls, items) -> TorsionPoint:
        """Build from strings such as ``"3/7"`` or plain numbers."""
        return cls(Fraction(str(s).strip()) for s in items)

    @property
    def g(self) -> int:
        return len(self) // 2

    def scaled(self, e: int) -> TorsionPoint:
        return TorsionPoint(e * c for c in self)

    def as_float(self) -> np.ndarray:
        return np.array([float(c) for c in self])

    def to_strings(self) -> list[str]:
        return [str(c) for c in self]

    def is_origin(self) -> bool:
        return all(c == 0 for c in self)


def torsion_order(t: TorsionPoint) -> int:
    return lcm(*(c.denominator for c in t)) if len(t) else 1


def _translates(dim: int, reach: int = 1) -> np.ndarray:
    rng = range(-reach, reach + 1)
    return np.array(list(itertools.product(rng, repeat=dim)), dtype=float)


def torus_distance(torus: AbelianTorus, p, q) -> float:
    """Ambient Euclidean distance between torus points.

    The difference of the reduced coordinates lies in (-1, 1)^2g; the
    minimum is taken over its 3^2g translates by {-1, 0, 1}^2g.
    """
    d = reduce_mod_lattice(q) - reduce_mod_lattice(p)
    shifts = d[None, :] + _translates(d.shape[0])
    amb = shifts @ torus.basis.T
    return float(np.sqrt(np.min(np.einsum("ij,ij->i", amb, amb))))


def pairwise_torus_distances(torus: AbelianTorus, P, Q) -> np.ndarray:
    """Matrix of torus distances between rows of ``P`` and rows of ``Q``."""
    P = np.atleast_2d(np.asarray(P, dtype=float))
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    d = reduce_mod_lattice(Q)[None, :, :] - reduce_mod_lattice(P)[:, None, :]
    best = np.full(d.shape[:2], np.inf)
    for shift in _translates(d.shape[-1]):
        amb = (d + shift) @ torus.basis.T
        np.minimum(best, np.einsum("...i,...i->...", amb, amb), out=best)
    return np.sqrt(best)


class NearestPoints:
    """Nearest-neighbour queries in the torus metric for a fixed point set.

    The point set is replicated over the 3^2g neighbouring translates so a
    k-d tree in ambient coordinates answers the same minimum that
    :func:`torus_distance` computes.
    """

    def __init__(self, torus: AbelianTorus, points):
        from scipy.spatial import cKDTree

        pts = reduce_mod_lattice(np.atleast_2d(np.asarray(points, dtype=float)))
        if pts.shape[0] == 0:
            raise ValueError("point set is empty")
        self.torus = torus
        self.points = pts
        shifts = _translates(pts.shape[1])
        images = (pts[None, :, :] - shifts[:, None, :]).reshape(-1, pts.shape[1])
        self._owner = np.tile(np.arange(pts.shape[0]), shifts.shape[0])
        self._tree = cKDTree(images @ torus.basis.T)

    def query(self, probes, k: int = 1):
        probes = reduce_mod_lattice(np.atleast_2d(np.asarray(probes, dtype=float)))
        dist, idx = self._tree.query(probes @ self.torus.basis.T, k=k)
        return dist, self._owner[idx]
