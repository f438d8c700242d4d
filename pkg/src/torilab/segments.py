"""Γ_n-segments over the fundamental cube.

Lifting the graph of [n] to R^2g x R^2g gives the affine translates
L_{n,a} = {(x, n x + a)}, a an integer vector.  The ones meeting
[0,1)^2g x [0,1)^2g are the segments; for n > 0 there are exactly n^2g of
them, with a_i in {-(n-1), ..., 0}.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .torus import reduce_mod_lattice


@dataclass(frozen=True)
class Interval:
    """Real interval with exact endpoints and explicit closedness."""

    lo: Fraction
    hi: Fraction
    lo_closed: bool = True
    hi_closed: bool = False

    def is_empty(self) -> bool:
        if self.lo < self.hi:
            return False
        return not (self.lo == self.hi and self.lo_closed and self.hi_closed)

    def contains(self, x) -> bool:
        above = x >= self.lo if self.lo_closed else x > self.lo
        below = x <= self.hi if self.hi_closed else x < self.hi
        return bool(above and below)

    @property
    def length(self) -> Fraction:
        return max(self.hi - self.lo, Fraction(0))


@dataclass(frozen=True)
class SegmentDescriptor:
    n: int
    a: tuple
    intervals: tuple

    @property
    def height(self) -> int:
        return max(abs(self.n), max((abs(v) for v in self.a), default=0))

    def contains(self, y) -> bool:
        return all(iv.contains(float(c)) for iv, c in zip(self.intervals, y))


def coordinate_interval(n: int, a: int) -> Interval:
    """{x in [0, 1) : n x + a in [0, 1)} for one coordinate."""
    if n > 0:
        return Interval(max(Fraction(0), Fraction(-a, n)), min(Fraction(1), Fraction(1 - a, n)), True, False)
    m = -n
    # n x + a in [0,1)  <=>  (a-1)/m < x <= a/m
    lo, hi = Fraction(a - 1, m), Fraction(a, m)
    lo_closed = False
    if lo < 0:
        lo, lo_closed = Fraction(0), True
    hi_closed = True
    if hi >= 1:
        hi, hi_closed = Fraction(1), False
    return Interval(lo, hi, lo_closed, hi_closed)


def coordinate_offsets(n: int) -> range:
    """Offsets a for which the coordinate interval is nonempty."""
    if n == 0:
        raise ValueError("n must be nonzero")
    return range(-(n - 1), 1) if n > 0 else range(0, -n + 1)


def enumerate_segments(n: int, g: int):
    """Lazily yield every segment of [n] on a g-dimensional torus."""
    if n == 0:
        raise ValueError("n must be nonzero")
    offs = list(coordinate_offsets(n))
    ivs = {a: coordinate_interval(n, a) for a in offs}
    for a in itertools.product(offs, repeat=2 * g):
        yield SegmentDescriptor(n, a, tuple(ivs[v] for v in a))


def segment_count(n: int, g: int) -> int:
    if n < 1:
        raise ValueError("segment_count is defined for n >= 1")
    return n ** (2 * g)


def attribute_solution(y, n: int) -> SegmentDescriptor:
    """The segment carrying the point (y, n y): a = reduce(n y) - n y."""
    y = reduce_mod_lattice(np.asarray(y, dtype=float))
    # exact product: float rounding of n*y can cross an integer
    a = tuple(-math.floor(n * Fraction(float(c))) for c in y)
    return SegmentDescriptor(int(n), a, tuple(coordinate_interval(n, v) for v in a))


def segment_rows(n: int, g: int):
    """(index, a, height) rows for CSV output."""
    for i, seg in enumerate(enumerate_segments(n, g)):
        yield i, seg.a, seg.height


def bad_n_census(torus, X, Y, N: int, torsion_V=(), eps: float = 1e-3, grid_factor: int = 4, tol: float = 1e-9):
    """Per n <= N, the number of isolated intersection points of X ∩ [n]Y
    farther than ``eps`` from every point of ``torsion_V``.

    X and Y are either theta divisors (the g = 2 surface testbed, solved
    with the graph-system solver) or arrays of points (the dimension-zero
    regime, X = {x}, Y = {y}).  Returns (regime label, [(n, count), ...]).
    """
    from .density import _near
    from .divisor import ThetaDivisor
    from .torus import TorsionPoint

    V = np.array(
        [v.as_float() if isinstance(v, TorsionPoint) else np.asarray(v, dtype=float) for v in torsion_V]
    ).reshape(-1, 2 * torus.g)

    def far_from_V(pts):
        keep = np.ones(len(pts), dtype=bool)
        for v in V:
            keep &= ~_near(torus, pts, v, eps)
        return keep

    rows = []
    if isinstance(X, ThetaDivisor):
        from .intersection import EXPECTED_ISOLATED, GRID_FLOOR, intersect

        for n in range(1, N + 1):
            recs = intersect(torus, Y, X, n, max(GRID_FLOOR, grid_factor * n), tol)
            pts = np.array([r.x_point for r in recs if r.classification == EXPECTED_ISOLATED]).reshape(-1, 2 * torus.g)
            rows.append((n, int(far_from_V(pts).sum())))
        return "divisor-divisor surrogate (dim X + dim Y = dim A)", rows

    xs = np.atleast_2d(np.asarray(X, dtype=float))
    ys = np.atleast_2d(np.asarray(Y, dtype=float))
    xs = xs[far_from_V(reduce_mod_lattice(xs))]
    counts = np.zeros(N, dtype=np.int64)
    chunk = 65536
    for lo in range(1, N + 1, chunk):
        n = np.arange(lo, min(N + 1, lo + chunk), dtype=float)
        for y in ys:
            mult = reduce_mod_lattice(n[:, None] * reduce_mod_lattice(y)[None, :])
            for x in xs:
                counts[lo - 1 : lo - 1 + len(n)] += _near(torus, mult, reduce_mod_lattice(x), eps)
    return "points (dim X + dim Y < dim A)", [(n, int(c)) for n, c in enumerate(counts, start=1)]
