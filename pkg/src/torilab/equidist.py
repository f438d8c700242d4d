"""Equidistribution diagnostics for orbits n -> n y on the torus."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import GridOverflow
from .torus import AbelianTorus, reduce_mod_lattice

GRID_LIMIT = 10**8

GOLDEN_TEST_POINT = ((math.sqrt(5) - 1) / 2, math.sqrt(2) - 1, 0.3, 0.7)


@dataclass(frozen=True)
class WeylReport:
    k: tuple
    N: int
    magnitude: float


@dataclass
class ApproximationTrace:
    steps: list = field(default_factory=list)

    @property
    def final_dist(self) -> float:
        return self.steps[-1][2] if self.steps else math.inf


def _frac_products(n: np.ndarray, c: float) -> np.ndarray:
    """frac(n c) with the integer part of c removed first."""
    c = c - math.floor(c)
    return np.mod(n * c, 1.0)


def weyl_sum(y, n_list, k) -> WeylReport:
    """|(1/N) sum_j exp(2 pi i k . (n_j y))| with correctly rounded sums."""
    k = tuple(int(v) for v in k)
    if not any(k):
        raise ValueError("frequency vector k must be nonzero")
    n = np.asarray(list(n_list), dtype=float)
    if n.size == 0:
        raise ValueError("n_list must be nonempty")
    y = np.asarray(y, dtype=float)
    if y.shape[0] != len(k):
        raise ValueError("k and y have different lengths")
    # k . (n y) mod 1 = n (k . y) mod 1 because k is integral
    ky = math.fsum(ki * yi for ki, yi in zip(k, y))
    phase = 2 * math.pi * _frac_products(n, ky)
    re = math.fsum(np.cos(phase).tolist())
    im = math.fsum(np.sin(phase).tolist())
    mag = min(1.0, math.hypot(re, im) / n.size)
    return WeylReport(k, int(n.size), mag)


def orbit(y, N: int, start: int = 1) -> np.ndarray:
    n = np.arange(start, start + N, dtype=float)
    return reduce_mod_lattice(n[:, None] * np.asarray(y, dtype=float)[None, :])


def discrepancy_estimate(points, grid: int) -> float:
    """Largest |empirical share - volume| over the anchored boxes
    [0, j_1/grid) x ... x [0, j_d/grid), j_i in 1..grid.

    This is a lower bound for the star discrepancy.  Boxes at resolution
    2*grid include all boxes at resolution grid, so refining never lowers it.
    """
    if grid < 2:
        raise ValueError("grid must be at least 2")
    P = np.atleast_2d(np.asarray(points, dtype=float))
    # points within 1e-12 of a box edge are binned as if they sat on it
    P = reduce_mod_lattice(np.round(P, 12))
    d = P.shape[1]
    if grid**d > GRID_LIMIT:
        raise GridOverflow(f"{grid}^{d} boxes exceed the limit {GRID_LIMIT}")
    cells = np.minimum((P * grid).astype(np.int64), grid - 1)
    flat = np.ravel_multi_index(cells.T, (grid,) * d)
    counts = np.bincount(flat, minlength=grid**d).reshape((grid,) * d).astype(np.int64)
    for ax in range(d):
        counts = np.cumsum(counts, axis=ax)
    emp = counts / len(P)
    vol = np.ones((grid,) * d)
    ticks = np.arange(1, grid + 1) / grid
    for ax in range(d):
        shape = [1] * d
        shape[ax] = grid
        vol = vol * ticks.reshape(shape)
    return float(np.max(np.abs(emp - vol)))


def approximating_translates(torus: AbelianTorus, y, x, n_max: int, chunk: int = 65536) -> ApproximationTrace:
    """Record-breaking approximations of x by n y + a, a in the lattice.

    For each n <= n_max the distance from x to n y is taken in the torus
    metric; a is the integer vector placing the lift of n y nearest to x.
    Only n that strictly improve on every earlier distance are kept.
    """
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    y = reduce_mod_lattice(np.asarray(y, dtype=float))
    x = reduce_mod_lattice(np.asarray(x, dtype=float))
    shifts = np.array(list(itertools.product((-1, 0, 1), repeat=y.shape[0])), dtype=float)
    trace = ApproximationTrace()
    best = math.inf
    for lo in range(1, n_max + 1, chunk):
        n = np.arange(lo, min(n_max + 1, lo + chunk), dtype=float)
        raw = n[:, None] * y[None, :]
        fl = np.floor(raw)
        red = raw - fl
        d = red - x[None, :]
        dist2 = np.full(len(n), np.inf)
        arg = np.zeros(len(n), dtype=np.int64)
        for si, s in enumerate(shifts):
            amb = (d + s) @ torus.basis.T
            dd = np.einsum("ij,ij->i", amb, amb)
            better = dd < dist2
            dist2[better] = dd[better]
            arg[better] = si
        dist = np.sqrt(dist2)
        running = np.minimum.accumulate(dist)
        prev = np.concatenate([[best], running[:-1]])
        prev = np.minimum(prev, best)
        for i in np.flatnonzero(dist < prev):
            a = (shifts[arg[i]] - fl[i]).astype(np.int64)
            trace.steps.append((int(n[i]), tuple(int(v) for v in a), float(dist[i])))
        best = min(best, float(running[-1]))
    return trace
