"""Intersections X ∩ [n]Y computed on the graph of [n].

Points y with theta_Y(y) = 0 and theta_X(n y) = 0 are the points of
(Y x X) ∩ Γ_n, and projecting to the second factor gives X ∩ [n]Y.
Solving in y keeps the system single valued; inverting [n] would not.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .divisor import ThetaDivisor, divisor_parts, sample_points
from .errors import GridTooCoarse
from .theta import grid_normalized_modulus
from .torus import AbelianTorus, NearestPoints, multiply, reduce_mod_lattice

NEG_INF = -math.inf

EXPECTED_ISOLATED = "ExpectedIsolated"
UNEXPECTED_POSITIVE_DIM = "UnexpectedPositiveDim"

DEDUP_DIST = 1e-6
RANK_THRESHOLD = 1e-6
PROBE_STEPS = 10
PROBE_STEP_SIZE = 1e-3
CLUSTER_FACTOR = 4
TANGENTIAL_SV = 1e-4
TANGENTIAL_MERGE = 1e-3
# smallest default screening grid; 16 loses roots at n = 2 on symmetric inputs
GRID_FLOOR = 32


def expected_dimension(dim_x: int, dim_y: int, dim_a: int):
    """dim X + dim Y - dim A, or -inf when that is negative (empty expected)."""
    if not (0 <= dim_x <= dim_a and 0 <= dim_y <= dim_a):
        raise ValueError("dimensions must satisfy 0 <= dim X, dim Y <= dim A")
    d = dim_x + dim_y - dim_a
    return d if d >= 0 else NEG_INF


def expected_count(X: ThetaDivisor, Y: ThetaDivisor, n: int) -> int:
    """Number of points of Y ∩ [n]^{-1} X for transverse principal divisors.

    [m]^* multiplies the class of a symmetric divisor by m^2, and Θ·Θ = 2
    on a principally polarized surface.
    """
    if X.g != 2 or Y.g != 2:
        raise ValueError("expected_count is defined for g = 2")
    if n == 0:
        raise ValueError("n must be nonzero")
    return 2 * (n * X.multiplier * Y.multiplier) ** 2


def default_grid_res(n: int) -> int:
    return max(GRID_FLOOR, 4 * abs(int(n)))


@dataclass
class IntersectionRecord:
    y_solution: np.ndarray
    x_point: np.ndarray
    residual: float
    n: int
    jacobian_min_sv: float
    classification: str = EXPECTED_ISOLATED
    tangential: bool = False

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "y": [float(v) for v in self.y_solution],
            "x": [float(v) for v in self.x_point],
            "residual": self.residual,
            "jacobian_min_sv": self.jacobian_min_sv,
            "classification": self.classification,
            "tangential": self.tangential,
        }


@dataclass
class ScanReport:
    n_range: tuple
    improper_n: list = field(default_factory=list)
    counts_per_n: dict = field(default_factory=dict)
    coverage_radius_per_N: dict = field(default_factory=dict)
    records: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)


class GraphSystem:
    """F(y) = (theta_Y(y), theta_X(n y)) on reduced representatives.

    Values are the reduced (quasi-periodically normalized) theta sums, which
    share zeros with theta.  ``merit`` rows are the lattice-invariant moduli.
    """

    def __init__(self, torus: AbelianTorus, Y: ThetaDivisor, X: ThetaDivisor, n: int):
        self.torus, self.Y, self.X, self.n = torus, Y, X, int(n)

    def evaluate(self, P, gradient: bool = True):
        P = reduce_mod_lattice(np.atleast_2d(P))
        zy = self.torus.lift(P)
        zx = self.torus.lift(multiply(self.n, P))
        py = divisor_parts(self.torus, self.Y, zy, 1e-14, gradient)
        px = divisor_parts(self.torus, self.X, zx, 1e-14, gradient)
        F = np.stack([py.reduced, px.reduced], axis=1)
        damp = np.stack([py.damping, px.damping], axis=1)
        J = None
        if gradient:
            J = np.stack([py.reduced_grad, self.n * px.reduced_grad], axis=1)
        return F, J, damp

    def residual(self, P) -> np.ndarray:
        F, _, damp = self.evaluate(P, gradient=False)
        return np.max(np.abs(F) * damp, axis=1)

    def normalized_jacobian(self, P) -> np.ndarray:
        _, J, damp = self.evaluate(P)
        return J * damp[:, :, None]


def _newton(system: GraphSystem, P0: np.ndarray, tol: float, iters: int = 120, max_step: float = 0.05):
    """Damped Newton from each row of P0 (lattice coordinates).

    Singular Jacobians fall back to the pseudo-inverse so that candidates
    on positive-dimensional components still settle onto the component.
    Iteration runs until the merit stalls, not merely until it drops below
    ``tol``: roots of higher multiplicity converge only linearly.
    """
    torus = system.torus
    P = reduce_mod_lattice(P0.copy())
    F, J, damp = system.evaluate(P)
    merit = np.sum((np.abs(F) * damp) ** 2, axis=1)
    active = np.ones(len(P), dtype=bool)
    for it in range(iters):
        if it == iters // 3:
            # runs still far from any root by now are abandoned
            active &= merit <= 1e-6
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        Ja, Fa = J[idx], F[idx]
        step = -(np.linalg.pinv(Ja, rcond=1e-13) @ Fa[:, :, None])[:, :, 0]
        norm = np.linalg.norm(step, axis=1)
        cap = np.where(norm > max_step, max_step / np.maximum(norm, 1e-300), 1.0)
        step *= cap[:, None]
        lam = np.ones(idx.size)
        accepted = np.zeros(idx.size, dtype=bool)
        newP = P[idx].copy()
        newF, newJ, newD = Fa.copy(), Ja.copy(), damp[idx].copy()
        newM = merit[idx].copy()
        for _ls in range(12):
            todo = np.flatnonzero(~accepted)
            if todo.size == 0:
                break
            z = torus.lift(P[idx[todo]]) + lam[todo, None] * step[todo]
            trial = reduce_mod_lattice(torus.coords_of(z))
            tF, tJ, tD = system.evaluate(trial)
            tM = np.sum((np.abs(tF) * tD) ** 2, axis=1)
            ok = tM < merit[idx[todo]] * (1 - 1e-4 * lam[todo]) + 1e-300
            good = todo[ok]
            newP[good], newF[good], newJ[good], newD[good], newM[good] = trial[ok], tF[ok], tJ[ok], tD[ok], tM[ok]
            accepted[good] = True
            lam[todo[~ok]] *= 0.5
        P[idx], F[idx], J[idx], damp[idx], merit[idx] = newP, newF, newJ, newD, newM
        small = np.sqrt(newM) <= 1e-16
        stalled = ~accepted | (np.linalg.norm(step, axis=1) * lam < 1e-15)
        active[idx[small | stalled]] = False
    resid = np.max(np.abs(F) * damp, axis=1)
    return P, resid


def _dedup(torus: AbelianTorus, P: np.ndarray, resid: np.ndarray, dist: float = DEDUP_DIST):
    """Greedy merge of points closer than ``dist``, best residual first."""
    if len(P) == 0:
        return P, resid
    from scipy.spatial import cKDTree

    sigma_min = np.linalg.svd(torus.basis, compute_uv=False)[-1]
    order = np.lexsort((*P.T[::-1], resid))
    P, resid = P[order], resid[order]
    tree = cKDTree(np.minimum(P, np.nextafter(1.0, 0)), boxsize=1.0)
    pairs = tree.query_pairs(dist / sigma_min * 1.0001, output_type="ndarray")
    drop = np.zeros(len(P), dtype=bool)
    if len(pairs):
        pairs = pairs[np.lexsort((pairs[:, 1], pairs[:, 0]))]
        d = np.linalg.norm(_ambient_diff(torus, P[pairs[:, 0]], P[pairs[:, 1]]), axis=1)
        for (i, j), dij in zip(pairs, d):
            if dij <= dist and not drop[i]:
                drop[j] = True
    return P[~drop], resid[~drop]


def _merge_tangential(torus, P, resid, sv, radius: float = TANGENTIAL_MERGE, sv_max: float = TANGENTIAL_SV):
    """Collapse near-singular roots lying within ``radius`` of each other.

    A root of multiplicity k is only located to about eps^(1/k), so Newton
    runs started in its basin stop at distinct nearby points.  Of each
    group the smallest-residual point is kept.
    """
    from scipy.spatial import cKDTree

    sing = np.flatnonzero(sv < sv_max)
    if sing.size < 2:
        return P, resid, sv
    sigma_min = np.linalg.svd(torus.basis, compute_uv=False)[-1]
    sub = P[sing]
    tree = cKDTree(np.minimum(sub, np.nextafter(1.0, 0)), boxsize=1.0)
    pairs = tree.query_pairs(radius / sigma_min, output_type="ndarray")
    drop = np.zeros(len(P), dtype=bool)
    if len(pairs):
        d = np.linalg.norm(_ambient_diff(torus, sub[pairs[:, 0]], sub[pairs[:, 1]]), axis=1)
        pairs = pairs[d <= radius]
        rank = np.lexsort((*sub.T[::-1], resid[sing]))
        pos = np.empty_like(rank)
        pos[rank] = np.arange(len(rank))
        # visit better roots first; each absorbs its undropped neighbours
        nbrs = {i: [] for i in range(len(sub))}
        for i, j in pairs:
            nbrs[i].append(j)
            nbrs[j].append(i)
        for i in rank:
            if drop[sing[i]]:
                continue
            for j in nbrs[i]:
                if pos[j] > pos[i]:
                    drop[sing[j]] = True
    keep = ~drop
    return P[keep], resid[keep], sv[keep]


def _ambient_diff(torus, A, B):
    """Shortest ambient difference vectors over the 3^2g neighbouring translates."""
    import itertools

    d = reduce_mod_lattice(B) - reduce_mod_lattice(A)
    best = None
    bestn = np.full(len(d), np.inf)
    for s in itertools.product((-1, 0, 1), repeat=d.shape[1]):
        amb = (d + np.array(s)) @ torus.basis.T
        nn = np.einsum("ij,ij->i", amb, amb)
        better = nn < bestn
        if best is None:
            best = amb.copy()
        best[better] = amb[better]
        bestn = np.minimum(bestn, nn)
    return best


def _grid_candidates(torus, Y, X, n, r):
    gy = grid_normalized_modulus(torus, r, Y.char, Y.multiplier, Y.c)
    gx = grid_normalized_modulus(torus, r, X.char, X.multiplier, X.c)
    perm = (int(n) * np.arange(r)) % r
    gx = gx[np.ix_(perm, perm, perm, perm)] if torus.g == 2 else gx[np.ix_(*([perm] * (2 * torus.g)))]
    # a common zero needs both moduli small, so screen on the larger one
    merit = np.maximum(gy / np.sqrt(np.mean(gy.astype(np.float64) ** 2)), gx / np.sqrt(np.mean(gx.astype(np.float64) ** 2)))
    del gy, gx
    local_min = ndimage.minimum_filter(merit, size=3, mode="wrap") == merit
    idx = np.argwhere(local_min)
    return idx / r


def solve_graph_system(
    torus: AbelianTorus,
    Y: ThetaDivisor,
    X: ThetaDivisor,
    n: int,
    grid_res: int | None = None,
    tol: float = 1e-9,
) -> list[IntersectionRecord]:
    """All y in Y with n y in X, found by grid screening plus Newton polishing.

    Returns records sorted by the y coordinates, after merging roots closer
    than 1e-6.  Records are unclassified (all ExpectedIsolated) until
    :func:`classify_components` runs.
    """
    if torus.g != 2:
        raise ValueError("the graph-system solver supports g = 2 only")
    if n == 0:
        raise ValueError("n must be nonzero")
    r = default_grid_res(n) if grid_res is None else int(grid_res)
    if r < 16:
        raise ValueError("grid_res must be at least 16")
    system = GraphSystem(torus, Y, X, n)
    P0 = _grid_candidates(torus, Y, X, n, r)
    P, resid = _newton(system, P0, tol)
    ok = resid <= tol
    P, resid = _dedup(torus, P[ok], resid[ok])
    records = []
    if len(P):
        Jn = system.normalized_jacobian(P)
        sv = np.linalg.svd(Jn, compute_uv=False)[:, -1]
        P, resid, sv = _merge_tangential(torus, P, resid, sv)
        order = np.lexsort(P.T[::-1])
        for i in order:
            records.append(
                IntersectionRecord(
                    y_solution=P[i],
                    x_point=multiply(n, P[i]),
                    residual=float(resid[i]),
                    n=int(n),
                    jacobian_min_sv=float(sv[i]),
                )
            )
    return records


def _null_directions(J: np.ndarray):
    _, s, vh = np.linalg.svd(J)
    return s, vh[:, -1, :].conj(), vh[:, 0, :].conj()


def trace_probe(system: GraphSystem, y, tol: float, steps: int = PROBE_STEPS, h: float = PROBE_STEP_SIZE) -> bool:
    """Follow the Jacobian null direction from y; True when every corrected
    step stays on both divisors within ``tol``.

    Each corrector works on the complex line through the predicted point
    orthogonal to the current direction, so an isolated tangential root
    cannot pull the probe back to where it started.
    """
    torus = system.torus
    z = torus.lift(reduce_mod_lattice(y))
    v_prev = None
    for _ in range(steps):
        P = reduce_mod_lattice(torus.coords_of(z))[None, :]
        _, J, damp = system.evaluate(P)
        _, v, w = _null_directions(J * damp[:, :, None])
        v, w = v[0], w[0]
        if v_prev is not None:
            ph = np.vdot(v, v_prev)
            v = v * (ph / abs(ph) if abs(ph) > 0 else 1)
        v_prev = v
        zp = z + h * v
        t = 0j
        for _c in range(12):
            Pc = reduce_mod_lattice(torus.coords_of(zp + t * w))[None, :]
            F, Jc, _ = system.evaluate(Pc)
            a = Jc[0] @ w
            denom = np.vdot(a, a).real
            if denom == 0:
                break
            dt = np.vdot(a, F[0]) / denom
            t -= dt
            if abs(dt) < 1e-15:
                break
        z = zp + t * w
        if system.residual(reduce_mod_lattice(torus.coords_of(z))[None, :])[0] > tol:
            return False
    return True


def _cluster_flags(torus, P, threshold: int, link: float) -> np.ndarray:
    """Points in single-linkage clusters with more than ``threshold`` members
    whose local spread is essentially two real dimensional (a curve)."""
    from scipy.sparse import coo_matrix
    from scipy.sparse.csgraph import connected_components
    from scipy.spatial import cKDTree

    flags = np.zeros(len(P), dtype=bool)
    if len(P) <= threshold:
        return flags
    sigma_min = np.linalg.svd(torus.basis, compute_uv=False)[-1]
    tree = cKDTree(np.minimum(P, np.nextafter(1.0, 0)), boxsize=1.0)
    pairs = tree.query_pairs(link / sigma_min, output_type="ndarray")
    if len(pairs) == 0:
        return flags
    graph = coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(len(P), len(P)))
    _, labels = connected_components(graph, directed=False)
    for lab in np.unique(labels):
        members = np.flatnonzero(labels == lab)
        if len(members) <= threshold:
            continue
        k = min(8, len(members) - 1)
        sub = cKDTree(np.minimum(P[members], np.nextafter(1.0, 0)), boxsize=1.0)
        _, nb = sub.query(P[members], k=k + 1)
        dims = []
        for row in nb:
            diff = _ambient_diff(torus, np.repeat(P[members[row[:1]]], k, axis=0), P[members[row[1:]]])
            sv = np.linalg.svd(diff - diff.mean(axis=0), compute_uv=False)
            var = sv**2
            dims.append(var[:2].sum() / max(var.sum(), 1e-300))
        if np.median(dims) >= 0.9:
            flags[members] = True
    return flags


def classify_components(
    records: list[IntersectionRecord],
    torus: AbelianTorus,
    Y: ThetaDivisor,
    X: ThetaDivisor,
    n: int,
    tol: float = 1e-9,
    grid_res: int | None = None,
) -> list[IntersectionRecord]:
    """Flag records lying on positive-dimensional components.

    A record is UnexpectedPositiveDim when its Jacobian is numerically rank
    deficient and a curve-tracing probe stays on both divisors, or when it
    belongs to a curve-like cluster of more than 4x the expected number of
    roots.  Rank-deficient records whose probe fails are isolated
    tangential roots; they stay ExpectedIsolated with ``tangential`` set.
    """
    if not records:
        return records
    system = GraphSystem(torus, Y, X, n)
    P = np.array([r.y_solution for r in records])
    r = default_grid_res(n) if grid_res is None else grid_res
    clustered = _cluster_flags(torus, P, CLUSTER_FACTOR * expected_count(X, Y, n), link=4.0 / r)
    for rec, cl in zip(records, clustered):
        probe = rec.jacobian_min_sv < RANK_THRESHOLD and trace_probe(system, rec.y_solution, max(tol, 1e-9))
        if probe or cl:
            rec.classification = UNEXPECTED_POSITIVE_DIM
            rec.tangential = False
        else:
            rec.classification = EXPECTED_ISOLATED
            rec.tangential = rec.jacobian_min_sv < RANK_THRESHOLD
    return records


def intersect(torus, Y, X, n, grid_res=None, tol=1e-9):
    """solve_graph_system followed by classify_components."""
    recs = solve_graph_system(torus, Y, X, n, grid_res, tol)
    return classify_components(recs, torus, Y, X, n, tol, grid_res)


def properness_scan(
    torus: AbelianTorus,
    X: ThetaDivisor,
    Y: ThetaDivisor,
    n_min: int,
    n_max: int,
    grid_res: int | None = None,
    tol: float = 1e-9,
    threads: int = 1,
    grid_factor: int = 4,
) -> ScanReport:
    """Run the intersection for every nonzero n in [n_min, n_max].

    ``grid_res`` None uses max(32, grid_factor |n|); an explicit value is
    used for every n.
    """
    ns = [n for n in range(int(n_min), int(n_max) + 1) if n != 0]
    report = ScanReport(n_range=(int(n_min), int(n_max)))

    def one(n):
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            res = grid_res if grid_res is not None else max(GRID_FLOOR, grid_factor * abs(n))
            recs = intersect(torus, Y, X, n, res, tol)
        return n, recs, [str(w.message) for w in caught]

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one, ns))
    else:
        results = [one(n) for n in ns]
    for n, recs, warns in sorted(results, key=lambda t: t[0]):
        report.records[n] = recs
        improper = any(r.classification == UNEXPECTED_POSITIVE_DIM for r in recs)
        if improper:
            report.improper_n.append(n)
        found = sum(1 for r in recs if r.classification == EXPECTED_ISOLATED)
        exp = expected_count(X, Y, n)
        report.counts_per_n[n] = (found, exp)
        if not improper and found < exp:
            tang = sum(1 for r in recs if r.tangential)
            msg = f"n={n}: found {found} isolated roots ({tang} tangential, counted once), expected {exp}"
            warnings.warn(msg, GridTooCoarse, stacklevel=2)
            report.warnings.append(msg)
        report.warnings.extend(f"n={n}: {w}" for w in warns)
    return report


def coverage_metric(torus: AbelianTorus, X: ThetaDivisor, intersection_points, probe_count: int = 200, seed: int = 0) -> float:
    """Empirical covering radius: the largest distance from a random point
    of X to its nearest intersection point."""
    pts = np.atleast_2d(np.asarray(intersection_points, dtype=float))
    if pts.size == 0:
        raise ValueError("intersection_points must be nonempty")
    probes = np.array([dp.point for dp in sample_points(torus, X, probe_count, seed)])
    dist, _ = NearestPoints(torus, pts).query(probes)
    return float(np.max(dist))


def coverage_curve(
    torus: AbelianTorus,
    X: ThetaDivisor,
    N_values,
    grid_factor: int = 4,
    probe_count: int = 200,
    seed: int = 0,
    tol: float = 1e-9,
    Y: ThetaDivisor | None = None,
    threads: int = 1,
):
    """Covering radius on X of the union of expected points of X ∩ [n]Y,
    2 <= n <= N, for each N in ``N_values``.  Y defaults to X.

    Returns (radius per N, expected points per n).
    """
    Y = X if Y is None else Y
    Ns = sorted(int(N) for N in N_values)
    probes = np.array([dp.point for dp in sample_points(torus, X, probe_count, seed)])

    def one(n):
        recs = intersect(torus, Y, X, n, max(GRID_FLOOR, grid_factor * n), tol)
        return np.array([r.x_point for r in recs if r.classification == EXPECTED_ISOLATED]).reshape(-1, 2 * torus.g)

    ns = list(range(2, Ns[-1] + 1))
    if threads > 1:
        # largest n first keeps the pool busy
        with ThreadPoolExecutor(max_workers=threads) as pool:
            found = dict(zip(ns[::-1], pool.map(one, ns[::-1])))
    else:
        found = {n: one(n) for n in ns}
    per_n = {n: found[n] for n in ns}
    radius = {}
    for N in Ns:
        pts = np.vstack([per_n[n] for n in range(2, N + 1)])
        radius[N] = float(np.max(NearestPoints(torus, pts).query(probes)[0])) if len(pts) else math.inf
    return radius, per_n
