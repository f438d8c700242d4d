"""Scenario files, run orchestration and report writing.

One JSON scenario file describes one run; a run writes a JSON report,
plot-ready CSV series, PNG figures and a manifest into one directory.
"""

from __future__ import annotations

import copy
import csv
import hashlib
import io
import json
import logging
import math
import os
import tempfile
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .errors import (
    GridOverflow,
    ModulusOverflow,
    NonSymmetric,
    NotPositiveDefinite,
    ParseError,
    SamplingExhausted,
    TorilabError,
    ValidationError,
)
from .theta import ThetaCharacteristic
from .torus import AbelianTorus, TorsionPoint, make_torus

log = logging.getLogger(__name__)

RUN_KINDS = ("intersect-scan", "density", "segments", "equidist", "torsion-delta", "census")

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_BUDGET = 3
EXIT_INTERNAL = 4

STANDARD_OMEGA = [[[0.2, 0.75], [0.3, 0.1]], [[0.3, 0.1], [-0.15, 0.65]]]
GENERIC_TRANSLATE = [[0.137, 0.071], [-0.213, 0.049]]
SEGMENT_ROW_LIMIT = 10**7

# module ids for seed splitting
SEED_STREAMS = {"density": 1, "equidist": 2, "census": 3, "sampling": 4}

DEFAULT_PARAMS = {
    "intersect-scan": {"n_min": -5, "n_max": 5, "grid_factor": 4, "grid_res": None},
    "density": {"N_values": [5, 10, 20], "probe_count": 200, "grid_factor": 4},
    "segments": {"n": 3, "g": None},
    "equidist": {
        "y": None,
        "N_values": [100, 1000, 10000],
        "frequencies": [[1, 0, 0, 0], [0, 1, 0, 0], [1, 1, 0, 0], [1, -1, 0, 0], [2, 1, 1, 1]],
        "discrepancy_grid": 10,
        "targets": 20,
        "n_max": 10000,
    },
    "torsion-delta": {
        "conditions": None,
        "y_torsion": None,
        "x_torsion": None,
        "N_factor": 100,
        "eps": 1e-9,
    },
    "census": {"N": 10000, "eps": 1e-3, "x": None, "y": None, "torsion_V": [], "use_divisors": False, "grid_factor": 4},
}


@dataclass
class Scenario:
    kind: str
    torus: AbelianTorus
    X: object
    Y: object
    params: dict
    seed: int = 0
    tol: float = 1e-9
    threads: int = 1
    output_dir: Path = Path("out")
    plots: bool = True
    raw: dict = field(default_factory=dict)

    def materialized(self) -> dict:
        """Every setting that influences the data files, defaults included."""
        return {
            "run": self.kind,
            "torus": self.raw["torus"],
            "X": self.raw["X"],
            "Y": self.raw["Y"],
            "params": self.params,
            "seed": self.seed,
            "tol": self.tol,
        }

    @property
    def hash(self) -> str:
        blob = json.dumps(self.materialized(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


@dataclass
class RunManifest:
    scenario_hash: str
    tool_version: str
    started: str
    finished: str
    tolerances: dict
    outputs: list

    def to_dict(self) -> dict:
        return {
            "scenario_hash": self.scenario_hash,
            "tool_version": self.tool_version,
            "started": self.started,
            "finished": self.finished,
            "tolerances": self.tolerances,
            "outputs": self.outputs,
        }


# ---------------------------------------------------------------- parsing


def _complex_entry(v, where):
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, (list, tuple)) and len(v) == 2 and all(isinstance(t, (int, float)) for t in v):
        return complex(v[0], v[1])
    raise ValidationError(f"{where}: expected a number or an [re, im] pair, got {v!r}")


def parse_omega(spec) -> np.ndarray:
    """Rows of [re, im] pairs, or a flat row-major list of g*g pairs."""
    if not isinstance(spec, list) or not spec:
        raise ValidationError("torus.omega: expected a nonempty array")
    if all(isinstance(row, list) and row and isinstance(row[0], list) for row in spec):
        rows = [[_complex_entry(v, f"torus.omega[{i}][{j}]") for j, v in enumerate(row)] for i, row in enumerate(spec)]
    else:
        flat = [_complex_entry(v, f"torus.omega[{i}]") for i, v in enumerate(spec)]
        g = math.isqrt(len(flat))
        if g * g != len(flat):
            raise ValidationError(f"torus.omega: {len(flat)} entries do not form a square matrix")
        rows = [flat[i * g : (i + 1) * g] for i in range(g)]
    if any(len(r) != len(rows) for r in rows):
        raise ValidationError("torus.omega: period matrix must be square")
    return np.array(rows, dtype=complex)


def parse_divisor(spec, g: int, name: str):
    from .divisor import ThetaDivisor

    if spec is None:
        spec = {}
    if not isinstance(spec, dict):
        raise ValidationError(f"{name}: expected an object")
    try:
        alpha = [Fraction(str(a)) for a in spec.get("alpha", ["0"] * g)]
        beta = [Fraction(str(b)) for b in spec.get("beta", ["0"] * g)]
    except (ValueError, ZeroDivisionError) as exc:
        raise ValidationError(f"{name}: bad characteristic entry ({exc})") from None
    if len(alpha) != g or len(beta) != g:
        raise ValidationError(f"{name}: characteristic must have {g} entries per half")
    translate = [_complex_entry(v, f"{name}.translate[{i}]") for i, v in enumerate(spec.get("translate", [0] * g))]
    if len(translate) != g:
        raise ValidationError(f"{name}.translate: expected {g} entries")
    mult = spec.get("multiplier", 1)
    if not isinstance(mult, int) or mult == 0:
        raise ValidationError(f"{name}.multiplier: must be a nonzero integer")
    D = ThetaDivisor(ThetaCharacteristic(tuple(alpha), tuple(beta)), tuple(translate), mult)
    return D, D.to_dict()


def _require(cond: bool, msg: str):
    if not cond:
        raise ValidationError(msg)


def _parse_points(items, dim: int, name: str) -> list:
    if not isinstance(items, list):
        raise ValidationError(f"{name}: expected a list of points")
    out = []
    for i, p in enumerate(items):
        if not isinstance(p, list) or len(p) != dim:
            raise ValidationError(f"{name}[{i}]: expected {dim} coordinates")
        try:
            out.append(TorsionPoint.parse(p))
        except (ValueError, ZeroDivisionError) as exc:
            raise ValidationError(f"{name}[{i}]: bad fraction ({exc})") from None
    return out


def _validate_params(kind: str, p: dict, g: int):
    if kind == "intersect-scan":
        _require(isinstance(p["n_min"], int) and isinstance(p["n_max"], int), "params.n_min/n_max must be integers")
        _require(p["n_min"] <= p["n_max"], "params.n_min must not exceed params.n_max")
        _require(any(n != 0 for n in range(p["n_min"], p["n_max"] + 1)), "params: n range contains only 0")
        _require(isinstance(p["grid_factor"], int) and p["grid_factor"] >= 1, "params.grid_factor must be >= 1")
        _require(p["grid_res"] is None or (isinstance(p["grid_res"], int) and p["grid_res"] >= 16), "params.grid_res must be >= 16")
        _require(g == 2, "intersect-scan requires g = 2")
    elif kind == "density":
        Ns = p["N_values"]
        _require(isinstance(Ns, list) and Ns and all(isinstance(N, int) and N >= 2 for N in Ns), "params.N_values must be integers >= 2")
        _require(isinstance(p["probe_count"], int) and p["probe_count"] >= 1, "params.probe_count must be >= 1")
        _require(isinstance(p["grid_factor"], int) and p["grid_factor"] >= 1, "params.grid_factor must be >= 1")
        _require(g == 2, "density requires g = 2")
    elif kind == "segments":
        _require(isinstance(p["n"], int) and p["n"] != 0, "params.n must be a nonzero integer")
        _require(isinstance(p["g"], int) and p["g"] >= 1, "params.g must be a positive integer")
    elif kind == "equidist":
        _require(isinstance(p["y"], list) and len(p["y"]) == 2 * g, f"params.y must have {2 * g} coordinates")
        _require(all(isinstance(N, int) and N >= 1 for N in p["N_values"]), "params.N_values must be positive integers")
        for k in p["frequencies"]:
            _require(isinstance(k, list) and len(k) == 2 * g and any(k), "params.frequencies: nonzero integer vectors of length 2g")
        _require(isinstance(p["discrepancy_grid"], int) and p["discrepancy_grid"] >= 2, "params.discrepancy_grid must be >= 2")
        _require(isinstance(p["targets"], int) and p["targets"] >= 1, "params.targets must be >= 1")
        _require(isinstance(p["n_max"], int) and p["n_max"] >= 1, "params.n_max must be >= 1")
    elif kind == "torsion-delta":
        _require(p["eps"] > 0, "params.eps must be positive (eps > 0 required)")
        _require(isinstance(p["N_factor"], int) and p["N_factor"] >= 1, "params.N_factor must be >= 1")
        if p["conditions"] is not None:
            for i, c in enumerate(p["conditions"]):
                _require(
                    isinstance(c, list) and len(c) == 2 and all(isinstance(v, int) for v in c) and c[1] >= 1 and 0 <= c[0] < c[1],
                    f"params.conditions[{i}]: need [e, k] with 0 <= e < k",
                )
        else:
            _require(p["y_torsion"] is not None and p["x_torsion"] is not None, "params: give conditions or y_torsion and x_torsion")
    elif kind == "census":
        _require(p["eps"] > 0, "params.eps must be positive (eps > 0 required)")
        _require(isinstance(p["N"], int) and p["N"] >= 1, "params.N must be >= 1")
        if not p["use_divisors"]:
            for name in ("x", "y"):
                pts = p[name]
                _require(isinstance(pts, list) and pts and all(isinstance(q, list) and len(q) == 2 * g for q in pts), f"params.{name}: list of points with {2 * g} coordinates")
        else:
            _require(g == 2, "census with divisors requires g = 2")


def load_scenario_dict(path) -> dict:
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise ParseError(f"{path}:1:1: top level must be an object")
    return data


def build_scenario(data: dict, kind: str | None = None, overrides: dict | None = None) -> Scenario:
    """Validate a scenario mapping and materialize every default."""
    data = copy.deepcopy(data)
    overrides = overrides or {}
    kind = kind or data.get("run")
    if kind not in RUN_KINDS:
        raise ValidationError(f"run: unknown run kind {kind!r}; expected one of {', '.join(RUN_KINDS)}")
    if data.get("run") not in (None, kind):
        raise ValidationError(f"run: config says {data.get('run')!r} but {kind!r} was requested")

    torus_spec = data.get("torus", {"omega": STANDARD_OMEGA})
    if not isinstance(torus_spec, dict) or "omega" not in torus_spec:
        raise ValidationError("torus: expected an object with an 'omega' entry")
    omega = parse_omega(torus_spec["omega"])
    simple = torus_spec.get("simple", True)
    _require(isinstance(simple, bool), "torus.simple must be a boolean")
    try:
        torus = make_torus(omega, simple=simple)
    except NonSymmetric as exc:
        raise ValidationError(f"torus.omega: symmetry invariant violated ({exc})") from None
    except NotPositiveDefinite as exc:
        raise ValidationError(f"torus.omega: positivity invariant violated ({exc})") from None
    g = torus.g
    ev = np.linalg.eigvalsh(torus.imag)
    if ev[0] < 0.3 or ev[-1] > 30:
        log.warning("Im(omega) eigenvalues %.3g..%.3g lie outside the well-conditioned range [0.3, 30]", ev[0], ev[-1])
    raw_torus = {"omega": [[[z.real, z.imag] for z in row] for row in omega.tolist()], "simple": simple}

    X, raw_x = parse_divisor(data.get("X"), g, "X")
    Y, raw_y = parse_divisor(data.get("Y"), g, "Y")

    params = copy.deepcopy(DEFAULT_PARAMS[kind])
    given = data.get("params", {})
    if not isinstance(given, dict):
        raise ValidationError("params: expected an object")
    unknown = set(given) - set(params)
    if unknown:
        raise ValidationError(f"params: unknown keys {sorted(unknown)} for run kind {kind!r}")
    params.update(given)
    if kind == "segments" and params["g"] is None:
        params["g"] = g
    if kind == "equidist" and params["y"] is None:
        from .equidist import GOLDEN_TEST_POINT

        params["y"] = list(GOLDEN_TEST_POINT) if g == 2 else [((k + 1) * math.sqrt(2)) % 1 for k in range(2 * g)]
    _validate_params(kind, params, g)
    if kind == "torsion-delta" and params["conditions"] is None:
        _parse_points(params["y_torsion"], 2 * g, "params.y_torsion")
        _parse_points(params["x_torsion"], 2 * g, "params.x_torsion")

    seed = overrides.get("seed", data.get("seed", 0))
    _require(isinstance(seed, int) and 0 <= seed < 2**64, "seed must be an unsigned 64-bit integer")
    tol = overrides.get("tol", data.get("tol", 1e-9))
    _require(isinstance(tol, (int, float)) and 0 < tol < 1, "tol must lie in (0, 1)")
    threads = overrides.get("threads", data.get("threads", 1))
    _require(isinstance(threads, int) and threads >= 1, "threads must be a positive integer")
    out = overrides.get("output_dir", data.get("output_dir", "out"))
    return Scenario(
        kind=kind,
        torus=torus,
        X=X,
        Y=Y,
        params=params,
        seed=int(seed),
        tol=float(tol),
        threads=int(threads),
        output_dir=Path(out),
        plots=overrides.get("plots", True),
        raw={"torus": raw_torus, "X": raw_x, "Y": raw_y},
    )


def parse_scenario(path, kind: str | None = None, **overrides) -> Scenario:
    return build_scenario(load_scenario_dict(path), kind, overrides)


# ---------------------------------------------------------------- writing


def _atomic_write(path: Path, data: bytes):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (np.floating,)):
        return repr(float(v))
    if isinstance(v, (np.integer,)):
        return str(int(v))
    return v


def write_csv(path: Path, header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    _atomic_write(path, buf.getvalue().encode("utf-8"))


def _json_default(o):
    if isinstance(o, Fraction):
        return f"{o.numerator}/{o.denominator}"
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, complex):
        return [o.real, o.imag]
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def _clean(o):
    """Replace non-finite floats, which strict JSON cannot carry."""
    if isinstance(o, float) and not math.isfinite(o):
        return "-inf" if o < 0 else ("inf" if o > 0 else "nan")
    if isinstance(o, dict):
        return {str(k): _clean(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_clean(v) for v in o]
    return o


def write_json(path: Path, obj):
    text = json.dumps(_clean(obj), indent=2, sort_keys=True, default=_json_default, allow_nan=False)
    _atomic_write(path, (text + "\n").encode("utf-8"))


def seed_sequence(seed: int, stream: str, index: int = 0) -> np.random.Generator:
    """Counter-based split of the scenario seed per (module, task index)."""
    return np.random.default_rng([seed & (2**64 - 1), SEED_STREAMS[stream], index])


# ---------------------------------------------------------------- pipelines


def _run_intersect_scan(sc: Scenario, out: Path):
    from .intersection import properness_scan
    from .segments import attribute_solution

    p = sc.params
    report = properness_scan(
        sc.torus, sc.X, sc.Y, p["n_min"], p["n_max"], p["grid_res"], sc.tol, sc.threads, p["grid_factor"]
    )
    rows = []
    records = []
    for n in sorted(report.counts_per_n):
        found, exp = report.counts_per_n[n]
        proper = n not in report.improper_n
        tang = sum(1 for r in report.records[n] if r.tangential)
        rows.append((n, found, exp, "yes" if proper else "no", tang))
        for r in report.records[n]:
            d = r.to_dict()
            d["segment_offset"] = list(attribute_solution(r.y_solution, n).a)
            records.append(d)
    files = {"summary.csv": (("n", "found", "expected", "proper", "tangential"), rows)}
    body = {
        "improper_n": report.improper_n,
        "counts_per_n": {str(n): {"found": f, "expected": e} for n, (f, e) in sorted(report.counts_per_n.items())},
        "records": records,
        "warnings": report.warnings,
    }
    return body, files


def _run_density(sc: Scenario, out: Path):
    from .intersection import coverage_curve

    p = sc.params
    radius, per_n = coverage_curve(
        sc.torus, sc.X, p["N_values"], p["grid_factor"], p["probe_count"], _derived_seed(sc, "density"), sc.tol, Y=sc.Y, threads=sc.threads
    )
    rows = [(N, radius[N], sum(len(per_n[n]) for n in range(2, N + 1))) for N in sorted(radius)]
    files = {
        "coverage.csv": (("N", "covering_radius", "points"), rows),
        "points_per_n.csv": (("n", "expected_points"), [(n, len(v)) for n, v in sorted(per_n.items())]),
    }
    body = {"coverage_radius_per_N": {str(N): r for N, r in sorted(radius.items())}, "probe_count": p["probe_count"]}
    return body, files


def _derived_seed(sc: Scenario, stream: str, index: int = 0) -> int:
    return int(seed_sequence(sc.seed, stream, index).integers(0, 2**63 - 1))


def _run_segments(sc: Scenario, out: Path):
    from .segments import enumerate_segments

    n, g = sc.params["n"], sc.params["g"]
    per = (n if n > 0 else -n + 1) ** (2 * g)
    if per > SEGMENT_ROW_LIMIT:
        raise ModulusOverflow(f"{per} segments exceed the materialization budget {SEGMENT_ROW_LIMIT}")
    seg_rows = []
    for i, seg in enumerate(enumerate_segments(n, g)):
        seg_rows.append((i, *seg.a, seg.height))
    sign = 1 if n > 0 else -1
    summary = []
    for m in range(1, abs(n) + 1):
        mm = sign * m
        cnt, mh = 0, 0
        for seg in enumerate_segments(mm, g):
            cnt += 1
            mh = max(mh, seg.height)
        summary.append((mm, cnt, mh))
    header = ("index", *[f"a{i + 1}" for i in range(2 * g)], "height")
    files = {"segments.csv": (header, seg_rows), "segment_counts.csv": (("n", "count", "max_height"), summary)}
    body = {"n": n, "g": g, "count": len(seg_rows), "max_height": max(r[-1] for r in seg_rows)}
    return body, files


def _run_equidist(sc: Scenario, out: Path):
    from .equidist import approximating_translates, discrepancy_estimate, orbit, weyl_sum

    p = sc.params
    y = np.array(p["y"], dtype=float)
    weyl_rows, disc_rows = [], []
    for N in p["N_values"]:
        for k in p["frequencies"]:
            weyl_rows.append((N, " ".join(str(v) for v in k), weyl_sum(y, range(1, N + 1), k).magnitude))
        disc_rows.append((N, discrepancy_estimate(orbit(y, N), p["discrepancy_grid"])))
    approx_rows, finals = [], []
    for t in range(p["targets"]):
        rng = seed_sequence(sc.seed, "equidist", t)
        yy = rng.random(2 * sc.torus.g)
        x = rng.random(2 * sc.torus.g)
        trace = approximating_translates(sc.torus, yy, x, p["n_max"])
        for n, a, d in trace.steps:
            approx_rows.append((t, n, " ".join(map(str, a)), d))
        finals.append(trace.final_dist)
    files = {
        "weyl.csv": (("N", "k", "magnitude"), weyl_rows),
        "discrepancy.csv": (("N", "discrepancy"), disc_rows),
        "approximation.csv": (("target", "n", "a", "dist"), approx_rows),
    }
    body = {"y": p["y"], "final_dist_per_target": finals, "max_final_dist": max(finals)}
    return body, files


def _run_torsion_delta(sc: Scenario, out: Path):
    from .density import (
        CongruenceCondition,
        density_of_union,
        empirical_union_fraction,
        exceptional_set,
        find_torsion_pairs,
    )

    p = sc.params
    g = sc.torus.g
    pair_rows = []
    V = []
    if p["conditions"] is not None:
        conds = [CongruenceCondition(e, k) for e, k in p["conditions"]]
        empirical = None
    else:
        ys = _parse_points(p["y_torsion"], 2 * g, "params.y_torsion")
        xs = _parse_points(p["x_torsion"], 2 * g, "params.x_torsion")
        pairs = find_torsion_pairs(ys, xs)
        conds = [c for _, c in pairs]
        V = exceptional_set(pairs)
        for (t, tp), c in pairs:
            pair_rows.append((" ".join(t.to_strings()), " ".join(tp.to_strings()), c.e, c.k))
        empirical = (xs, ys)
    res = density_of_union(conds)
    files = {"conditions.csv": (("e", "k"), [(c.e, c.k) for c in conds])}
    if pair_rows:
        files["pairs.csv"] = (("t", "t_prime", "e", "k"), pair_rows)
    body = {"density": res.as_dict(), "V": [v.to_strings() for v in V], "eps": p["eps"]}
    if empirical is not None and conds:
        xs, ys = empirical
        L = res.bad_set_modulus
        series = []
        for mult in (1, 10, p["N_factor"]):
            N = mult * L
            frac = empirical_union_fraction(sc.torus, [x.as_float() for x in xs], [y.as_float() for y in ys], N, p["eps"])
            series.append((N, frac, float(res.delta)))
        files["empirical.csv"] = (("N", "fraction", "delta"), series)
        body["empirical_fraction"] = series[-1][1]
    return body, files


def _run_census(sc: Scenario, out: Path):
    from .segments import bad_n_census

    p = sc.params
    V = [TorsionPoint.parse(v) for v in p["torsion_V"]]
    if p["use_divisors"]:
        regime, rows = bad_n_census(sc.torus, sc.X, sc.Y, p["N"], V, p["eps"], p["grid_factor"], sc.tol)
    else:
        xs = np.array(p["x"], dtype=float)
        ys = np.array(p["y"], dtype=float)
        regime, rows = bad_n_census(sc.torus, xs, ys, p["N"], V, p["eps"])
    bad = [(n, c) for n, c in rows if c > 0]
    total = len(bad)
    files = {"census.csv": (("n", "bad_count"), rows)}
    body = {"regime": regime, "bad_n_total": total, "bad_n": [n for n, _ in bad], "eps": p["eps"]}
    return body, files


PIPELINES = {
    "intersect-scan": _run_intersect_scan,
    "density": _run_density,
    "segments": _run_segments,
    "equidist": _run_equidist,
    "torsion-delta": _run_torsion_delta,
    "census": _run_census,
}


def _stamp() -> str:
    return time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())


def run(sc: Scenario) -> RunManifest:
    """Execute a validated scenario and write its outputs."""
    out = Path(sc.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    started = _stamp()
    body, files = PIPELINES[sc.kind](sc, out)
    written = []
    for name, (header, rows) in files.items():
        write_csv(out / name, header, rows)
        written.append(name)
    tolerances = {
        "tol": sc.tol,
        "theta_abs_tol": 1e-14,
        "membership_eps": 1e-8,
        "dedup_dist": 1e-6,
        "rank_threshold": 1e-6,
        "symmetry_tol": 1e-12,
        "posdef_tol": 1e-10,
        "linearity_tol": 1e-9,
    }
    report = {
        "run": sc.kind,
        "scenario": sc.materialized(),
        "scenario_hash": sc.hash,
        "tolerances": tolerances,
        "result": body,
    }
    write_json(out / "report.json", report)
    written.append("report.json")
    if sc.plots:
        from .plotting import render

        written.extend(render(sc.kind, out, files, body))
    manifest = RunManifest(sc.hash, __version__, started, _stamp(), tolerances, sorted(written))
    write_json(out / "manifest.json", manifest.to_dict())
    return manifest


def exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, (ValidationError, ParseError)):
        return EXIT_VALIDATION
    if isinstance(exc, (ModulusOverflow, SamplingExhausted, GridOverflow)):
        return EXIT_BUDGET
    if isinstance(exc, TorilabError):
        return EXIT_VALIDATION
    return EXIT_INTERNAL
