"""PNG figures rendered next to the CSV series of a run."""

from __future__ import annotations

from pathlib import Path

import numpy as np
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

STYLE = {"figsize": (5, 3.2), "dpi": 120}


def _figure():
    fig = Figure(figsize=STYLE["figsize"], dpi=STYLE["dpi"])
    FigureCanvasAgg(fig)
    ax = fig.add_subplot(1, 1, 1)
    for side in ("top", "right"):
        ax.spines[side].set_visible(False)
    ax.tick_params(labelsize=8)
    return fig, ax


def _save(fig, path: Path) -> str:
    fig.tight_layout()
    # no Software/date metadata, so reruns write identical bytes
    fig.savefig(path, format="png", metadata={"Software": None})
    return path.name


def _columns(rows, *idx):
    return [np.array([r[i] for r in rows]) for i in idx]


def plot_scan(out: Path, rows) -> list:
    n, found, exp = _columns(rows, 0, 1, 2)
    proper = np.array([r[3] == "yes" for r in rows])
    fig, ax = _figure()
    ax.bar(n[proper], found[proper], color="0.55", label="isolated roots")
    ax.bar(n[~proper], found[~proper], color="tab:red", label="improper n")
    ax.plot(n, exp, "k_", markersize=12, label="expected")
    ax.set_xlabel("n")
    ax.set_ylabel("count")
    ax.legend(frameon=False, fontsize=7)
    return [_save(fig, out / "summary.png")]


def plot_coverage(out: Path, rows) -> list:
    N, r = _columns(rows, 0, 1)
    fig, ax = _figure()
    ax.loglog(N, r, "o-", color="k")
    ax.set_xlabel("N")
    ax.set_ylabel("covering radius on X")
    return [_save(fig, out / "coverage.png")]


def plot_segments(out: Path, rows) -> list:
    n, count, mh = _columns(rows, 0, 1, 2)
    fig, ax = _figure()
    ax.semilogy(np.abs(n), count, "o-", color="k", label="segments")
    ax.set_xlabel("|n|")
    ax.set_ylabel("segment count")
    ax2 = ax.twinx()
    ax2.plot(np.abs(n), mh, "s--", color="0.5", label="max height")
    ax2.set_ylabel("max height", fontsize=8)
    ax2.tick_params(labelsize=8)
    return [_save(fig, out / "segment_counts.png")]


def plot_equidist(out: Path, weyl_rows, disc_rows) -> list:
    fig, ax = _figure()
    for k in sorted({r[1] for r in weyl_rows}):
        sel = [r for r in weyl_rows if r[1] == k]
        ax.loglog([r[0] for r in sel], [max(r[2], 1e-17) for r in sel], "o-", label=f"k = ({k})")
    ax.set_xlabel("N")
    ax.set_ylabel("|Weyl sum| / N")
    ax.legend(frameon=False, fontsize=6)
    names = [_save(fig, out / "weyl.png")]
    fig, ax = _figure()
    N, D = _columns(disc_rows, 0, 1)
    ax.semilogx(N, D, "o-", color="k")
    ax.set_xlabel("N")
    ax.set_ylabel("box discrepancy")
    names.append(_save(fig, out / "discrepancy.png"))
    return names


def plot_empirical(out: Path, rows) -> list:
    N, frac, delta = _columns(rows, 0, 1, 2)
    fig, ax = _figure()
    ax.semilogx(N, frac, "o-", color="k", label="empirical share")
    ax.axhline(delta[0], color="tab:red", lw=0.8, label="density")
    ax.set_xlabel("N")
    ax.set_ylabel("share of bad n")
    ax.legend(frameon=False, fontsize=7)
    return [_save(fig, out / "empirical.png")]


def plot_census(out: Path, rows) -> list:
    n, c = _columns(rows, 0, 1)
    fig, ax = _figure()
    ax.step(n, np.cumsum(c > 0), where="post", color="k")
    ax.set_xscale("log")
    ax.set_xlabel("N")
    ax.set_ylabel("bad n up to N")
    return [_save(fig, out / "census.png")]


def render(kind: str, out: Path, files: dict, body: dict) -> list:
    """Render the figures for one run; returns the file names written."""
    out = Path(out)
    if kind == "intersect-scan":
        return plot_scan(out, files["summary.csv"][1])
    if kind == "density":
        return plot_coverage(out, files["coverage.csv"][1])
    if kind == "segments":
        return plot_segments(out, files["segment_counts.csv"][1])
    if kind == "equidist":
        return plot_equidist(out, files["weyl.csv"][1], files["discrepancy.csv"][1])
    if kind == "torsion-delta":
        return plot_empirical(out, files["empirical.csv"][1]) if "empirical.csv" in files else []
    if kind == "census":
        return plot_census(out, files["census.csv"][1])
    return []
