"""Report figures written next to the CSV/JSON outputs.

Uses the Agg canvas directly so nothing touches pyplot's global state.
"""
from __future__ import annotations

import matplotlib as mpl
import numpy as np
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

from .errors import IOFailure
from .verify import MARGIN_KEYS, PathCertificate, SweepReport

STYLE = {
    "font.size": 9,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
}


def _save(fig: Figure, path) -> None:
    FigureCanvasAgg(fig)
    try:
        # no timestamp metadata, so reruns give identical files
        fig.savefig(path, dpi=120, metadata={"Software": None})
    except OSError as exc:
        raise IOFailure(f"cannot write {path}: {exc.strerror}") from exc


def sweep_figure(report: SweepReport, path) -> None:
    """Gate margins (log scale) and CPA cluster degree against n."""
    with mpl.rc_context(STYLE):
        _sweep_figure(report, path)


def certificate_figure(cert: PathCertificate, path) -> None:
    """Distance to the target endpoint along the path, against the ball radius."""
    with mpl.rc_context(STYLE):
        _certificate_figure(cert, path)


def _sweep_figure(report: SweepReport, path) -> None:
    fig = Figure(figsize=(7.2, 3.0), layout="constrained")
    ax_m, ax_d = fig.subplots(1, 2)
    ns = np.array([r.n for r in report.rows])
    for key in MARGIN_KEYS:
        vals = np.array([r.margins.get(key, np.nan) for r in report.rows], dtype=float)
        ok = vals > 0
        ax_m.semilogy(ns[ok], vals[ok], marker="o", ms=3, label=key)
        bad = ~ok & np.isfinite(vals)
        if bad.any():
            # crossed gates sit on the bottom axis
            ax_m.scatter(ns[bad], np.full(bad.sum(), ax_m.get_ylim()[0]), marker="x", color="k")
    ax_m.set_xscale("log", base=2)
    ax_m.set_xlabel("n")
    ax_m.set_ylabel("gate margin")
    ax_m.legend(frameon=False)
    ax_m.set_title(f"eps = {report.epsilon:g}, seed = {report.seed}", fontsize=9)

    deg = [r.cpa_max_degree for r in report.rows]
    ax_d.step(ns, deg, where="mid", marker="o", ms=3)
    ax_d.set_xscale("log", base=2)
    ax_d.set_ylim(0, max(deg + [1]) + 1)
    ax_d.set_xlabel("n")
    ax_d.set_ylabel("max minimal-polynomial degree")
    _save(fig, path)


def _certificate_figure(cert: PathCertificate, path) -> None:
    fig = Figure(figsize=(3.6, 3.0), layout="constrained")
    ax = fig.subplots()
    t = np.asarray(cert.trace["t"])
    d = np.asarray(cert.trace["distance"])
    ax.plot(t, d, lw=1.2, label="distance to Y")
    ax.axhline(cert.epsilon, color="k", ls="--", lw=0.8, label="epsilon")
    ax.set_xlim(0, 1)
    ax.set_ylim(0, max(cert.epsilon, d.max()) * 1.1)
    ax.set_xlabel("t")
    ax.set_ylabel("metric distance")
    ax.set_title(f"verdict: {cert.verdict}", fontsize=9)
    ax.legend(frameon=False)
    _save(fig, path)
