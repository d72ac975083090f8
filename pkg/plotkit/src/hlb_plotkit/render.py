"""Rendering of phase portraits and scaling plots.

Style conventions: switching manifolds are green lines; stable objects
(equilibria, limit cycles, attracting sliding regions) are blue; unstable
ones red; folds are drawn as triangles and equilibria as circles.  Each
layer present in the document appears in the legend exactly once.
"""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .doc import PortraitDoc, SchemaError, load_fit_json, load_sweep_csv

STYLE_VERSION = 1

GREEN = "#2ca02c"
BLUE = "#1f77b4"
RED = "#d62728"
GREY = "#666666"


def _is_stable(kind: str) -> bool:
    return kind.startswith("stable") or kind == "center"


def _axis_limits(rec) -> tuple:
    xs, ys = [], []
    for traj in rec["trajectories"]:
        for _, x, y in traj["samples"]:
            xs.append(x)
            ys.append(y)
    cyc = rec["cycle"]
    if cyc is not None:
        for _, x, y in cyc["samples"]:
            xs.append(x)
            ys.append(y)
    for eq in rec["equilibria"]:
        xs.append(eq["x"])
        ys.append(eq["y"])
    if not xs:
        xs, ys = [-1.0, 1.0], [-1.0, 1.0]
    span = max(max(map(abs, xs)), max(map(abs, ys)), 1e-12)
    pad = 1.15 * span
    return (-pad, pad), (-pad, pad)


def _draw_record(ax, rec):
    """One panel; returns {label: handle} for the layers drawn."""
    handles = {}
    (x_lo, x_hi), (y_lo, y_hi) = _axis_limits(rec)

    for man in rec["manifolds"]:
        if man["axis"] == "x":
            (h,) = ax.plot([man["value"], man["value"]], [y_lo, y_hi],
                           color=GREEN, lw=1.6, zorder=1)
        else:
            (h,) = ax.plot([x_lo, x_hi], [man["value"], man["value"]],
                           color=GREEN, lw=1.6, zorder=1)
        handles.setdefault("switching manifold", h)

    for seg in rec["sliding_regions"]:
        color = BLUE if seg["kind"] == "attracting_sliding" else RED
        label = ("attracting sliding" if seg["kind"] == "attracting_sliding"
                 else "repelling sliding")
        (h,) = ax.plot([0.0, 0.0], [seg["y_min"], seg["y_max"]], color=color,
                       lw=4.5, solid_capstyle="butt", zorder=2, alpha=0.9)
        handles.setdefault(label, h)

    for traj in rec["trajectories"]:
        pts = np.asarray(traj["samples"], dtype=float)
        if len(pts):
            (h,) = ax.plot(pts[:, 1], pts[:, 2], color=GREY, lw=0.7, zorder=3)
            handles.setdefault("trajectory", h)
            _arrowheads(ax, pts[:, 1], pts[:, 2])

    cyc = rec["cycle"]
    if cyc is not None:
        pts = np.asarray(cyc["samples"], dtype=float)
        stable = abs(cyc.get("multiplier", 0.0)) < 1.0
        color = BLUE if stable else RED
        label = "stable limit cycle" if stable else "unstable limit cycle"
        (h,) = ax.plot(pts[:, 1], pts[:, 2], color=color, lw=1.8, zorder=4)
        handles.setdefault(label, h)

    for fold in rec["folds"]:
        filled = fold["visibility"] == "visible"
        (h,) = ax.plot([fold["x"]], [fold["y"]], marker="^", ms=7,
                       mfc=GREEN if filled else "white", mec=GREEN,
                       ls="none", zorder=5)
        handles.setdefault("fold", h)

    for eq in rec["equilibria"]:
        if eq["admissibility"] == "virtual":
            continue
        stable = _is_stable(eq["kind"])
        color = BLUE if stable else RED
        label = "stable equilibrium" if stable else "unstable equilibrium"
        (h,) = ax.plot([eq["x"]], [eq["y"]], marker="o", ms=6, mfc=color,
                       mec=color, ls="none", zorder=6)
        handles.setdefault(label, h)

    ax.set_xlim(x_lo, x_hi)
    ax.set_ylim(y_lo, y_hi)
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_title(f"mu = {rec['mu']:g}")
    return handles


def _arrowheads(ax, xs, ys, n=3):
    """A few direction markers at fixed arc-length fractions."""
    if len(xs) < 8:
        return
    arc = np.concatenate([[0.0], np.cumsum(np.hypot(np.diff(xs), np.diff(ys)))])
    total = arc[-1]
    if total <= 0:
        return
    for frac in np.linspace(0.25, 0.85, n):
        i = int(np.searchsorted(arc, frac * total))
        i = min(max(i, 1), len(xs) - 1)
        dx, dy = xs[i] - xs[i - 1], ys[i] - ys[i - 1]
        norm = math.hypot(dx, dy)
        if norm == 0:
            continue
        ax.annotate("", xy=(xs[i], ys[i]),
                    xytext=(xs[i] - dx / norm * 1e-9, ys[i] - dy / norm * 1e-9),
                    arrowprops=dict(arrowstyle="->", color=GREY, lw=0.7))


def build_portrait_figure(doc: PortraitDoc):
    """Two-panel figure (mu < 0 on the left, mu > 0 on the right)."""
    fig, axes = plt.subplots(1, len(doc.records), figsize=(5 * len(doc.records), 4.4))
    if len(doc.records) == 1:
        axes = [axes]
    all_handles = {}
    for ax, rec in zip(axes, doc.records):
        for label, h in _draw_record(ax, rec).items():
            all_handles.setdefault(label, h)
    fig.suptitle(f"entry {doc.entry}: {doc.name}")
    fig.legend(all_handles.values(), all_handles.keys(), loc="lower center",
               ncol=min(4, len(all_handles)), fontsize=8, frameon=False)
    fig.tight_layout(rect=(0, 0.08, 1, 1))
    return fig


def render_portrait(doc: PortraitDoc, out_path: str) -> str:
    """Render a validated portrait document to an image file."""
    fig = build_portrait_figure(doc)
    fig.savefig(out_path, dpi=110)
    plt.close(fig)
    return out_path


def build_scaling_figure(rows: list, fit: dict):
    good = [r for r in rows if r["converged"]]
    if len(good) < 2:
        raise SchemaError("sweep field rows: fewer than 2 converged rows")
    mus = np.array([r["mu"] for r in good])
    amps = np.array([r["amplitude"] for r in good])
    pers = np.array([r["period"] for r in good])

    fig, (ax_a, ax_p) = plt.subplots(1, 2, figsize=(9, 4))
    ax_a.loglog(mus, amps, "o", color=BLUE, label="amplitude")
    ax_a.loglog(mus, fit["k1"] * mus ** fit["a_hat"], "-", color=BLUE,
                lw=1.0, label="fit")
    ax_a.set_xlabel("mu")
    ax_a.set_ylabel("amplitude")
    ax_a.set_title(f"a_hat = {fit['a_hat']:.3f}")
    ax_a.legend(fontsize=8)

    ax_p.loglog(mus, pers, "s", color=RED, label="period")
    ax_p.loglog(mus, fit["k2"] * mus ** fit["b_hat"], "-", color=RED,
                lw=1.0, label="fit")
    ax_p.set_xlabel("mu")
    ax_p.set_ylabel("period")
    ax_p.set_title(f"b_hat = {fit['b_hat']:.3f}")
    ax_p.legend(fontsize=8)

    entry = fit.get("entry")
    if entry:
        fig.suptitle(f"entry {entry}")
    fig.tight_layout()
    return fig


def render_scaling(sweep_csv: str, fit_json: str, out_path: str) -> str:
    """Render a sweep CSV plus its fit JSON to a log-log figure."""
    rows = load_sweep_csv(sweep_csv)
    fit = load_fit_json(fit_json)
    fig = build_scaling_figure(rows, fit)
    fig.savefig(out_path, dpi=110)
    plt.close(fig)
    return out_path
