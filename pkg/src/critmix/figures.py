"""Figure rendering for the report path of the CLI.

Each function draws one figure to a file next to the delimited output.
Rendering is headless (Agg) and intentionally plain: labeled axes with
units, default colors, no styling beyond what makes the plots readable.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

DPI = 150


def _domain_axes(ax):
    ax.set_xlabel("V (m3/mol)")
    ax.set_ylabel("T (K)")


def _image_axes(ax):
    ax.set_xlabel("F1 (scaled det Q)")
    ax.set_ylabel("F2 (scaled cubic form)")


def save_sign_grid(sg, path, curves=None):
    fig, ax = plt.subplots(figsize=(6, 4.5))
    v = sg.grid.v_nodes()
    t = sg.grid.t_nodes()
    ax.pcolormesh(v, t, sg.signs.T, cmap="gray", shading="auto", vmin=-1.5, vmax=1.5)
    if curves:
        for c in curves:
            ax.plot([p.V for p in c.points], [p.T for p in c.points], "r-", lw=1)
    if sg.grid.log_V:
        ax.set_xscale("log")
    _domain_axes(ax)
    ax.set_title("sign of det J")
    fig.savefig(path, dpi=DPI, bbox_inches="tight")
    plt.close(fig)


def save_curves(curves, box, path, extra_points=None, extra_label=None):
    fig, ax = plt.subplots(figsize=(6, 4.5))
    for i, c in enumerate(curves):
        ax.plot([p.V for p in c.points], [p.T for p in c.points], "-", lw=1.2,
                label=f"curve {i}" if len(curves) > 1 else "critical curve")
    if extra_points:
        ax.plot([p.V for p in extra_points], [p.T for p in extra_points], "k*",
                ms=10, label=extra_label or "points")
    ax.set_xlim(box.V_min, box.V_max)
    ax.set_ylim(box.T_min, box.T_max)
    ax.set_xscale("log")
    _domain_axes(ax)
    ax.legend(fontsize=8)
    fig.savefig(path, dpi=DPI, bbox_inches="tight")
    plt.close(fig)


def save_image_curves(image_lists, path, bank=None):
    fig, ax = plt.subplots(figsize=(6, 4.5))
    for i, pts in enumerate(image_lists):
        ax.plot([p.F1 for p in pts], [p.F2 for p in pts], ".", ms=2,
                label=f"critical image {i}")
    if bank is not None:
        ax.plot([e.F1 for e in bank.entries], [e.F2 for e in bank.entries], "s",
                ms=4, mfc="0.6", mec="k", label="bank")
    ax.plot([0], [0], "k+", ms=12, mew=2, label="origin")
    _image_axes(ax)
    ax.legend(fontsize=8)
    fig.savefig(path, dpi=DPI, bbox_inches="tight")
    plt.close(fig)


def save_bank_domain(bank, curves, box, path):
    fig, ax = plt.subplots(figsize=(6, 4.5))
    for c in curves or []:
        ax.plot([p.V for p in c.points], [p.T for p in c.points], "-", lw=1, color="0.4")
    ax.plot([e.V for e in bank.entries], [e.T for e in bank.entries], "s",
            ms=4, mfc="0.6", mec="k", label="bank entries")
    ax.set_xlim(box.V_min, box.V_max)
    ax.set_ylim(box.T_min, box.T_max)
    ax.set_xscale("log")
    _domain_axes(ax)
    ax.legend(fontsize=8)
    fig.savefig(path, dpi=DPI, bbox_inches="tight")
    plt.close(fig)


def save_paths(traces, results, curves, box, path):
    fig, ax = plt.subplots(figsize=(6, 4.5))
    for c in curves or []:
        ax.plot([p.V for p in c.points], [p.T for p in c.points], "-", lw=1, color="0.4")
    for tr in traces:
        pts = tr.domain_points
        ax.plot([p.V for p in pts], [p.T for p in pts], ".-", ms=2, lw=0.8,
                label=f"path from {tr.start_label} ({tr.outcome.value})")
    for r in results:
        ax.plot([r.V], [r.T], "k*", ms=12)
    ax.set_xlim(box.V_min, box.V_max)
    ax.set_ylim(box.T_min, box.T_max)
    ax.set_xscale("log")
    _domain_axes(ax)
    ax.legend(fontsize=7)
    ax.set_title("inversion paths in the domain")
    fig.savefig(path, dpi=DPI, bbox_inches="tight")
    plt.close(fig)


def save_locus(rows, per_comp_curves, path):
    """Composition sweep: thick critical locus over per-composition curves."""
    fig, ax = plt.subplots(figsize=(6, 4.5))
    cmap = plt.get_cmap("viridis")
    n = max(len(per_comp_curves), 1)
    for i, (z1, curves) in enumerate(per_comp_curves.items()):
        for c in curves:
            ax.plot([p.V for p in c.points], [p.T for p in c.points], "-", lw=0.8,
                    color=cmap(i / n), alpha=0.8)
    ok = [r for r in rows if r.get("Tc_K") is not None]
    ax.plot([r["Vc_m3_per_mol"] for r in ok], [r["Tc_K"] for r in ok], "k-",
            lw=2.5, marker="o", ms=5, label="critical locus")
    for r in ok:
        ax.annotate(f"{r['z1']:.2f}", (r["Vc_m3_per_mol"], r["Tc_K"]),
                    textcoords="offset points", xytext=(4, 4), fontsize=7)
    ax.set_xscale("log")
    _domain_axes(ax)
    ax.legend(fontsize=8)
    fig.savefig(path, dpi=DPI, bbox_inches="tight")
    plt.close(fig)


def save_demo1d(qs, path, bracket=(-4.0, 4.0)):
    from .demo1d import CRITICAL_IMAGES, CRITICAL_POINTS, cubic_map, invert_cubic_map

    fig, ax = plt.subplots(figsize=(6, 4.5))
    p = np.linspace(bracket[0], bracket[1], 600)
    ax.plot(p, cubic_map(p), "-", lw=1.5, label="p^3 - 3p")
    ax.plot(CRITICAL_POINTS, CRITICAL_IMAGES, "rd", ms=8, label="critical points")
    for q in qs:
        roots = invert_cubic_map(q, bracket)
        ax.axhline(q, color="0.6", lw=0.7)
        ax.plot(roots, [q] * len(roots), "k*", ms=9)
    ax.set_xlabel("p")
    ax.set_ylabel("q")
    ax.set_ylim(-8, 8)
    ax.legend(fontsize=8)
    fig.savefig(path, dpi=DPI, bbox_inches="tight")
    plt.close(fig)
