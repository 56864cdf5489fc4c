"""The four figure kinds rendered from solver outputs.

All functions write a static image and return the output path.  Saved
images carry no timestamps, so re-rendering the same inputs reproduces the
file byte-for-byte.
"""

from __future__ import annotations

import warnings
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .io import read_band, read_field, read_report, read_sweep

_SAVE_KW = {"dpi": 150, "metadata": {"Date": None}}


def _save(fig, out):
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    if out.suffix.lower() == ".svg":
        fig.savefig(out, metadata={"Date": None})
    else:
        fig.savefig(out, **_SAVE_KW)
    plt.close(fig)
    return str(out)


def _field_lattice(field):
    """Reshape the node table onto its rectangular lattice."""
    x1 = np.unique(field["x1"])
    x2 = np.unique(field["x2"])
    shape = (x2.size, x1.size)
    if x1.size * x2.size != field["x1"].size:
        raise ValueError("field table is not a full rectangular lattice")
    col = np.searchsorted(x1, field["x1"])
    row = np.searchsorted(x2, field["x2"])
    def grid_of(name):
        out = np.full(shape, np.nan)
        out[row, col] = field[name]
        return out
    return x1, x2, grid_of


def plot_field(field_csv, out, report_json=None):
    """Re(u) and |u| heatmaps with the interface lines when geometry is known."""
    field = read_field(field_csv)
    x1, x2, grid_of = _field_lattice(field)
    fig, axes = plt.subplots(2, 1, figsize=(9, 5), sharex=True, sharey=True)
    for ax, name, label, cmap in (
        (axes[0], "re_u", "Re u", "RdBu_r"),
        (axes[1], "abs_u", "|u|", "viridis"),
    ):
        z = grid_of(name)
        lim = np.nanmax(np.abs(z)) or 1.0
        kw = {"vmin": -lim, "vmax": lim} if name == "re_u" else {"vmin": 0.0, "vmax": lim}
        im = ax.pcolormesh(x1, x2, z, cmap=cmap, shading="nearest", **kw)
        fig.colorbar(im, ax=ax, label=label)
        ax.set_ylabel("x2")
    axes[1].set_xlabel("x1")
    if report_json is not None:
        geo = read_report(report_json).get("geometry", {})
        if {"eps", "R"} <= geo.keys():
            er = geo["eps"] * geo["R"]
            for ax in axes:
                for xline in (-er, 0.0, er):
                    ax.axvline(xline, color="k", lw=0.6, ls="--", alpha=0.6)
    return _save(fig, out)


def plot_brillouin(selected_csv, report_json, out, band_csv=None):
    """Zone picture: level set, admissible rows, group-velocity arrows.

    Dot sizes follow the moduli of the run's expansion coefficients; the
    incoming wave (when present) is drawn as the red arrow from the origin.
    """
    side_sel, sel = read_band(selected_csv)
    report = read_report(report_json)
    omega = float(report["omega"])
    geo = report.get("geometry", {})
    k_rows = int(geo.get("K", 0))

    coef = {}
    for m in report.get("modes", []):
        coef[(m["side"], round(m["j1"], 9), round(m["j2"], 9), m["m"])] = m["coef_mod"]

    fig, axes = plt.subplots(1, 2, figsize=(10, 5))
    for ax, side, title in ((axes[0], "-", "left medium"), (axes[1], "+", "right medium")):
        ax.set_title(title)
        ax.set_xlim(-0.55, 0.55)
        ax.set_ylim(-0.55, 0.55)
        ax.set_aspect("equal")
        ax.axhline(0, color="0.8", lw=0.5)
        ax.axvline(0, color="0.8", lw=0.5)
        if k_rows:
            for q in range(-(k_rows // 2) + (0 if k_rows % 2 else 1), k_rows // 2 + 1):
                ax.axhline(q / k_rows, color="0.85", lw=0.5)
        if band_csv is not None:
            bside, band = read_band(band_csv)
            mask = bside == side
            if np.any(mask):
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore")
                    for m in np.unique(band[mask, 2].astype(int)):
                        bm = band[mask & (band[:, 2].astype(int) == m)]
                        try:
                            ax.tricontour(
                                bm[:, 0], bm[:, 1], bm[:, 3],
                                levels=[omega**2], colors="red", linewidths=1.0,
                            )
                        except (ValueError, RuntimeError):
                            continue
        mask = side_sel == side
        if not np.any(mask):
            warnings.warn(f"no selected modes on side {side}")
        for j1, j2, m, mu, p, vg1, vg2 in sel[mask]:
            size = coef.get((side, round(j1, 9), round(j2, 9), int(m)))
            ax.plot(j1, j2, "o", color="C0",
                    markersize=4 + 16 * (size or 0.0))
            scale = 0.08 / max(np.hypot(vg1, vg2), 1e-12)
            ax.arrow(j1, j2, vg1 * scale, vg2 * scale, head_width=0.012, color="C0")
        src = report.get("incoming")
        if src:
            eps = float(geo.get("eps", 1.0))
            jin = np.array(src) * eps / (2 * np.pi)
            ax.arrow(0, 0, jin[0] * 0.45 / max(np.abs(jin)), jin[1] * 0.45 / max(np.abs(jin)),
                     head_width=0.015, color="red")
        ax.set_xlabel("j1")
        ax.set_ylabel("j2")
    return _save(fig, out)


def plot_sweep(sweep_csv, out):
    """Error-vs-damping curves on log-log axes."""
    rows = read_sweep(sweep_csv)
    fig, ax = plt.subplots(figsize=(6, 4.5))
    ax.loglog(rows[:, 0], rows[:, 1], "o-", label="|R - |alpha_refl||")
    ax.loglog(rows[:, 0], rows[:, 2], "s-", label="|T - |alpha_out||")
    ax.invert_xaxis()
    ax.set_xlabel("delta")
    ax.set_ylabel("error")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    return _save(fig, out)


def plot_band(band_csv, out, report_json=None):
    """Dispersion sheets sqrt(mu_m) over the sampled zone, one panel per side."""
    side, band = read_band(band_csv)
    sides = [s for s in ("-", "+") if np.any(side == s)]
    if not sides:
        raise ValueError("band table has no rows")
    fig = plt.figure(figsize=(6 * len(sides), 5))
    omega = None
    if report_json is not None:
        omega = float(read_report(report_json).get("omega", 0.0)) or None
    for i, s in enumerate(sides):
        ax = fig.add_subplot(1, len(sides), i + 1, projection="3d")
        rows = band[side == s]
        for m in np.unique(rows[:, 2].astype(int)):
            rm = rows[rows[:, 2].astype(int) == m]
            root = np.sqrt(np.maximum(rm[:, 3], 0.0))
            try:
                ax.plot_trisurf(rm[:, 0], rm[:, 1], root, alpha=0.7, linewidth=0.1)
            except (ValueError, RuntimeError):
                ax.scatter(rm[:, 0], rm[:, 1], root, s=2)
        if omega:
            j = np.linspace(-0.5, 0.5, 2)
            jj1, jj2 = np.meshgrid(j, j)
            ax.plot_surface(jj1, jj2, np.full_like(jj1, omega), alpha=0.2, color="red")
        ax.set_xlabel("j1")
        ax.set_ylabel("j2")
        ax.set_zlabel("sqrt(mu)")
        ax.set_title(f"side {s}")
    return _save(fig, out)
