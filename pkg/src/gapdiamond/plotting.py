"""Matplotlib rendering of toolkit results to figure files.

Figures are intentionally minimal (axes, lines, legend) and written
straight to disk via the object-oriented interface, so no interactive
backend is touched.  CSV remains the canonical output; these renderings
sit alongside it.  SVG metadata dates are suppressed to keep reruns
comparable.
"""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np
from matplotlib.figure import Figure

from .fitting import DecayTrace, FitResult, alpha_db_per_cm
from .modes2d import ModeSolution2D
from .slab import RatioCurve

__all__ = [
    "save_ratio_curves",
    "save_field_map",
    "save_design_table",
    "save_decay_fit",
    "save_gap_fit",
]

_SAVE_KWARGS = {"metadata": {"Date": None}}


def _finish(fig: Figure, path) -> None:
    fig.tight_layout()
    kwargs = _SAVE_KWARGS if str(path).endswith(".svg") else {}
    fig.savefig(path, **kwargs)


def save_ratio_curves(curves: Sequence[RatioCurve], path) -> None:
    """Penetration ratio versus membrane thickness, one line per curve."""
    fig = Figure(figsize=(5.5, 4.0))
    ax = fig.add_subplot(111)
    for curve in curves:
        label = f"{curve.polarization.value}, gap {curve.gap_nm:g} nm"
        style = "-" if curve.gap_nm else "--"
        ax.plot(curve.thicknesses_nm, curve.ratios, style, label=label)
    ax.set_xlabel("membrane thickness (nm)")
    ax.set_ylabel("field-strength ratio R")
    ax.legend()
    _finish(fig, path)


def save_field_map(mode: ModeSolution2D, path) -> None:
    """Normalized |E|^2 of a 2-D mode over the cross-section."""
    fig = Figure(figsize=(5.5, 4.4))
    ax = fig.add_subplot(111)
    mesh = ax.pcolormesh(mode.x_nm, mode.y_nm, mode.intensity, shading="nearest")
    fig.colorbar(mesh, ax=ax, label="|E|^2 (1/nm^2)")
    ax.set_xlabel("x (nm)")
    ax.set_ylabel("y (nm)")
    ax.set_title(f"{mode.polarization.value}  n_eff = {mode.n_eff:.4f}")
    _finish(fig, path)


def save_design_table(table, path) -> None:
    """Total enhancement versus ring diameter, one line per geometry family."""
    fig = Figure(figsize=(5.5, 4.0))
    ax = fig.add_subplot(111)
    families: dict[tuple[float, float, float], list] = {}
    for row in table.rows:
        families.setdefault((row.nv_depth_nm, row.membrane_thickness_nm, row.gap_nm), []).append(row)
    for (depth, thickness, gap), rows in sorted(families.items()):
        rows = sorted(rows, key=lambda r: r.diameter_um)
        label = f"depth {depth:g} nm, t {thickness:g} nm, gap {gap:g} nm"
        ax.plot([r.diameter_um for r in rows], [r.f_se for r in rows], "o-", label=label)
    ax.axhline(1.0, color="gray", lw=0.8)
    ax.set_xlabel("ring diameter (um)")
    ax.set_ylabel("F_SE")
    ax.legend(fontsize=8)
    _finish(fig, path)


def save_decay_fit(trace: DecayTrace, fit: FitResult, path) -> None:
    """PL decay data with the fitted exponential, on a log intensity axis."""
    fig = Figure(figsize=(5.5, 4.0))
    ax = fig.add_subplot(111)
    ax.semilogy(trace.positions_nm * 1e-3, trace.intensities, "o", label="data")
    x = np.linspace(trace.positions_nm[0], trace.positions_nm[-1], 200)
    model = np.exp(fit.value("ln_i0") - fit.value("alpha_per_m") * x * 1e-9)
    db, db_err = alpha_db_per_cm(fit)
    ax.semilogy(x * 1e-3, model, "-", label=f"fit: {db:.2f} ± {db_err:.2f} dB/cm")
    ax.set_xlabel("position (um)")
    ax.set_ylabel("intensity")
    ax.legend()
    _finish(fig, path)


def save_gap_fit(thicknesses_nm, ratios, polarizations, fit: FitResult, model_fn, path) -> None:
    """Ratio data against the slab model at the fitted gap."""
    fig = Figure(figsize=(5.5, 4.0))
    ax = fig.add_subplot(111)
    gap = fit.value("gap_nm")
    by_pol: dict[str, list[tuple[float, float]]] = {}
    for t, r, pol in zip(thicknesses_nm, ratios, polarizations):
        by_pol.setdefault(pol.value, []).append((t, r))
    for pol_name, points in sorted(by_pol.items()):
        points.sort()
        ax.plot([p[0] for p in points], [p[1] for p in points], "o", label=f"{pol_name} data")
        grid = np.linspace(min(p[0] for p in points), max(p[0] for p in points), 60)
        ax.plot(grid, [model_fn(t, gap, pol_name) for t in grid], "-", label=f"{pol_name} model")
    ax.set_xlabel("membrane thickness (nm)")
    ax.set_ylabel("field-strength ratio R")
    ax.set_title(f"fitted gap = {gap:.2f} ± {fit.stderr('gap_nm'):.2f} nm")
    ax.legend(fontsize=8)
    _finish(fig, path)
