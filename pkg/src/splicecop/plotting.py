"""Figures for the report command: surface plots and contour maps."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .checks import GridSurface  # noqa: E402

# drop the version stamp so PNG bytes do not depend on the matplotlib build
_PNG_META = {"Software": None}


def _curve(ax, phi, z=None):
    ts = np.linspace(0.0, 1.0, 200)
    ys = phi(ts)
    if z is None:
        ax.plot(ts, ys, color="k", lw=1.0, ls="--")
    else:
        ax.plot(ts, ys, z(ts, ys), color="k", lw=1.2)


def surfaces_figure(grids: list[GridSurface], path, phi=None, title: str | None = None):
    """Side-by-side 3-d plots of the given grids."""
    fig = plt.figure(figsize=(4.2 * len(grids), 4.0))
    for k, g in enumerate(grids, start=1):
        ax = fig.add_subplot(1, len(grids), k, projection="3d")
        X, Y = g.mesh()
        ax.plot_surface(X, Y, g.values, cmap="viridis", linewidth=0, antialiased=False,
                        rstride=1, cstride=1)
        if phi is not None:
            gamma_vals = _on_curve(g, phi)
            if gamma_vals is not None:
                ts, ys, zs = gamma_vals
                ax.plot(ts, ys, zs, color="r", lw=1.2)
        ax.set_title(g.kind)
        ax.set_xlabel("x")
        ax.set_ylabel("y")
        ax.view_init(elev=25, azim=-125)
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path, dpi=100, metadata=_PNG_META)
    plt.close(fig)


def _on_curve(g: GridSurface, phi):
    """Grid values at nodes lying on the curve, for overlay."""
    idx = np.searchsorted(g.ys, phi(g.xs))
    idx = np.clip(idx, 0, len(g.ys) - 1)
    hit = np.abs(g.ys[idx] - phi(g.xs)) <= 1e-12
    if hit.sum() < 2:
        return None
    return g.xs[hit], g.ys[idx[hit]], g.values[np.nonzero(hit)[0], idx[hit]]


def contour_figure(grids: list[GridSurface], path, phi=None, levels: int = 12):
    fig, axes = plt.subplots(1, len(grids), figsize=(4.0 * len(grids), 3.8), squeeze=False)
    for ax, g in zip(axes[0], grids):
        X, Y = g.mesh()
        cs = ax.contour(X, Y, g.values, levels=levels, linewidths=0.8)
        ax.clabel(cs, fontsize=6)
        if phi is not None:
            _curve(ax, phi)
        ax.set_aspect("equal")
        ax.set_title(g.kind)
        ax.set_xlabel("x")
        ax.set_ylabel("y")
    fig.tight_layout()
    fig.savefig(path, dpi=100, metadata=_PNG_META)
    plt.close(fig)
