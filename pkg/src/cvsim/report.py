"""Render figures from sweep CSV artifacts.

The core subcommands only emit delimited data; this module turns those files
into quick-look matplotlib figures saved next to them (or into a chosen
directory).  Nothing here feeds back into the simulation.
"""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

CLUSTER_HEADER = ("param1", "param2", "class", "margin_cut1", "margin_cut2", "margin_cut3")
SMOLIN_HEADER = ("r", "var_p", "logneg_unlocked", "logneg_epr", "ratio", "admissible")

_CLASS_COLORS = {
    0: "#bbbbbb",  # undecided
    1: "#7b1fa2",
    2: "#3949ab",
    3: "#0288d1",
    4: "#f9a825",
    5: "#e8e8e8",
}


def _read_csv(path: Path) -> tuple[list[str], np.ndarray]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[float(v) for v in row] for row in reader if row]
    return header, np.asarray(rows)


def detect_kind(header: list[str]) -> str:
    if tuple(header) == CLUSTER_HEADER:
        return "cluster"
    if tuple(header) == SMOLIN_HEADER:
        return "smolin"
    raise ValueError(f"unrecognized sweep header: {header}")


def _grid_axes(values: np.ndarray) -> np.ndarray:
    return np.unique(values)


def render_cluster(path, out_dir=None) -> Path:
    """Class map over (kappa, T), one colored cell per grid point."""
    path = Path(path)
    header, rows = _read_csv(path)
    if tuple(header) != CLUSTER_HEADER:
        raise ValueError(f"not a cluster sweep: {header}")
    kappas = _grid_axes(rows[:, 0])
    temps = _grid_axes(rows[:, 1])
    grid = np.full((len(temps), len(kappas)), np.nan)
    ki = {v: i for i, v in enumerate(kappas)}
    ti = {v: i for i, v in enumerate(temps)}
    for row in rows:
        grid[ti[row[1]], ki[row[0]]] = row[2]

    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    if len(kappas) == 1:
        # single-coupling slice: plot class and margins against temperature
        order = np.argsort(rows[:, 1])
        ax.step(rows[order, 1], rows[order, 2], where="mid", color="k", label="class")
        ax2 = ax.twinx()
        for j, label in ((3, "cut 1|23"), (4, "cut 2|13"), (5, "cut 3|12")):
            ax2.plot(rows[order, 1], rows[order, j], alpha=0.7, label=label)
        ax2.axhline(0.0, color="gray", lw=0.8, ls=":")
        ax2.set_ylabel("PPT margin")
        ax2.legend(loc="lower right", fontsize=8)
        ax.set_xlabel("temperature")
        ax.set_ylabel("class")
        ax.set_title(f"separability classes at kappa = {kappas[0]:g}")
    else:
        from matplotlib.colors import BoundaryNorm, ListedColormap

        levels = sorted(_CLASS_COLORS)
        cmap = ListedColormap([_CLASS_COLORS[c] for c in levels])
        norm = BoundaryNorm([c - 0.5 for c in levels] + [levels[-1] + 0.5], cmap.N)
        mesh = ax.pcolormesh(kappas, temps, grid, cmap=cmap, norm=norm, shading="nearest")
        cbar = fig.colorbar(mesh, ax=ax, ticks=levels)
        cbar.set_label("class (0 = undecided)")
        ax.set_xlabel("kappa")
        ax.set_ylabel("temperature")
        ax.set_title("separability classes")
    out = Path(out_dir) if out_dir else path.parent
    out.mkdir(parents=True, exist_ok=True)
    target = out / (path.stem + ".png")
    fig.tight_layout()
    fig.savefig(target, dpi=150)
    plt.close(fig)
    return target


def render_smolin(path, out_dir=None) -> Path:
    """Unlocked-pair log-negativity surface over (r, var_p)."""
    path = Path(path)
    header, rows = _read_csv(path)
    if tuple(header) != SMOLIN_HEADER:
        raise ValueError(f"not a negativity sweep: {header}")
    rs = _grid_axes(rows[:, 0])
    vps = _grid_axes(rows[:, 1])
    surface = np.full((len(vps), len(rs)), np.nan)
    ratio = np.full_like(surface, np.nan)
    ri = {v: i for i, v in enumerate(rs)}
    vi = {v: i for i, v in enumerate(vps)}
    for row in rows:
        surface[vi[row[1]], ri[row[0]]] = row[2]
        ratio[vi[row[1]], ri[row[0]]] = row[4]

    fig, axes = plt.subplots(1, 2, figsize=(9.0, 3.8))
    for ax, data, title in (
        (axes[0], surface, "log-negativity of the unlocked pair"),
        (axes[1], ratio, "ratio to the initial pair value"),
    ):
        if len(rs) == 1 or len(vps) == 1:
            x = vps if len(rs) == 1 else rs
            ax.plot(x, data.ravel(), "o-")
            ax.set_xlabel("var_p" if len(rs) == 1 else "r")
        else:
            mesh = ax.pcolormesh(rs, vps, data, shading="nearest")
            fig.colorbar(mesh, ax=ax)
            ax.set_xlabel("r")
            ax.set_ylabel("var_p")
        ax.set_title(title, fontsize=10)
    out = Path(out_dir) if out_dir else path.parent
    out.mkdir(parents=True, exist_ok=True)
    target = out / (path.stem + ".png")
    fig.tight_layout()
    fig.savefig(target, dpi=150)
    plt.close(fig)
    return target


def render_csv(path, out_dir=None, kind: str = "auto") -> list[Path]:
    """Render the figure(s) for a sweep CSV; returns the written paths."""
    path = Path(path)
    if kind == "auto":
        header, _ = _read_csv(path)
        kind = detect_kind(header)
    if kind == "cluster":
        return [render_cluster(path, out_dir)]
    if kind == "smolin":
        return [render_smolin(path, out_dir)]
    raise ValueError(f"unknown report kind {kind!r}")
