"""Figures rendered next to the CSV output (``digirabi ... --plot``)."""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

GOLDEN = (np.sqrt(5) - 1.0) / 2.0

RC = {
    "font.size": 9,
    "axes.labelsize": 10,
    "legend.fontsize": 8,
    "xtick.labelsize": 9,
    "ytick.labelsize": 9,
    "lines.linewidth": 1.2,
    "figure.dpi": 150,
    "savefig.bbox": "tight",
}


def _column(result, name):
    i = result.columns.index(name)
    return np.array([np.nan if r[i] == "" else float(r[i]) for r in result.rows])


def plot_populations(result, path: Path, width: float = 6.0) -> Path:
    """Spin and photon populations plus fidelity versus simulated time."""
    t = _column(result, "time_ns")
    with plt.rc_context(RC):
        fig, (ax1, ax2) = plt.subplots(2, 1, sharex=True, figsize=(width, 1.6 * width * GOLDEN))
        ax1.plot(t, _column(result, "n_phot"), label=r"$\langle a^\dagger a\rangle$")
        if "n_phot_exact" in result.columns:
            ax1.plot(t, _column(result, "n_phot_exact"), "k--", lw=0.8, label="exact")
        ax1.plot(t, _column(result, "sz"), label=r"$\langle\sigma_z\rangle$")
        if "sz_exact" in result.columns:
            ax1.plot(t, _column(result, "sz_exact"), "k:", lw=0.8)
        if "x_exact" in result.columns:
            ax1.plot(t, _column(result, "x"), label=r"$\langle x\rangle$")
            ax1.plot(t, _column(result, "x_exact"), "k--", lw=0.8, label="exact")
        ax1.legend(frameon=False, ncol=2)
        ax2.plot(t, _column(result, "fidelity"), color="C3")
        ax2.set_ylabel("fidelity")
        ax2.set_ylim(-0.02, 1.02)
        ax2.set_xlabel("simulated time (ns)")
        fig.savefig(path)
        plt.close(fig)
    return path


def plot_sweep(result, path: Path, width: float = 6.0) -> Path:
    """Fidelity versus time, one curve per sweep cell."""
    cells = _column(result, "cell")
    axis_keys = result.columns[1:result.columns.index("time_ns")] if "time_ns" in result.columns else []
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=(width, width * GOLDEN))
        t = _column(result, "time_ns")
        f = _column(result, "fidelity")
        for c in np.unique(cells):
            mask = cells == c
            row = result.rows[int(np.argmax(mask))]
            label = ", ".join(f"{k}={row[1 + i]}" for i, k in enumerate(axis_keys))
            ax.plot(t[mask], f[mask], label=label or f"cell {int(c)}")
        ax.set_xlabel("simulated time (ns)")
        ax.set_ylabel("fidelity")
        ax.legend(frameon=False)
        fig.savefig(path)
        plt.close(fig)
    return path


def render(result, path: Path):
    """Pick a figure for ``result``; returns the written path or ``None``."""
    if result.command == "sweep":
        if {"time_ns", "fidelity"} <= set(result.columns) and result.rows:
            return plot_sweep(result, path)
        return None
    if result.command.startswith("simulate"):
        return plot_populations(result, path)
    return None
