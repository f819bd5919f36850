"""Figure rendering for the report path. Headless (Agg) only."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .grid import Grid
from .model import ModelParams

__all__ = ["save_state_figure", "save_history_figure"]


def save_state_figure(path, grid: Grid, fields: dict, time: float, params: ModelParams | None = None) -> Path:
    """Profiles of one snapshot: rho, theta with its branch envelope, xi, margin."""
    path = Path(path)
    if grid.dim == 1:
        (x,) = grid.coords()
        fig, axes = plt.subplots(2, 2, figsize=(9.5, 6.5), sharex=True)
        ax = axes[0, 0]
        ax.plot(x, fields["rho"], color="tab:blue")
        ax.set_ylabel("rho")
        ax = axes[0, 1]
        ax.plot(x, fields["theta"], color="tab:red", label="theta")
        if params is not None:
            br = params.branch
            ax.plot(x, br.s_lower(fields["rho"]), "k--", lw=0.8, label="branch floor")
            ax.plot(x, br.s_upper(fields["rho"]), "k:", lw=0.8, label="branch zero")
            ax.legend(fontsize=8)
        ax.set_ylabel("theta")
        ax = axes[1, 0]
        ax.plot(x, fields["xi"], color="tab:green")
        ax.set_ylabel("xi")
        ax.set_xlabel("x")
        ax = axes[1, 1]
        if "margin" in fields:
            ax.plot(x, fields["margin"], color="tab:purple")
        ax.axhline(0.0, color="k", lw=0.6)
        ax.set_ylabel("margin")
        ax.set_xlabel("x")
    else:
        fig, axes = plt.subplots(1, 3, figsize=(12.0, 3.6))
        x, y = grid.coords()
        for ax, name in zip(axes, ("rho", "theta", "xi")):
            pc = ax.pcolormesh(x, y, fields[name], shading="auto")
            fig.colorbar(pc, ax=ax)
            ax.set_title(name)
            ax.set_aspect("equal")
    fig.suptitle(f"state at t = {time:.6g}")
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path


def save_history_figure(path, summary: dict) -> Path:
    """Run history: field ranges, margin floor, residual, chemical potential."""
    path = Path(path)
    t = summary["time"]
    fig, axes = plt.subplots(2, 2, figsize=(9.5, 6.5), sharex=True)
    ax = axes[0, 0]
    ax.fill_between(t, summary["rho_min"], summary["rho_max"], alpha=0.3, color="tab:blue")
    ax.plot(t, summary["rho_min"], t, summary["rho_max"], color="tab:blue", lw=0.9)
    ax.set_ylabel("rho range")
    ax = axes[0, 1]
    ax.fill_between(t, summary["theta_min"], summary["theta_max"], alpha=0.3, color="tab:red")
    ax.plot(t, summary["theta_min"], t, summary["theta_max"], color="tab:red", lw=0.9)
    ax.set_ylabel("theta range")
    ax = axes[1, 0]
    ax.plot(t, summary["margin_min"], color="tab:purple", label="min margin")
    ax.plot(t, summary["xi_max"], color="tab:green", label="max xi")
    ax.axhline(0.0, color="k", lw=0.6)
    ax.set_xlabel("t")
    ax.legend(fontsize=8)
    ax = axes[1, 1]
    ax.semilogy(t, np.maximum(summary["residual_max"], 1e-18), color="tab:orange")
    ax.set_ylabel("max |lam + sqrt(rho xi)|")
    ax.set_xlabel("t")
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path
