"""Derived quantities and residual monitors for finished runs."""

from __future__ import annotations

import numpy as np

from .grid import laplacian_values, time_derivative
from .model import ModelParams, f_prime, lam
from .state import SystemState, Trajectory

__all__ = [
    "transcendental_residual",
    "neglected_term_report",
    "pde_residual_series",
    "level_summary",
]


def transcendental_residual(rho, xi, theta, params: ModelParams) -> np.ndarray:
    """|lam(rho, theta) + sqrt(rho*xi)| pointwise; zero on the exact branch."""
    rho = np.asarray(rho, dtype=float)
    xi = np.asarray(xi, dtype=float)
    return np.abs(lam(rho, theta, params) + np.sqrt(np.maximum(rho * xi, 0.0)))


def neglected_term_report(traj: Trajectory, params: ModelParams | None = None) -> np.ndarray:
    """Per-level max of |(xi/theta) * dt theta|.

    This is the size of the commutator between the modeled rate equation and
    its temperature-weighted form; the solver never feeds it back, it is
    reported so a run can be judged against the regime where dropping it is
    harmless.
    """
    if len(traj) < 2:
        return np.zeros(len(traj))
    dt = float(traj.times[1] - traj.times[0])
    dth = time_derivative(traj.theta, dt)
    term = np.abs(traj.xi / traj.theta * dth)
    return term.reshape(len(traj), -1).max(axis=1)


def pde_residual_series(traj: Trajectory, params: ModelParams) -> np.ndarray:
    """Interior-level max residual of the continuum phase equation.

    Central time differences on the stored trajectory; first-order stepping
    plus second-order space means this shrinks like O(dt + h^2) under joint
    refinement. Levels 0 and nlev-1 are excluded (no centered difference).
    """
    if len(traj) < 3:
        return np.zeros(0)
    dt = float(traj.times[1] - traj.times[0])
    out = np.empty(len(traj) - 2)
    for k in range(1, len(traj) - 1):
        r = traj.rho[k]
        dtr = (traj.rho[k + 1] - traj.rho[k - 1]) / (2.0 * dt)
        res = (
            params.kappa * dtr
            - laplacian_values(r, traj.grid)
            + f_prime(r, params)
            - params.c0 * traj.theta[k]
            - np.sqrt(np.maximum(traj.xi[k], 0.0) / r)
        )
        out[k - 1] = float(np.max(np.abs(res)))
    return out


def level_summary(traj: Trajectory, params: ModelParams) -> dict:
    """Per-level scalar summaries used by the report writer and figures."""
    nlev = len(traj)
    flat = lambda a: a.reshape(nlev, -1)
    rho, xi, theta = flat(traj.rho), flat(traj.xi), flat(traj.theta)
    sqrt_rhoxi = np.sqrt(np.maximum(rho * xi, 0.0))
    margin = params.cv * np.exp(-1.0 - params.cstar * rho) - sqrt_rhoxi
    resid = np.abs(
        params.c0 * rho * theta + params.cv * theta * np.log(theta) + sqrt_rhoxi
    )
    with np.errstate(invalid="ignore"):
        mu = np.sqrt(np.maximum(xi, 0.0) / rho)
    return {
        "time": traj.times.copy(),
        "rho_min": rho.min(axis=1),
        "rho_max": rho.max(axis=1),
        "xi_min": xi.min(axis=1),
        "xi_max": xi.max(axis=1),
        "theta_min": theta.min(axis=1),
        "theta_max": theta.max(axis=1),
        "margin_min": margin.min(axis=1),
        "mu_max": mu.max(axis=1),
        "residual_max": resid.max(axis=1),
    }
