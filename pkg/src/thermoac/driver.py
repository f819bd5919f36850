"""Windowed fixed-point continuation for the coupled system.

One window of length T = nt*dt runs the outer Picard iteration

    theta  <-  solve_theta( evolve_fields(theta) )

from the constant-in-time extension of the seam temperature, measuring
increments in the space-time L2 norm. The iteration is accepted when the
increment drops below outer_tol while every runtime monitor holds:

* margin >= eps0 throughout the window (eps0 = half the seam margin),
* observed max |dt theta| of the iterate <= M_cap,
* the inner coupling loop contracts within its budget.

Any monitor trip raises ShrinkSignal; the continuation catches it, shortens
the window geometrically (never regrowing it), and retries from the same seam.
A window shorter than 16 steps after shrinking is a hard stop
(WindowUnderflow status), a nonpositive margin at a seam is a clean
MarginViolation status, and reaching the horizon is Converged.

There are no a-priori admissibility constants anywhere in this loop: window
length and rate cap are enforced by the monitors above, which is what the run
manifest's `driver.strategy` entry records.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .allen_cahn import EvolutionInput, evolve_fields
from .errors import MarginViolation, NoContraction, ShrinkSignal
from .grid import Grid, ScalarField
from .model import ModelParams
from .state import SystemState, Trajectory
from .temperature import MarginReport, margin_check, pointwise_margin, solve_theta, theta_rate_bound

__all__ = ["DriverConfig", "WindowStats", "RunResult", "run_window", "continue_in_time"]

STATUS_CONVERGED = "Converged"
STATUS_MARGIN = "MarginViolation"
STATUS_UNDERFLOW = "WindowUnderflow"

_STRATEGY_NOTE = (
    "window length and temperature rate are enforced by runtime monitors "
    "(margin >= eps0, observed max |dt theta| <= M_cap, inner contraction) "
    "with geometric window shrinking; no a-priori admissibility constants"
)


@dataclass
class DriverConfig:
    dt: float
    T_init: float = 0.1
    outer_tol: float = 1e-8
    outer_max_iters: int = 30
    window_shrink: float = 0.5
    M_cap: float = 100.0
    inner_tol: float = 1e-10
    inner_max_iters: int = 60
    theta_tol: float = 1e-12
    newton_tol: float = 1e-10
    newton_max_iters: int = 30
    xi_ceiling: float | None = None

    def __post_init__(self):
        if self.dt <= 0.0:
            raise ValueError("DriverConfig: dt must be positive")
        if not (0.0 < self.window_shrink < 1.0):
            raise ValueError("DriverConfig: window_shrink must lie in (0, 1)")
        if self.T_init < self.dt:
            raise ValueError("DriverConfig: T_init must cover at least one step")
        if self.outer_max_iters < 1 or self.inner_max_iters < 1:
            raise ValueError("DriverConfig: iteration budgets must be positive")


@dataclass
class WindowStats:
    t_start: float
    steps: int
    outer_iters: int
    increments: list
    final_increment: float
    shrinks_before: int
    inner_iters_last: int
    observed_rate: float
    rate_bound: float
    eps0: float
    min_margin: float


@dataclass
class RunResult:
    trajectory: Trajectory
    windows: list
    margin_history: list
    status: str
    shrink_events: int
    detail: str = ""


def _l2q_norm(series: np.ndarray, grid: Grid, dt: float) -> float:
    """Space-time L2 norm with trapezoid weights in both directions."""
    w = grid.cell_weights()
    nlev = series.shape[0]
    wt = np.full(nlev, dt)
    wt[0] = wt[-1] = 0.5 * dt
    sq = (series * series * w).reshape(nlev, -1).sum(axis=1)
    return float(np.sqrt(np.sum(wt * sq)))


def run_window(
    theta_guess: np.ndarray,
    rho_seam: np.ndarray,
    xi_seam: np.ndarray,
    sigma_bar: np.ndarray,
    cfg: DriverConfig,
    params: ModelParams,
    grid: Grid,
    xi_ceiling: float | None = None,
):
    """One outer Picard window.

    theta_guess and sigma_bar are series of shape (nt+1, *grid.shape); the
    seam fields are level-0 data. Returns (theta, evolution, margin report,
    increments, observed rate, rate bound). Raises ShrinkSignal when a
    monitor trips.
    """
    theta = np.array(theta_guess, dtype=float)
    increments: list[float] = []
    for it in range(1, cfg.outer_max_iters + 1):
        try:
            evo = evolve_fields(
                EvolutionInput(
                    grid=grid,
                    params=params,
                    theta=theta,
                    rho0=rho_seam,
                    xi0=xi_seam,
                    sigma_bar=sigma_bar,
                    dt=cfg.dt,
                    inner_tol=cfg.inner_tol,
                    inner_max_iters=cfg.inner_max_iters,
                    xi_ceiling=xi_ceiling,
                    newton_tol=cfg.newton_tol,
                    newton_max_iters=cfg.newton_max_iters,
                )
            )
        except NoContraction as exc:
            raise ShrinkSignal(f"inner coupling loop failed to contract: {exc}")
        xi = evo.xi_solution.xi
        try:
            report = margin_check(evo.rho, xi, params)
        except MarginViolation as exc:
            raise ShrinkSignal(f"margin lost inside the window: {exc}")
        if report.min_margin < report.eps0:
            raise ShrinkSignal(
                f"margin {report.min_margin:.6e} dipped below eps0 {report.eps0:.6e}"
            )
        theta_new = solve_theta(evo.rho, xi, params, cfg.theta_tol)
        observed = float(np.max(np.abs(np.diff(theta_new, axis=0)))) / cfg.dt if len(theta_new) > 1 else 0.0
        if observed > cfg.M_cap:
            raise ShrinkSignal(f"observed |dt theta| {observed:.6e} above cap {cfg.M_cap:.6e}")
        inc = _l2q_norm(theta_new - theta, grid, cfg.dt)
        increments.append(inc)
        theta = theta_new
        if inc <= cfg.outer_tol:
            rate = theta_rate_bound(theta, evo.rho, evo.xi_solution, report, params, cfg.dt)
            # clearance invariant: delta_loc >= 2*delta0 wherever margin >= eps0
            gap = theta - params.branch.s_lower(evo.rho)
            held = report.margin >= report.eps0
            assert np.all(gap[held] >= 2.0 * report.delta0 * (1.0 - 1e-9)), "clearance invariant failed"
            return theta, evo, report, increments, observed, rate
    raise ShrinkSignal(
        f"outer loop: increment {increments[-1]:.6e} after {cfg.outer_max_iters} iterations"
    )


def _as_field_values(sigma_bar, grid: Grid) -> np.ndarray:
    if isinstance(sigma_bar, ScalarField):
        return sigma_bar.values.copy()
    arr = np.asarray(sigma_bar, dtype=float)
    if arr.ndim == 0:
        return np.full(grid.shape, float(arr))
    if arr.shape != grid.shape:
        raise ValueError("sigma_bar: expected a scalar or one grid field")
    return arr.copy()


def continue_in_time(
    state0: SystemState,
    cfg: DriverConfig,
    params: ModelParams,
    horizon: float,
    sigma_bar=0.0,
) -> RunResult:
    """March the system to the horizon through accepted windows.

    The horizon is realized to the nearest whole step count. The returned
    trajectory holds every time level of every accepted window; the status is
    Converged, MarginViolation (seam margin nonpositive) or WindowUnderflow
    (window shrank below 16 steps). The xi ceiling is taken from cfg when
    set; otherwise sign-changing sigma_bar gets a generous documented
    fallback of 100*(1 + max xi0) and nonnegative sigma_bar needs none.
    """
    grid = state0.grid
    if horizon <= 0.0:
        raise ValueError("continue_in_time: horizon must be positive")
    sig = _as_field_values(sigma_bar, grid)
    if not np.all(np.isfinite(sig)):
        raise ValueError("continue_in_time: sigma_bar must be finite")
    xi_ceiling = cfg.xi_ceiling
    if xi_ceiling is None and np.any(sig < 0.0):
        xi_ceiling = 100.0 * (1.0 + float(state0.xi.values.max()))

    n_total = max(1, int(round(horizon / cfg.dt)))
    nt_window = max(1, int(round(min(cfg.T_init, horizon) / cfg.dt)))

    rho_levels = [state0.rho.values.copy()]
    xi_levels = [state0.xi.values.copy()]
    theta_levels = [state0.theta.values.copy()]
    windows: list[WindowStats] = []
    margin_history: list[MarginReport] = []
    steps_done = 0
    shrink_events = 0
    shrinks_since_accept = 0
    status = STATUS_CONVERGED
    detail = ""

    while steps_done < n_total:
        seam_rho = rho_levels[-1]
        seam_xi = xi_levels[-1]
        seam_theta = theta_levels[-1]
        seam_margin = float(pointwise_margin(seam_rho, seam_xi, params).min())
        if seam_margin <= 0.0:
            status = STATUS_MARGIN
            detail = f"seam margin {seam_margin:.6e} <= 0 at t = {steps_done * cfg.dt:.6g}"
            break
        nt = min(nt_window, n_total - steps_done)
        theta_guess = np.repeat(seam_theta[None], nt + 1, axis=0)
        sigma_series = np.broadcast_to(sig, (nt + 1,) + grid.shape)
        try:
            theta_s, evo, report, increments, observed, rate = run_window(
                theta_guess, seam_rho, seam_xi, sigma_series, cfg, params, grid, xi_ceiling
            )
        except ShrinkSignal as sig_exc:
            shrink_events += 1
            shrinks_since_accept += 1
            nt_window = max(1, int(round(nt_window * cfg.window_shrink)))
            if nt_window < 16:
                status = STATUS_UNDERFLOW
                detail = (
                    f"window fell to {nt_window} steps (< 16) at t = {steps_done * cfg.dt:.6g}: "
                    f"{sig_exc.reason}"
                )
                break
            continue
        windows.append(
            WindowStats(
                t_start=steps_done * cfg.dt,
                steps=nt,
                outer_iters=len(increments),
                increments=increments,
                final_increment=increments[-1],
                shrinks_before=shrinks_since_accept,
                inner_iters_last=evo.inner_iters,
                observed_rate=observed,
                rate_bound=rate,
                eps0=report.eps0,
                min_margin=report.min_margin,
            )
        )
        margin_history.append(report)
        for k in range(1, nt + 1):
            rho_levels.append(evo.rho[k])
            xi_levels.append(evo.xi_solution.xi[k])
            theta_levels.append(theta_s[k])
        steps_done += nt
        shrinks_since_accept = 0

    times = cfg.dt * np.arange(len(rho_levels))
    manifest: dict = {
        "status": status,
        "detail": detail,
        "steps": steps_done,
        "dt": cfg.dt,
        "horizon_requested": horizon,
        "horizon_reached": steps_done * cfg.dt,
        "windows": len(windows),
        "shrink_events": shrink_events,
        "driver.strategy": "runtime-monitored continuation",
        "driver.strategy.note": _STRATEGY_NOTE,
    }
    for i, ws in enumerate(windows):
        pre = f"window.{i}"
        manifest[f"{pre}.t_start"] = ws.t_start
        manifest[f"{pre}.steps"] = ws.steps
        manifest[f"{pre}.outer_iters"] = ws.outer_iters
        manifest[f"{pre}.final_increment"] = ws.final_increment
        manifest[f"{pre}.shrinks_before"] = ws.shrinks_before
        manifest[f"{pre}.eps0"] = ws.eps0
        manifest[f"{pre}.min_margin"] = ws.min_margin
        manifest[f"{pre}.observed_rate"] = ws.observed_rate
        manifest[f"{pre}.rate_bound"] = ws.rate_bound
    trajectory = Trajectory(
        grid=grid,
        times=times,
        rho=np.stack(rho_levels),
        xi=np.stack(xi_levels),
        theta=np.stack(theta_levels),
        manifest=manifest,
    )
    return RunResult(
        trajectory=trajectory,
        windows=windows,
        margin_history=margin_history,
        status=status,
        shrink_events=shrink_events,
        detail=detail,
    )
