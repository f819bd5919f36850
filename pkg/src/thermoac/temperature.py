"""The pointwise temperature equation and its margin bookkeeping.

Given (rho, xi), the temperature solves lam(rho, theta) = -sqrt(rho*xi) on
the branch (s_lower(rho), s_upper(rho)]. The solve is a safeguarded Newton
iteration run simultaneously on every node of a whole space-time series; it
is bracketed from below a guaranteed distance into the branch:

    margin = cv*exp(-1 - cstar*rho) - sqrt(rho*xi)               (well depth gap)
    delta_loc = sqrt(2 * margin * s_lower(rho) / cv)             (local clearance)

Convexity of lam in s gives lam(r, s) <= lam_min(r) + (cv / (2*s_lower)) *
(s - s_lower)^2 in the relevant range, so the residual at s_lower + delta_loc
is still <= 0 while it is +sqrt(rho*xi) >= 0 at s_upper: a sign bracket that
only degenerates when the margin does.

`margin_check` turns a series margin into the run constants: eps0 is half the
minimal margin at the entry level, delta0 = 0.5*sqrt((2*eps0/cv)*
exp(-1 - cstar*max rho)) the clearance every point with margin >= eps0 keeps
from the branch floor (with factor 2), and from delta0 the rate bound
constant L0 = 1 / (cv*log(1 + 2*delta0/theta_hi)).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BracketFailure, MarginViolation
from .model import ModelParams, dlam_ds, lam
from .xi_ode import XiSolution

__all__ = [
    "MarginReport",
    "pointwise_margin",
    "margin_check",
    "solve_theta",
    "theta_rate_bound",
]


@dataclass
class MarginReport:
    """Margin series and the constants derived from its entry level."""

    margin: np.ndarray
    eps0: float
    min_margin: float
    delta0: float
    max_dt_theta: float | None = None


def pointwise_margin(rho, xi, params: ModelParams):
    """cv*exp(-1 - cstar*rho) - sqrt(rho*xi); positive iff the upper root exists."""
    rho = np.asarray(rho, dtype=float)
    xi = np.asarray(xi, dtype=float)
    return params.cv * np.exp(-1.0 - params.cstar * rho) - np.sqrt(rho * xi)


def margin_check(rho: np.ndarray, xi: np.ndarray, params: ModelParams) -> MarginReport:
    """Margin bookkeeping over a series whose level 0 is the window seam.

    Raises MarginViolation when the margin is not strictly positive
    everywhere in the series.
    """
    margin = pointwise_margin(rho, xi, params)
    min_margin = float(margin.min())
    if min_margin <= 0.0:
        raise MarginViolation(f"margin_check: min margin {min_margin:.6e} <= 0")
    eps0 = 0.5 * float(margin[0].min())
    delta0 = 0.5 * np.sqrt((2.0 * eps0 / params.cv) * np.exp(-1.0 - params.cstar * float(np.max(rho))))
    return MarginReport(margin=margin, eps0=eps0, min_margin=min_margin, delta0=float(delta0))


def solve_theta(rho: np.ndarray, xi: np.ndarray, params: ModelParams, tol: float = 1e-12) -> np.ndarray:
    """Upper-root temperature of lam(rho, theta) = -sqrt(rho*xi), any array shape.

    Points with xi == 0 get s_upper(rho) exactly. Everything else is solved by
    bracketed Newton with bisection safeguard to |residual| <= tol. Raises
    BracketFailure when the margin is not positive (margin_check was skipped)
    or the iteration cannot close the bracket.
    """
    rho = np.asarray(rho, dtype=float)
    xi = np.asarray(xi, dtype=float)
    shape = rho.shape
    r = rho.ravel()
    target = -np.sqrt(r * xi.ravel())

    br = params.branch
    s_lo_base = br.s_lower(r)
    s_hi = br.s_upper(r)
    margin = params.cv * s_lo_base + target
    if np.any(margin <= 0.0):
        raise BracketFailure(
            f"solve_theta: margin reaches {float(margin.min()):.6e} <= 0; no upper root there"
        )

    theta = s_hi.copy()
    solve = target < 0.0
    if not np.any(solve):
        return theta.reshape(shape)

    rs = r[solve]
    tgt = target[solve]
    lo = s_lo_base[solve] + np.sqrt(2.0 * margin[solve] * s_lo_base[solve] / params.cv)
    hi = s_hi[solve]
    f_lo = lam(rs, lo, params) - tgt
    # convexity puts the residual at lo at or below zero up to rounding
    if np.any(f_lo > tol):
        raise BracketFailure("solve_theta: lower bracket lost, margin arithmetic inconsistent")
    x = 0.5 * (lo + hi)
    done = np.zeros(x.shape, dtype=bool)
    for _ in range(200):
        f = lam(rs, x, params) - tgt
        done |= np.abs(f) <= tol
        if done.all():
            break
        pos = (f > 0.0) & ~done
        neg = (f <= 0.0) & ~done
        hi[pos] = x[pos]
        lo[neg] = x[neg]
        df = dlam_ds(rs, x, params)
        with np.errstate(divide="ignore", invalid="ignore"):
            newton = x - f / df
        bad = ~np.isfinite(newton) | (newton <= lo) | (newton >= hi) | (df <= 0.0)
        x = np.where(done, x, np.where(bad, 0.5 * (lo + hi), newton))
    else:
        raise BracketFailure(f"solve_theta: {int((~done).sum())} nodes unconverged after 200 iterations")
    theta[solve] = x
    return theta.reshape(shape)


def theta_rate_bound(
    theta: np.ndarray,
    rho: np.ndarray,
    xi_sol: XiSolution,
    report: MarginReport,
    params: ModelParams,
    dt: float,
) -> float:
    """A-priori bound on |dt theta| from the clearance constant.

    Computes L0 = 1/(cv*log(1 + 2*delta0/theta_hi)) and returns the pointwise
    max of L0*(|dt sqrt(rho*xi)| + c0*theta_hi*|dt rho|), with the time
    derivatives taken as first differences of the given series. The value is
    also stored into report.max_dt_theta.
    """
    if theta.shape != rho.shape:
        raise ValueError("theta_rate_bound: theta and rho series must share a shape")
    theta_hi = params.branch.theta_star_hi
    L0 = 1.0 / (params.cv * np.log1p(2.0 * report.delta0 / theta_hi))
    sq = np.sqrt(rho * xi_sol.xi)
    d_sq = np.abs(np.diff(sq, axis=0)) / dt
    d_rho = np.abs(np.diff(rho, axis=0)) / dt
    bound = L0 * (d_sq + params.c0 * theta_hi * d_rho)
    value = float(bound.max()) if bound.size else 0.0
    report.max_dt_theta = value
    return value
