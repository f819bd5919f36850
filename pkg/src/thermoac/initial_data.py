"""Construction and admission control for initial triples (rho0, xi0, theta0).

A triple is admissible when rho0 is strictly inside (0,1), xi0 >= 0, theta0
solves the pointwise temperature equation on the correct branch, and the
margin cv*exp(-1 - cstar*rho0) - sqrt(rho0*xi0) is strictly positive (the
necessary weak inequality alone is not enough to start a run; the strict form
is what buys a positive eps0).

`synthesize` builds a compatible triple from a phase profile alone: it places
theta0 a chosen fraction of the way across the branch interval and back-solves
xi0 from the consistency function, so compatibility holds by construction and
the margin is controlled by the fraction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import Grid, ScalarField, laplacian_values
from .model import ModelParams, lam
from .temperature import pointwise_margin, solve_theta

__all__ = [
    "InitialTriple",
    "ConditionResult",
    "ValidationReport",
    "default_rho0_profile",
    "synthesize",
    "validate",
    "theta_roundtrip_residual",
]


@dataclass
class InitialTriple:
    rho0: ScalarField
    xi0: ScalarField
    theta0: ScalarField
    eps0: float | None = None


@dataclass
class ConditionResult:
    name: str
    passed: bool
    detail: str


@dataclass
class ValidationReport:
    conditions: list[ConditionResult]
    eps0: float | None

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.conditions)

    def condition(self, name: str) -> ConditionResult:
        for c in self.conditions:
            if c.name == name:
                return c
        raise KeyError(name)

    def lines(self) -> list[str]:
        out = []
        for c in self.conditions:
            out.append(f"{'PASS' if c.passed else 'FAIL'}  {c.name}: {c.detail}")
        return out


def default_rho0_profile(grid: Grid) -> ScalarField:
    """Built-in phase profile 0.4 + 0.1*cos(pi x) (tensor cosine in 2D)."""
    if grid.dim == 1:
        (x,) = grid.coords()
        vals = 0.4 + 0.1 * np.cos(np.pi * x)
    else:
        x, y = grid.coords()
        vals = 0.4 + 0.1 * np.cos(np.pi * x) * np.cos(np.pi * y)
    return ScalarField(grid, vals)


def synthesize(rho0: ScalarField, theta_frac: float, params: ModelParams) -> InitialTriple:
    """Compatible triple from a phase profile and a branch fraction in [0, 1].

    theta0 = s_lower + frac*(s_upper - s_lower) pointwise, xi0 back-solved as
    lam(rho0, theta0)^2 / rho0. frac = 1 puts theta0 on the zero of lam and
    gives xi0 = 0 identically; frac = 0 sits on the branch floor and fails
    strict-margin validation by design.
    """
    if not (0.0 <= theta_frac <= 1.0):
        raise ValueError("synthesize: theta_frac must lie in [0, 1]")
    r = rho0.values
    if np.any(r <= 0.0) or np.any(r >= 1.0):
        raise ValueError("synthesize: rho0 must lie strictly inside (0, 1)")
    br = params.branch
    lo = br.s_lower(r)
    hi = br.s_upper(r)
    theta = lo + theta_frac * (hi - lo)
    val = lam(r, theta, params)
    if theta_frac == 1.0:
        xi = np.zeros_like(r)
    else:
        xi = (val * val) / r
    grid = rho0.grid
    triple = InitialTriple(
        rho0=ScalarField(grid, r.copy()),
        xi0=ScalarField(grid, xi),
        theta0=ScalarField(grid, theta),
    )
    margin = pointwise_margin(r, xi, params)
    if margin.min() > 0.0:
        triple.eps0 = 0.5 * float(margin.min())
    return triple


def _boundary_normal_slope(values: np.ndarray, grid: Grid) -> float:
    """Max second-order one-sided normal derivative magnitude over the boundary."""
    h = grid.h
    worst = 0.0

    def one_sided(a, b, c):
        return np.max(np.abs(-3.0 * a + 4.0 * b - c)) / (2.0 * h)

    if grid.dim == 1:
        worst = max(
            one_sided(values[0], values[1], values[2]),
            one_sided(values[-1], values[-2], values[-3]),
        )
    else:
        worst = max(
            one_sided(values[0, :], values[1, :], values[2, :]),
            one_sided(values[-1, :], values[-2, :], values[-3, :]),
            one_sided(values[:, 0], values[:, 1], values[:, 2]),
            one_sided(values[:, -1], values[:, -2], values[:, -3]),
        )
    return float(worst)


def validate(triple: InitialTriple, params: ModelParams, bc_tol: float | None = None) -> ValidationReport:
    """Named admissibility checks; every condition is evaluated, none short-circuits.

    bc_tol bounds the discrete normal slope of rho0 at the boundary; default
    is the grid spacing h (an O(1) slope fails, discretization noise passes).
    """
    grid = triple.rho0.grid
    r = triple.rho0.values
    xi = triple.xi0.values
    th = triple.theta0.values
    br = params.branch
    checks: list[ConditionResult] = []

    rmin, rmax = float(r.min()), float(r.max())
    checks.append(
        ConditionResult(
            "rho0_range",
            0.0 < rmin and rmax < 1.0,
            f"rho0 in [{rmin:.6g}, {rmax:.6g}], needs (0, 1) strictly",
        )
    )
    ximin = float(xi.min())
    checks.append(ConditionResult("xi0_nonnegative", ximin >= 0.0, f"min xi0 = {ximin:.6g}"))
    thmin = float(th.min())
    checks.append(ConditionResult("theta0_positive", thmin > 0.0, f"min theta0 = {thmin:.6g}"))

    rho_ok = checks[0].passed and thmin > 0.0
    if rho_ok:
        resid = float(np.max(np.abs(lam(r, th, params) + np.sqrt(np.maximum(r * xi, 0.0)))))
        checks.append(
            ConditionResult(
                "compatibility", resid <= 1e-10,
                f"max |lam(rho0, theta0) + sqrt(rho0*xi0)| = {resid:.3e}, tol 1e-10",
            )
        )
        slack = float(np.max(np.sqrt(np.maximum(r * xi, 0.0)) - params.cv * br.s_lower(r)))
        checks.append(
            ConditionResult(
                "necessary_margin", slack <= 0.0,
                f"max (sqrt(rho0*xi0) - cv*exp(-1 - cstar*rho0)) = {slack:.3e}, needs <= 0",
            )
        )
        margin = pointwise_margin(r, np.maximum(xi, 0.0), params)
        mmin = float(margin.min())
        checks.append(
            ConditionResult(
                "strict_margin", mmin > 0.0,
                f"min margin = {mmin:.6g}, needs > 0 for a positive eps0",
            )
        )
        floor_gap = float(np.min(th - br.s_lower(r)))
        checks.append(
            ConditionResult(
                "branch_lower", floor_gap >= -1e-12,
                f"min (theta0 - s_lower(rho0)) = {floor_gap:.6g}, the root must sit on the upper branch",
            )
        )
    else:
        for name in ("compatibility", "necessary_margin", "strict_margin", "branch_lower"):
            checks.append(ConditionResult(name, False, "skipped: rho0/theta0 out of domain"))
        mmin = -np.inf

    tol_bc = grid.h if bc_tol is None else bc_tol
    slope = _boundary_normal_slope(r, grid)
    checks.append(
        ConditionResult(
            "neumann_rho0", slope <= tol_bc,
            f"max boundary normal slope of rho0 = {slope:.3e}, tol {tol_bc:.3e}",
        )
    )

    lap_ok = bool(np.all(np.isfinite(laplacian_values(r, grid))))
    checks.append(ConditionResult("laplacian_finite", lap_ok, "discrete laplacian of rho0 is finite"))

    sq = np.sqrt(np.maximum(xi, 0.0))
    if grid.dim == 1:
        gr = np.diff(sq) / grid.h
        gnorm = float(np.max(np.abs(gr))) if gr.size else 0.0
    else:
        gx = np.diff(sq, axis=0) / grid.h
        gy = np.diff(sq, axis=1) / grid.h
        gnorm = max(float(np.max(np.abs(gx))), float(np.max(np.abs(gy))))
    checks.append(
        ConditionResult(
            "sqrt_xi0_gradient_finite", np.isfinite(gnorm),
            f"max |edge difference of sqrt(xi0)|/h = {gnorm:.3e}",
        )
    )

    eps0 = 0.5 * mmin if np.isfinite(mmin) and mmin > 0.0 else None
    return ValidationReport(conditions=checks, eps0=eps0)


def theta_roundtrip_residual(triple: InitialTriple, params: ModelParams) -> float:
    """Max difference between theta0 and the temperature re-solved from (rho0, xi0)."""
    solved = solve_theta(triple.rho0.values, triple.xi0.values, params)
    return float(np.max(np.abs(solved - triple.theta0.values)))
