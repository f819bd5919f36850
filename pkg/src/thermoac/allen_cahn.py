"""Semi-implicit stepping for the order parameter, coupled to the rate ODE.

One time step of the phase equation treats the convex singular part of the
well implicitly and freezes everything else at the step start:

    (kappa/dt)*(x - rho_prev) - lap(x) + f1'(x)
        = -f2'(rho_prev) + c0*theta_start + sqrt(xi_start)/sqrt(rho_prev).

The logarithmic barrier in f1' keeps the solution strictly inside (0,1); the
Newton iteration is damped so its iterates never leave the open interval. For
the concave f2 of the default well this splitting is of the unconditionally
energy-stable kind: with theta and the source frozen, the lagged-coefficient
free energy cannot increase across a step.

`evolve_fields` is the map from a given temperature series to the pair
(rho series, xi series): march the phase equation with the current rate
source, re-integrate the rate ODE from the new phase series, repeat until the
phase series stops moving (inner Picard loop).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded
from scipy.sparse import diags, eye, kron
from scipy.sparse.linalg import splu

from .errors import NewtonDivergence, NoContraction, RangeViolation
from .grid import Grid, laplacian_values, time_derivative
from .model import ModelParams
from .xi_ode import XiOdeInput, XiSolution, maximal_solution

__all__ = [
    "EvolutionInput",
    "EvolutionResult",
    "pde_substep",
    "evolve_fields",
    "discrete_energy",
]

_laplacian_matrix_cache: dict = {}


def _laplacian_1d_matrix(n: int, h: float):
    h2 = h * h
    main = np.full(n, -2.0 / h2)
    off = np.full(n - 1, 1.0 / h2)
    off_up = off.copy()
    off_lo = off.copy()
    off_up[0] = 2.0 / h2
    off_lo[-1] = 2.0 / h2
    return diags([off_lo, main, off_up], [-1, 0, 1], format="csr")


def _laplacian_matrix(grid: Grid):
    key = (grid.dim, grid.n)
    L = _laplacian_matrix_cache.get(key)
    if L is None:
        L1 = _laplacian_1d_matrix(grid.n, grid.h)
        if grid.dim == 1:
            L = L1
        else:
            I = eye(grid.n, format="csr")
            L = kron(L1, I) + kron(I, L1)
        _laplacian_matrix_cache[key] = L.tocsc()
        L = _laplacian_matrix_cache[key]
    return L


def _solve_newton_system(main_diag: np.ndarray, rhs: np.ndarray, grid: Grid) -> np.ndarray:
    """Solve (diag(main_diag) - Lap) delta = rhs."""
    if grid.dim == 1:
        n = grid.n
        h2 = grid.h * grid.h
        ab = np.zeros((3, n))
        ab[0, 1] = -2.0 / h2
        ab[0, 2:] = -1.0 / h2
        ab[2, : n - 2] = -1.0 / h2
        ab[2, n - 2] = -2.0 / h2
        ab[1, :] = main_diag + 2.0 / h2
        return solve_banded((1, 1), ab, rhs)
    J = diags(main_diag.ravel()) - _laplacian_matrix(grid)
    return splu(J.tocsc()).solve(rhs.ravel()).reshape(grid.shape)


def pde_substep(
    rho_prev: np.ndarray,
    sqrt_xi: np.ndarray,
    theta_now: np.ndarray,
    dt: float,
    grid: Grid,
    params: ModelParams,
    tol: float = 1e-10,
    max_iters: int = 30,
) -> np.ndarray:
    """Advance the order parameter by one implicit-in-f1 step.

    Raises NewtonDivergence if the damped Newton loop stalls, RangeViolation
    if the converged state is not strictly inside (0,1).
    """
    pot = params.potential
    a = params.kappa / dt
    b = a * rho_prev - pot.f2_prime(rho_prev) + params.c0 * theta_now + sqrt_xi / np.sqrt(rho_prev)
    x = rho_prev.copy()
    converged = False
    for _ in range(max_iters):
        G = a * x - laplacian_values(x, grid) + pot.f1_prime(x) - b
        if np.max(np.abs(G)) <= tol:
            converged = True
            break
        delta = _solve_newton_system(a + pot.f1_pp(x), -G, grid)
        alpha = 1.0
        trial = x + delta
        while np.any(trial <= 0.0) or np.any(trial >= 1.0):
            alpha *= 0.5
            if alpha < 1e-12:
                raise NewtonDivergence("pde_substep: damping underflow at the (0,1) barrier")
            trial = x + alpha * delta
        x = trial
    if not converged:
        raise NewtonDivergence(f"pde_substep: no convergence in {max_iters} Newton iterations")
    if np.any(x <= 0.0) or np.any(x >= 1.0):
        raise RangeViolation("pde_substep: step left the open interval (0,1)")
    return x


def _step_with_fallback(rho_k, sqrt_xi_k, theta_k, dt, grid, params, tol, max_iters):
    # retry a failing step with frozen coefficients on a finer substep ladder
    pieces = 1
    while True:
        try:
            x = rho_k
            for _ in range(pieces):
                x = pde_substep(x, sqrt_xi_k, theta_k, dt / pieces, grid, params, tol, max_iters)
            return x
        except (NewtonDivergence, RangeViolation):
            pieces *= 2
            if pieces > 64:
                raise


def _march_rho(rho0, sqrt_xi_series, theta_series, dt, grid, params, tol, max_iters):
    nt = theta_series.shape[0] - 1
    out = np.empty_like(theta_series)
    out[0] = rho0
    for k in range(nt):
        out[k + 1] = _step_with_fallback(
            out[k], sqrt_xi_series[k], theta_series[k], dt, grid, params, tol, max_iters
        )
    return out


@dataclass
class EvolutionInput:
    """Drive for the temperature -> (rho, xi) map over one window.

    theta and sigma_bar are series of shape (nt+1, *grid.shape); rho0 and xi0
    are single fields. theta must sit inside the global branch bounds.
    """

    grid: Grid
    params: ModelParams
    theta: np.ndarray
    rho0: np.ndarray
    xi0: np.ndarray
    sigma_bar: np.ndarray
    dt: float
    inner_tol: float = 1e-10
    inner_max_iters: int = 60
    xi_ceiling: float | None = None
    newton_tol: float = 1e-10
    newton_max_iters: int = 30

    def __post_init__(self):
        self.theta = np.asarray(self.theta, dtype=float)
        self.rho0 = np.asarray(self.rho0, dtype=float)
        self.xi0 = np.asarray(self.xi0, dtype=float)
        self.sigma_bar = np.asarray(self.sigma_bar, dtype=float)
        if self.theta.ndim != self.grid.dim + 1 or self.theta.shape[1:] != self.grid.shape:
            raise ValueError("EvolutionInput: theta must be a series of grid fields")
        if self.sigma_bar.shape != self.theta.shape:
            raise ValueError("EvolutionInput: sigma_bar series must match theta")
        if self.rho0.shape != self.grid.shape or self.xi0.shape != self.grid.shape:
            raise ValueError("EvolutionInput: rho0/xi0 must be single grid fields")
        if np.any(self.rho0 <= 0.0) or np.any(self.rho0 >= 1.0):
            raise ValueError("EvolutionInput: rho0 must lie strictly inside (0,1)")
        if np.any(self.xi0 < 0.0):
            raise ValueError("EvolutionInput: xi0 must be nonnegative")
        br = self.params.branch
        slack = 1e-9
        if self.theta.min() < br.theta_star_lo - slack or self.theta.max() > br.theta_star_hi + slack:
            raise ValueError("EvolutionInput: theta series leaves the global branch bounds")

    def _xi_input(self, v, dtv):
        return XiOdeInput(
            v=v, dtv=dtv, sigma_bar=self.sigma_bar, xi0=self.xi0, dt=self.dt,
            kappa=self.params.kappa,
        )


@dataclass
class EvolutionResult:
    rho: np.ndarray
    dtrho: np.ndarray
    xi_solution: XiSolution
    rho_min: float
    rho_max: float
    xi_max: float
    inner_iters: int
    inner_residual: float
    inner_history: list = field(default_factory=list)


def evolve_fields(inp: EvolutionInput) -> EvolutionResult:
    """Map a temperature series to the coupled (rho, xi) series.

    The first phase march uses the constant-in-time extension of rho0 as the
    previous iterate (so dtv = 0 and the rate source is integrated from the
    initial fields alone); each later pass re-integrates xi from the newest
    phase series. On exit xi is re-integrated from the returned rho one last
    time, so the pair satisfies the rate ODE exactly with respect to rho.

    Raises NoContraction when the loop exhausts its budget, RangeViolation
    when xi crosses its ceiling.
    """
    nlev = inp.theta.shape[0]
    v = np.broadcast_to(inp.rho0, inp.theta.shape).copy()
    dtv = np.zeros_like(v)
    history: list[float] = []
    rho = v
    converged = False
    iters = 0
    for it in range(1, inp.inner_max_iters + 1):
        xi_sol = maximal_solution(inp._xi_input(v, dtv))
        rho = _march_rho(
            inp.rho0, xi_sol.sqrt_xi, inp.theta, inp.dt, inp.grid, inp.params,
            inp.newton_tol, inp.newton_max_iters,
        )
        dist = float(np.max(np.abs(rho - v))) if nlev > 1 else 0.0
        history.append(dist)
        v = rho
        dtv = time_derivative(rho, inp.dt)
        iters = it
        if dist <= inp.inner_tol:
            converged = True
            break
    if not converged:
        raise NoContraction(
            f"evolve_fields: inner residual {history[-1]:.3e} after {iters} iterations"
        )
    xi_sol = maximal_solution(inp._xi_input(rho, dtv))
    xi_max = float(xi_sol.xi.max())
    ceiling = inp.xi_ceiling
    if ceiling is None and np.all(inp.sigma_bar >= 0.0):
        # xi is exactly nonincreasing for nonnegative sigma_bar
        ceiling = float(inp.xi0.max()) * (1.0 + 1e-12) + 1e-300
    if ceiling is not None and xi_max > ceiling:
        raise RangeViolation(f"evolve_fields: xi reached {xi_max:.6e} above its ceiling {ceiling:.6e}")
    return EvolutionResult(
        rho=rho,
        dtrho=dtv,
        xi_solution=xi_sol,
        rho_min=float(rho.min()),
        rho_max=float(rho.max()),
        xi_max=xi_max,
        inner_iters=iters,
        inner_residual=history[-1],
        inner_history=history,
    )


def discrete_energy(rho: np.ndarray, grid: Grid, params: ModelParams, theta=0.0, mu_source=0.0) -> float:
    """Lagged-coefficient free energy of a single phase field.

        E = sum over edges of 0.5*|grad rho|^2  +  sum over cells of
            (f1 + f2)(rho) - (c0*theta + mu_source)*rho

    with trapezoid weights; theta and mu_source may be scalars or fields and
    are treated as frozen coefficients.
    """
    pot = params.potential
    h = grid.h
    w = grid.cell_weights()
    bulk = pot.f1(rho) + pot.f2(rho) - (params.c0 * np.asarray(theta) + np.asarray(mu_source)) * rho
    total = float(np.sum(w * bulk))
    if grid.dim == 1:
        d = np.diff(rho)
        total += 0.5 * float(np.sum(d * d)) / h
    else:
        wt = np.full(grid.n, h)
        wt[0] = wt[-1] = 0.5 * h
        dx = np.diff(rho, axis=0)
        total += 0.5 * float(np.sum((dx * dx) / h * wt[None, :]))
        dy = np.diff(rho, axis=1)
        total += 0.5 * float(np.sum((dy * dy) / h * wt[:, None]))
    return total
