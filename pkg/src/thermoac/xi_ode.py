"""Pointwise integration of the rate ODE with maximal-solution semantics.

Each grid node carries an independent scalar ODE

    d(xi)/dt = -g(t) * sqrt(xi),    g = (kappa*|dt_v|^2 + sigma_bar) / sqrt(v),

driven by the order-parameter series v > 0. The right-hand side is not
Lipschitz at xi = 0, so once xi touches zero with g < 0 there are infinitely
many continuations (stay at zero, or leave it at any later time). The model
selects the maximal one: xi leaves zero immediately.

Substituting y = sqrt(xi) makes the dynamics affine away from the constraint,
dy/dt = -g/2 while y > 0, and the maximal solution is characterized by two
rules at the constraint set:

* absorption: an update that would push y below zero with g >= 0 stops at 0;
* release: if y = 0 and g < 0, y leaves zero with dy/dt = -g/2 > 0 right away.

Because the active rate -g/2 does not depend on y, the explicit midpoint step
in y collapses to a single update with the coefficient averaged to the half
step. The absorption/release gate must use the step-start state: gating on a
clamped half-step predictor manufactures a rest point just above zero where a
strictly positive y can never finish decaying.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["XiOdeInput", "XiSolution", "maximal_solution", "dt_sqrt_xi"]


@dataclass
class XiOdeInput:
    """Time series drive for the pointwise ODE.

    v, dtv, sigma_bar: arrays of shape (nt+1, *space); xi0: (*space,).
    v must be strictly positive everywhere, xi0 nonnegative.
    """

    v: np.ndarray
    dtv: np.ndarray
    sigma_bar: np.ndarray
    xi0: np.ndarray
    dt: float
    kappa: float = 1.0

    def __post_init__(self):
        self.v = np.asarray(self.v, dtype=float)
        self.dtv = np.asarray(self.dtv, dtype=float)
        self.sigma_bar = np.asarray(self.sigma_bar, dtype=float)
        self.xi0 = np.asarray(self.xi0, dtype=float)
        if self.v.shape != self.dtv.shape or self.v.shape != self.sigma_bar.shape:
            raise ValueError("XiOdeInput: v, dtv, sigma_bar must share one shape")
        if self.v.ndim < 1 or self.v.shape[1:] != self.xi0.shape:
            raise ValueError("XiOdeInput: xi0 shape must match the space shape of v")
        if self.dt <= 0.0:
            raise ValueError("XiOdeInput: dt must be positive")
        if self.kappa <= 0.0:
            raise ValueError("XiOdeInput: kappa must be positive")
        if np.any(self.v <= 0.0):
            raise ValueError("XiOdeInput: v must be strictly positive")
        if np.any(self.xi0 < 0.0):
            raise ValueError("XiOdeInput: xi0 must be nonnegative")


@dataclass
class XiSolution:
    """xi >= 0 series, its square root, and the support mask chi = (xi > 0)."""

    xi: np.ndarray
    sqrt_xi: np.ndarray
    chi: np.ndarray


def _rate_coefficient(inp: XiOdeInput) -> np.ndarray:
    return (inp.kappa * inp.dtv * inp.dtv + inp.sigma_bar) / np.sqrt(inp.v)


def maximal_solution(inp: XiOdeInput) -> XiSolution:
    """Integrate the pointwise ODE, selecting the maximal continuation at xi = 0."""
    g = _rate_coefficient(inp)
    nt = g.shape[0] - 1
    y = np.empty_like(g)
    y[0] = np.sqrt(inp.xi0)
    for k in range(nt):
        g_half = 0.5 * (g[k] + g[k + 1])
        active = (y[k] > 0.0) | (g_half < 0.0)
        step = np.where(active, 0.5 * inp.dt * g_half, 0.0)
        y[k + 1] = np.maximum(y[k] - step, 0.0)
    xi = y * y
    return XiSolution(xi=xi, sqrt_xi=y, chi=(xi > 0.0))


def dt_sqrt_xi(sol: XiSolution, inp: XiOdeInput) -> np.ndarray:
    """Analytic rate of sqrt(xi): -chi * (kappa*|dtv|^2 + sigma_bar) / (2*sqrt(v)).

    On the zero set of xi the rate is cut off by chi; at release points the
    one-sided rate is positive and appears as soon as xi leaves zero.
    """
    return -0.5 * np.where(sol.chi, _rate_coefficient(inp), 0.0)
