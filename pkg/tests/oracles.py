"""Independent reference computations backing the frozen expected values.

Nothing in here touches the package's own numerics: roots come from plain
bisection or scipy's brentq, ODE references from solve_ivp at tolerances two
to four orders tighter than anything under test, and norm accumulation from
math.fsum. When a test compares against a literal, the literal was produced
by one of these routines (or 40-digit arithmetic offline) and pasted in.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq


def bisect_root(fn, lo, hi, iters=200):
    """Plain bisection. fn(lo) and fn(hi) must straddle zero."""
    flo = fn(lo)
    fhi = fn(hi)
    if not (flo * fhi < 0.0):
        raise ValueError("bisect_root: no sign change on the bracket")
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        fm = fn(mid)
        if fm == 0.0:
            return mid
        if flo * fm < 0.0:
            hi = mid
        else:
            lo, flo = mid, fm
    return 0.5 * (lo + hi)


def fsum_norms(values, weights):
    """(L2, Linf, L1) of a weighted nodal field via compensated summation."""
    v = np.asarray(values, dtype=float).ravel()
    w = np.asarray(weights, dtype=float).ravel()
    l2 = math.sqrt(math.fsum(float(wi) * float(vi) * float(vi) for wi, vi in zip(w, v)))
    linf = max(abs(float(x)) for x in v)
    l1 = math.fsum(float(wi) * abs(float(vi)) for wi, vi in zip(w, v))
    return l2, linf, l1


def theta_root(r, target, c0, cv):
    """Larger root of c0*r*s + cv*s*log(s) = target, bracketed on the branch."""
    def fn(s):
        return c0 * r * s + cv * s * math.log(s) - target

    s_lo = math.exp(-1.0 - (c0 / cv) * r)
    s_hi = math.exp(-(c0 / cv) * r)
    if target == 0.0:
        return s_hi
    return brentq(fn, s_lo, s_hi, xtol=1e-15, rtol=8.9e-16)


def uniform_phase_reference(rho_init, c0, kappa, a, shift, theta_value, mu_value, t_eval):
    """Single uniform phase ODE: kappa*r' = -f'(r) + c0*theta + mu, frozen theta/mu."""
    def rhs(t, state):
        r = state[0]
        fp = math.log(r) - math.log1p(-r) + a * (1.0 - 2.0 * r) + shift
        return [(-fp + c0 * theta_value + mu_value / math.sqrt(r)) / kappa]

    sol = solve_ivp(
        rhs, (0.0, float(t_eval[-1])), [rho_init],
        method="DOP853", t_eval=t_eval, rtol=1e-11, atol=1e-13,
    )
    if not sol.success:
        raise RuntimeError(sol.message)
    return sol.y[0]


def uniform_system_reference(rho_init, y_init, c0, cv, kappa, a, shift, sigma_bar, t_eval):
    """Spatially uniform coupled triple at oracle accuracy.

    State (r, y) with y = sqrt(xi); the temperature is eliminated through the
    larger root of the pointwise equation at every right-hand-side evaluation.
    Valid while y stays strictly positive over the requested span.
    """
    def theta_of(r, y):
        return theta_root(r, -math.sqrt(r) * max(y, 0.0), c0, cv)

    def rhs(t, state):
        r, y = state
        y = max(y, 0.0)
        th = theta_of(r, y)
        fp = math.log(r) - math.log1p(-r) + a * (1.0 - 2.0 * r) + shift
        dr = (-fp + c0 * th + y / math.sqrt(r)) / kappa
        dy = -(kappa * dr * dr + sigma_bar) / (2.0 * math.sqrt(r))
        return [dr, dy]

    sol = solve_ivp(
        rhs, (0.0, float(t_eval[-1])), [rho_init, y_init],
        method="DOP853", t_eval=t_eval, rtol=1e-11, atol=1e-13,
    )
    if not sol.success:
        raise RuntimeError(sol.message)
    rho = sol.y[0]
    y = np.maximum(sol.y[1], 0.0)
    theta = np.array([theta_of(r, yy) for r, yy in zip(rho, y)])
    return rho, y * y, theta
