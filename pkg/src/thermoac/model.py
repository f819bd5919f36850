"""Model parameters, the double-well split, and the temperature branch geometry.

The simulator evolves three fields: an order parameter ``rho`` confined to the
open interval (0,1), a nonnegative rate field ``xi``, and an absolute
temperature ``theta`` tied to the other two pointwise through the consistency
function

    lam(r, s) = c0*r*s + cv*s*log(s),      s > 0,

via lam(rho, theta) = -sqrt(rho*xi). For each fixed r the map s -> lam(r, s)
is strictly convex, tends to 0 as s -> 0+, vanishes at s_upper(r) =
exp(-cstar*r) and attains its minimum -cv*exp(-1 - cstar*r) at s_lower(r) =
exp(-1 - cstar*r), where cstar = c0/cv. The physically selected temperature is
the larger of the two roots, i.e. the one in (s_lower(rho), s_upper(rho)],
which exists exactly while sqrt(rho*xi) stays below the well depth
cv*exp(-1 - cstar*rho). That gap is the "margin" the rest of the code
monitors.

Everything in this module is elementary, allocation-light, and vectorized
over numpy arrays; it has no solver state.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = [
    "Potential",
    "log_double_well",
    "ModelParams",
    "BranchGeometry",
    "lam",
    "dlam_ds",
    "f_prime",
    "m2_bound",
    "potential_problems",
]


@dataclass(frozen=True)
class Potential:
    """Double-well split f = f1 + f2 on (0,1).

    f1 is the convex part, singular enough at the endpoints to act as a
    barrier (it is treated implicitly by the time stepper); f2 is a smooth
    perturbation with bounded derivative (treated explicitly). ``m2_base``
    must bound sup |f2'| over (0,1); it feeds the runtime bound on the full
    explicit forcing.
    """

    kind: str
    f1: Callable[[np.ndarray], np.ndarray]
    f1_prime: Callable[[np.ndarray], np.ndarray]
    f1_pp: Callable[[np.ndarray], np.ndarray]
    f2: Callable[[np.ndarray], np.ndarray]
    f2_prime: Callable[[np.ndarray], np.ndarray]
    m2_base: float


def log_double_well(a: float = 3.0, linear_shift: float = 0.0) -> Potential:
    """Logarithmic double well.

        f1(r) = r*log(r) + (1-r)*log(1-r) + log(2)
        f2(r) = a*r*(1-r) + linear_shift*r

    The log(2) offset makes f1 >= 0 with equality at r = 1/2. ``linear_shift``
    carries the c0*theta_c coupling shift when the model's characteristic
    temperature is nonzero. Requires a > 0 so that f2 is concave and f1
    absorbs all the convexity.
    """
    if a <= 0.0:
        raise ValueError("log_double_well: well amplitude a must be positive")

    def f1(r):
        r = np.asarray(r, dtype=float)
        return r * np.log(r) + (1.0 - r) * np.log1p(-r) + np.log(2.0)

    def f1_prime(r):
        r = np.asarray(r, dtype=float)
        return np.log(r) - np.log1p(-r)

    def f1_pp(r):
        r = np.asarray(r, dtype=float)
        return 1.0 / (r * (1.0 - r))

    def f2(r):
        r = np.asarray(r, dtype=float)
        return a * r * (1.0 - r) + linear_shift * r

    def f2_prime(r):
        r = np.asarray(r, dtype=float)
        return a * (1.0 - 2.0 * r) + linear_shift

    return Potential(
        kind="log_double_well",
        f1=f1,
        f1_prime=f1_prime,
        f1_pp=f1_pp,
        f2=f2,
        f2_prime=f2_prime,
        m2_base=a + abs(linear_shift),
    )


@dataclass(frozen=True)
class BranchGeometry:
    """Where the temperature branch lives, as a function of the order parameter."""

    cstar: float
    cv: float

    def s_lower(self, r):
        """Location of the minimum of lam(r, .); open lower end of the branch."""
        return np.exp(-1.0 - self.cstar * np.asarray(r, dtype=float))

    def s_upper(self, r):
        """Positive zero of lam(r, .); closed upper end of the branch."""
        return np.exp(-self.cstar * np.asarray(r, dtype=float))

    def lam_at_min(self, r):
        """Minimum value of lam(r, .), equal to -cv*s_lower(r)."""
        return -self.cv * np.exp(-1.0 - self.cstar * np.asarray(r, dtype=float))

    @property
    def theta_star_lo(self) -> float:
        """Global lower bound for branch temperatures over r in [0,1]."""
        return float(np.exp(-(1.0 + self.cstar)))

    @property
    def theta_star_hi(self) -> float:
        """Global upper bound for branch temperatures (s_upper at r = 0)."""
        return 1.0


@dataclass(frozen=True)
class ModelParams:
    """Physical constants plus the double-well split.

    c0 is the coupling between order parameter and temperature, cv the heat
    capacity coefficient, kappa the relaxation coefficient in front of the
    time derivatives. theta_c shifts the well linearly (folded into f2); it
    is kept separate so configs can state it directly. If ``potential`` is
    omitted, the logarithmic well with amplitude ``well_a`` is built.
    """

    c0: float
    cv: float
    kappa: float = 1.0
    theta_c: float = 0.0
    well_a: float = 3.0
    potential: Potential | None = None

    def __post_init__(self):
        if self.c0 <= 0.0 or self.cv <= 0.0 or self.kappa <= 0.0:
            raise ValueError("ModelParams: c0, cv, kappa must all be positive")
        if self.potential is None:
            object.__setattr__(
                self, "potential", log_double_well(self.well_a, self.c0 * self.theta_c)
            )

    @property
    def cstar(self) -> float:
        return self.c0 / self.cv

    @property
    def branch(self) -> BranchGeometry:
        return BranchGeometry(cstar=self.cstar, cv=self.cv)


def lam(r, s, params: ModelParams):
    """Consistency function c0*r*s + cv*s*log(s). Domain: s > 0."""
    s = np.asarray(s, dtype=float)
    if np.any(s <= 0.0):
        raise ValueError("lam: temperature argument must be strictly positive")
    return params.c0 * np.asarray(r, dtype=float) * s + params.cv * s * np.log(s)


def dlam_ds(r, s, params: ModelParams):
    """Partial derivative of lam with respect to s: c0*r + cv*(1 + log(s))."""
    s = np.asarray(s, dtype=float)
    if np.any(s <= 0.0):
        raise ValueError("dlam_ds: temperature argument must be strictly positive")
    return params.c0 * np.asarray(r, dtype=float) + params.cv * (1.0 + np.log(s))


def f_prime(r, params: ModelParams):
    """Full well derivative f1'(r) + f2'(r). Domain: 0 < r < 1 strictly."""
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0.0) or np.any(r >= 1.0):
        raise ValueError("f_prime: argument must lie strictly inside (0, 1)")
    pot = params.potential
    return pot.f1_prime(r) + pot.f2_prime(r)


def m2_bound(params: ModelParams) -> float:
    """Bound on the explicit forcing: sup |f2'| + c0 * (branch upper bound)."""
    return params.potential.m2_base + params.c0 * params.branch.theta_star_hi


def potential_problems(pot: Potential, samples: int = 2001) -> list[str]:
    """Sampled structural checks on a potential split; returns found defects.

    Checks: f = f1 + f2 >= 0 on a grid, f1 midpoint-convex on the same grid,
    f' diverges to -inf near 0 and +inf near 1 (monotone along a dyadic
    approach), |f2'| <= m2_base. An empty list means no defect was detected.
    """
    problems = []
    r = np.linspace(1e-6, 1.0 - 1e-6, samples)
    f = pot.f1(r) + pot.f2(r)
    if not np.all(np.isfinite(f)):
        problems.append("f is not finite on the sample grid")
    elif f.min() < -1e-12:
        problems.append(f"f attains {f.min():.3e} < 0")
    mid = pot.f1(0.5 * (r[:-1] + r[1:]))
    if np.any(mid - 0.5 * (pot.f1(r[:-1]) + pot.f1(r[1:])) > 1e-12):
        problems.append("f1 fails midpoint convexity on the sample grid")
    near0 = [float(pot.f1_prime(10.0 ** (-2 * k)) + pot.f2_prime(10.0 ** (-2 * k))) for k in (1, 2, 3)]
    if not (near0[0] > near0[1] > near0[2]):
        problems.append("f' does not decrease toward 0+")
    near1 = [float(pot.f1_prime(1.0 - 10.0 ** (-2 * k)) + pot.f2_prime(1.0 - 10.0 ** (-2 * k))) for k in (1, 2, 3)]
    if not (near1[0] < near1[1] < near1[2]):
        problems.append("f' does not increase toward 1-")
    d2 = np.abs(pot.f2_prime(r))
    if d2.max() > pot.m2_base + 1e-12:
        problems.append(f"|f2'| reaches {d2.max():.3e} > m2_base = {pot.m2_base:.3e}")
    return problems
