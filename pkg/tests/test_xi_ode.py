"""Pointwise rate ODE: closed forms, maximality at zero, monotone structure.

The update is exact (up to roundoff) whenever the rate coefficient is
constant or linear in time, because the half-step average integrates those
exactly; the closed-form cases below exploit that.
"""

import numpy as np
import pytest

import thermoac as ta
from thermoac.xi_ode import XiOdeInput, dt_sqrt_xi, maximal_solution


def _const_drive(nt, dt, sigma, xi0, v=1.0):
    shape = (nt + 1, 1)
    return XiOdeInput(
        v=np.full(shape, v),
        dtv=np.zeros(shape),
        sigma_bar=np.full(shape, sigma),
        xi0=np.array([xi0]),
        dt=dt,
    )


def test_pure_decay_hits_zero_and_stays():
    # sigma = 2, v = 1: dy/dt = -1, y = max(1 - t, 0)
    dt = 1e-4
    nt = 20_000
    sol = maximal_solution(_const_drive(nt, dt, sigma=2.0, xi0=1.0))
    t = dt * np.arange(nt + 1)
    exact = np.maximum(1.0 - t, 0.0) ** 2
    assert np.max(np.abs(sol.xi[:, 0] - exact)) <= 1e-10
    assert np.all(sol.xi[t > 1.2] == 0.0)


def test_release_from_zero_is_immediate():
    # the non-Lipschitz point admits the rest state too; the maximal
    # continuation must leave it right away when the coefficient is negative
    dt = 1e-4
    nt = 10_000
    sol = maximal_solution(_const_drive(nt, dt, sigma=-2.0, xi0=0.0))
    t = dt * np.arange(nt + 1)
    assert np.max(np.abs(sol.xi[:, 0] - t * t)) <= 1e-10
    assert sol.xi[1, 0] > 0.0


def test_plateau_between_decay_and_release():
    # sigma flips sign at t = 0.5: decay to zero by 0.2, rest, then ramp
    dt = 1e-4
    nt = 10_000
    t = dt * np.arange(nt + 1)
    sigma = np.where(t < 0.5, 2.0, -2.0)[:, None]
    inp = XiOdeInput(
        v=np.ones((nt + 1, 1)),
        dtv=np.zeros((nt + 1, 1)),
        sigma_bar=sigma,
        xi0=np.array([0.04]),
        dt=dt,
    )
    sol = maximal_solution(inp)
    y_exact = np.maximum(0.2 - t, 0.0) + np.maximum(t - 0.5, 0.0)
    # the flip lands exactly on a node, so the update stays exact to roundoff
    assert np.max(np.abs(sol.sqrt_xi[:, 0] - y_exact)) <= 1e-10
    mid = (t > 0.25) & (t < 0.5)
    assert np.all(sol.xi[mid, 0] == 0.0)


def test_linear_coefficient_composite_closed_form():
    # sigma(t) = 2 - 8t, v = 1, y0 = 0.09: y' = -1 + 4t while active;
    # absorption at t1 = (1 - sqrt(0.28))/4, rest until 0.25, then release
    # onto y = 2(t - 0.25)^2
    dt = 1e-4
    nt = 10_000
    t = dt * np.arange(nt + 1)
    inp = XiOdeInput(
        v=np.ones((nt + 1, 1)),
        dtv=np.zeros((nt + 1, 1)),
        sigma_bar=(2.0 - 8.0 * t)[:, None],
        xi0=np.array([0.09 ** 2]),
        dt=dt,
    )
    sol = maximal_solution(inp)
    t1 = (1.0 - np.sqrt(0.28)) / 4.0
    y_exact = np.where(
        t <= t1, np.maximum(0.09 - t + 2.0 * t * t, 0.0),
        np.where(t <= 0.25, 0.0, 2.0 * (t - 0.25) ** 2),
    )
    assert np.max(np.abs(sol.sqrt_xi[:, 0] - y_exact)) <= 1e-6


def test_nonnegativity_for_arbitrary_drives():
    rng = np.random.default_rng(42)
    nt = 400
    shape = (nt + 1, 12)
    inp = XiOdeInput(
        v=0.2 + rng.uniform(0.0, 0.7, shape),
        dtv=rng.standard_normal(shape),
        sigma_bar=rng.standard_normal(shape) * 5.0,
        xi0=rng.uniform(0.0, 0.5, 12),
        dt=1e-3,
    )
    sol = maximal_solution(inp)
    assert np.all(sol.xi >= 0.0)
    assert np.all(sol.sqrt_xi >= 0.0)


def test_exactly_nonincreasing_when_sigma_nonnegative():
    rng = np.random.default_rng(9)
    nt = 300
    shape = (nt + 1, 8)
    inp = XiOdeInput(
        v=0.3 + rng.uniform(0.0, 0.5, shape),
        dtv=rng.standard_normal(shape),
        sigma_bar=rng.uniform(0.0, 3.0, shape),
        xi0=rng.uniform(0.0, 1.0, 8),
        dt=2e-3,
    )
    sol = maximal_solution(inp)
    assert np.all(np.diff(sol.sqrt_xi, axis=0) <= 0.0)


def test_comparison_in_the_initial_data():
    # the clamped update is monotone in y, so ordering of xi0 propagates
    rng = np.random.default_rng(31)
    nt = 250
    shape = (nt + 1, 6)
    v = 0.3 + rng.uniform(0.0, 0.5, shape)
    dtv = rng.standard_normal(shape)
    sigma = rng.standard_normal(shape)
    small = rng.uniform(0.0, 0.3, 6)
    big = small + rng.uniform(0.0, 0.5, 6)
    kw = dict(v=v, dtv=dtv, sigma_bar=sigma, dt=1e-3)
    sol_small = maximal_solution(XiOdeInput(xi0=small, **kw))
    sol_big = maximal_solution(XiOdeInput(xi0=big, **kw))
    assert np.all(sol_small.sqrt_xi <= sol_big.sqrt_xi)


def test_stability_with_respect_to_the_drive():
    # |y1 - y2| <= (T/2) * max |g1 - g2| because each update is 1-Lipschitz
    rng = np.random.default_rng(77)
    nt = 200
    dt = 1e-3
    shape = (nt + 1, 5)
    v = np.ones(shape)
    dtv = np.zeros(shape)
    s1 = rng.standard_normal(shape)
    s2 = s1 + rng.uniform(-0.1, 0.1, shape)
    xi0 = rng.uniform(0.0, 0.4, 5)
    y1 = maximal_solution(XiOdeInput(v=v, dtv=dtv, sigma_bar=s1, xi0=xi0, dt=dt)).sqrt_xi
    y2 = maximal_solution(XiOdeInput(v=v, dtv=dtv, sigma_bar=s2, xi0=xi0, dt=dt)).sqrt_xi
    bound = 0.5 * nt * dt * np.max(np.abs(s1 - s2))
    assert np.max(np.abs(y1 - y2)) <= bound * (1.0 + 1e-12)


def test_support_mask_matches_the_solution():
    dt = 1e-3
    nt = 2000
    sol = maximal_solution(_const_drive(nt, dt, sigma=2.0, xi0=0.25))
    assert np.array_equal(sol.chi, sol.xi > 0.0)
    assert sol.chi[0, 0] and not sol.chi[-1, 0]


def test_dt_sqrt_xi_rates():
    dt = 1e-3
    nt = 2000
    inp = _const_drive(nt, dt, sigma=2.0, xi0=0.25)  # y = max(0.5 - t, 0)
    sol = maximal_solution(inp)
    rate = dt_sqrt_xi(sol, inp)
    t = dt * np.arange(nt + 1)
    assert np.all(rate[t < 0.49, 0] == -1.0)
    assert np.all(rate[t > 0.51, 0] == 0.0)

    rel = _const_drive(nt, dt, sigma=-2.0, xi0=0.0)
    sol_rel = maximal_solution(rel)
    rate_rel = dt_sqrt_xi(sol_rel, rel)
    assert rate_rel[0, 0] == 0.0  # cut off on the zero set itself
    assert np.all(rate_rel[1:, 0] == 1.0)


def test_kappa_scales_the_quadratic_term():
    nt = 100
    dt = 1e-3
    shape = (nt + 1, 1)
    kw = dict(
        v=np.ones(shape), dtv=np.full(shape, 2.0), sigma_bar=np.zeros(shape),
        xi0=np.array([1.0]), dt=dt,
    )
    y1 = maximal_solution(XiOdeInput(kappa=1.0, **kw)).sqrt_xi[-1, 0]
    y2 = maximal_solution(XiOdeInput(kappa=2.0, **kw)).sqrt_xi[-1, 0]
    # g doubles with kappa here, so the decay over [0, T] doubles
    assert (1.0 - y2) == pytest.approx(2.0 * (1.0 - y1), rel=1e-12)


def test_input_validation():
    good = dict(
        v=np.ones((3, 2)), dtv=np.zeros((3, 2)), sigma_bar=np.zeros((3, 2)),
        xi0=np.zeros(2), dt=0.1,
    )
    XiOdeInput(**good)
    with pytest.raises(ValueError):
        XiOdeInput(**{**good, "v": np.zeros((3, 2))})
    with pytest.raises(ValueError):
        XiOdeInput(**{**good, "xi0": np.array([-1.0, 0.0])})
    with pytest.raises(ValueError):
        XiOdeInput(**{**good, "dt": 0.0})
    with pytest.raises(ValueError):
        XiOdeInput(**{**good, "dtv": np.zeros((4, 2))})
    with pytest.raises(ValueError):
        XiOdeInput(**{**good, "xi0": np.zeros(3)})
    with pytest.raises(ValueError):
        XiOdeInput(**{**good, "kappa": -1.0})
