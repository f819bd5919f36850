"""Shared fixtures: the pinned full-size run and the acceptance summary hook."""

import time

import pytest

import thermoac as ta

ACCEPTANCE_LINES: list[str] = []


def record_acceptance(label: str, passed: bool, detail: str) -> None:
    ACCEPTANCE_LINES.append(f"{'PASS' if passed else 'FAIL'}  {label}: {detail}")


class CanonicalRun:
    """The pinned desk-scale run, executed once per session and timed."""

    def __init__(self):
        cfg = ta.canonical_run_config()
        self.config = cfg
        rho0 = ta.default_rho0_profile(cfg.grid)
        self.triple = ta.synthesize(rho0, cfg.theta_frac, cfg.params)
        state0 = ta.SystemState(self.triple.rho0, self.triple.xi0, self.triple.theta0)
        t0 = time.perf_counter()
        self.result = ta.continue_in_time(
            state0, cfg.driver, cfg.params, cfg.horizon, float(cfg.sigma_bar_spec)
        )
        self.elapsed = time.perf_counter() - t0


@pytest.fixture(scope="session")
def canonical_run():
    return CanonicalRun()


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)
