"""Flat `key = value` run configuration: parsing, defaults, the canonical run.

The format is plain text, one dotted key per line, `#` comments, no sections.
Unknown keys are rejected so typos fail loudly. `config_hash` is a stable
sha256 over the resolved key set and goes into the run manifest.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from pathlib import Path

from .driver import DriverConfig
from .grid import Grid
from .model import ModelParams

__all__ = [
    "RunConfig",
    "parse_flat_text",
    "load_run_config",
    "run_config_from_raw",
    "config_hash",
    "canonical_config_text",
    "canonical_run_config",
]

_DEFAULTS = {
    "model.kappa": "1.0",
    "model.theta_c": "0.0",
    "model.potential.a": "3.0",
    "driver.outer_max_iters": "30",
    "driver.window_shrink": "0.5",
    "driver.M_cap": "100.0",
    "source.sigma_bar": "0.0",
    "init.mode": "synthesize",
    "init.rho0_file": "",
    "init.theta_frac": "0.5",
    "output.dir": "out",
    "output.stride": "1",
}

_REQUIRED = (
    "model.c0",
    "model.cv",
    "grid.dim",
    "grid.n",
    "driver.dt",
    "driver.T_init",
    "driver.horizon",
    "driver.outer_tol",
)

_KNOWN = set(_DEFAULTS) | set(_REQUIRED)


@dataclass
class RunConfig:
    params: ModelParams
    grid: Grid
    driver: DriverConfig
    horizon: float
    sigma_bar_spec: str
    init_mode: str
    rho0_file: str
    theta_frac: float
    output_dir: Path
    stride: int
    raw: dict


def parse_flat_text(text: str) -> dict:
    out: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ValueError(f"config line {lineno}: expected 'key = value', got {line!r}")
        key, value = body.split("=", 1)
        key = key.strip()
        if not key:
            raise ValueError(f"config line {lineno}: empty key")
        if key in out:
            raise ValueError(f"config line {lineno}: duplicate key {key!r}")
        out[key] = value.strip()
    return out


def _get_float(raw, key):
    try:
        return float(raw[key])
    except ValueError:
        raise ValueError(f"config key {key}: {raw[key]!r} is not a number") from None


def _get_int(raw, key):
    try:
        return int(raw[key])
    except ValueError:
        raise ValueError(f"config key {key}: {raw[key]!r} is not an integer") from None


def run_config_from_raw(raw: dict) -> RunConfig:
    unknown = sorted(set(raw) - _KNOWN)
    if unknown:
        raise ValueError(f"unknown config keys: {', '.join(unknown)}")
    missing = sorted(k for k in _REQUIRED if k not in raw)
    if missing:
        raise ValueError(f"missing required config keys: {', '.join(missing)}")
    resolved = dict(_DEFAULTS)
    resolved.update(raw)

    params = ModelParams(
        c0=_get_float(resolved, "model.c0"),
        cv=_get_float(resolved, "model.cv"),
        kappa=_get_float(resolved, "model.kappa"),
        theta_c=_get_float(resolved, "model.theta_c"),
        well_a=_get_float(resolved, "model.potential.a"),
    )
    grid = Grid(dim=_get_int(resolved, "grid.dim"), n=_get_int(resolved, "grid.n"))
    driver = DriverConfig(
        dt=_get_float(resolved, "driver.dt"),
        T_init=_get_float(resolved, "driver.T_init"),
        outer_tol=_get_float(resolved, "driver.outer_tol"),
        outer_max_iters=_get_int(resolved, "driver.outer_max_iters"),
        window_shrink=_get_float(resolved, "driver.window_shrink"),
        M_cap=_get_float(resolved, "driver.M_cap"),
    )
    mode = resolved["init.mode"]
    if mode not in ("files", "synthesize"):
        raise ValueError(f"config key init.mode: expected 'files' or 'synthesize', got {mode!r}")
    frac = _get_float(resolved, "init.theta_frac")
    if not (0.0 <= frac <= 1.0):
        raise ValueError("config key init.theta_frac: must lie in [0, 1]")
    stride = _get_int(resolved, "output.stride")
    if stride < 1:
        raise ValueError("config key output.stride: must be >= 1")
    return RunConfig(
        params=params,
        grid=grid,
        driver=driver,
        horizon=_get_float(resolved, "driver.horizon"),
        sigma_bar_spec=resolved["source.sigma_bar"],
        init_mode=mode,
        rho0_file=resolved["init.rho0_file"],
        theta_frac=frac,
        output_dir=Path(resolved["output.dir"]),
        stride=stride,
        raw=resolved,
    )


def load_run_config(path) -> RunConfig:
    return run_config_from_raw(parse_flat_text(Path(path).read_text()))


def config_hash(raw: dict) -> str:
    canon = "\n".join(f"{k} = {raw[k]}" for k in sorted(raw))
    return hashlib.sha256(canon.encode()).hexdigest()


def canonical_config_text(output_dir: str = "out") -> str:
    """The pinned desk-scale run: 1D, 129 nodes, three windows to t = 0.3."""
    return f"""# canonical desk-scale run
model.c0 = 1.0
model.cv = 1.0
model.kappa = 1.0
model.theta_c = 0.0
model.potential.a = 3.0
grid.dim = 1
grid.n = 129
driver.dt = 2.5e-4
driver.T_init = 0.1
driver.horizon = 0.3
driver.outer_tol = 1e-8
driver.outer_max_iters = 30
driver.window_shrink = 0.5
driver.M_cap = 100.0
source.sigma_bar = 0.1
init.mode = synthesize
init.rho0_file =
init.theta_frac = 0.5
output.dir = {output_dir}
output.stride = 40
"""


def canonical_run_config(output_dir: str = "out") -> RunConfig:
    return run_config_from_raw(parse_flat_text(canonical_config_text(output_dir)))
