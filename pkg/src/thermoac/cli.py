"""Command line front end: run, validate, make-init, report."""

from __future__ import annotations

import argparse
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .config import RunConfig, config_hash, load_run_config
from .driver import STATUS_MARGIN, STATUS_CONVERGED, continue_in_time
from .errors import ThermoacError
from .grid import ScalarField
from .initial_data import InitialTriple, default_rho0_profile, synthesize, validate
from .model import ModelParams
from .snapshots import (
    fmt17,
    list_snapshots,
    read_field_csv,
    read_manifest,
    read_snapshot,
    snapshot_name,
    write_manifest,
    write_snapshot,
)
from .state import SystemState


def _initial_triple(cfg: RunConfig) -> InitialTriple:
    if cfg.init_mode == "files":
        if not cfg.rho0_file:
            raise ValueError("init.mode = files requires init.rho0_file")
        grid_f, fields = read_snapshot(cfg.rho0_file)
        if grid_f != cfg.grid:
            raise ValueError(
                f"init file grid (dim={grid_f.dim}, n={grid_f.n}) does not match config grid"
            )
        return InitialTriple(
            rho0=ScalarField(cfg.grid, fields["rho"]),
            xi0=ScalarField(cfg.grid, fields["xi"]),
            theta0=ScalarField(cfg.grid, fields["theta"]),
        )
    if cfg.rho0_file:
        rho0 = read_field_csv(cfg.rho0_file)
        if rho0.grid != cfg.grid:
            raise ValueError(
                f"rho0 file grid (dim={rho0.grid.dim}, n={rho0.grid.n}) does not match config grid"
            )
    else:
        rho0 = default_rho0_profile(cfg.grid)
    return synthesize(rho0, cfg.theta_frac, cfg.params)


def _sigma_bar(cfg: RunConfig):
    spec = cfg.sigma_bar_spec
    if spec.startswith("file:"):
        f = read_field_csv(spec[len("file:"):].strip())
        if f.grid != cfg.grid:
            raise ValueError("sigma_bar field grid does not match config grid")
        return f
    return float(spec)


def _print_validation(report) -> None:
    for line in report.lines():
        print("  " + line)


def _cmd_validate(args) -> int:
    cfg = load_run_config(args.config)
    triple = _initial_triple(cfg)
    report = validate(triple, cfg.params)
    _print_validation(report)
    if report.passed:
        print(f"initial data admissible, eps0 = {report.eps0:.6g}")
        return 0
    print("initial data rejected")
    return 1


def _cmd_make_init(args) -> int:
    cfg = load_run_config(args.config)
    if cfg.init_mode == "files":
        raise ValueError("make-init needs init.mode = synthesize")
    triple = _initial_triple(cfg)
    report = validate(triple, cfg.params)
    _print_validation(report)
    if not report.passed:
        print("synthesized data failed validation; nothing written")
        return 1
    out = Path(args.out) if args.out else cfg.output_dir / "initial.csv"
    out.parent.mkdir(parents=True, exist_ok=True)
    state = SystemState(triple.rho0, triple.xi0, triple.theta0)
    write_snapshot(out, state, cfg.params)
    print(f"wrote {out} (eps0 = {report.eps0:.6g})")
    return 0


def _cmd_run(args) -> int:
    cfg = load_run_config(args.config)
    triple = _initial_triple(cfg)
    report = validate(triple, cfg.params)
    _print_validation(report)
    if not report.passed:
        print("validation failed; run aborted")
        return 1
    sigma = _sigma_bar(cfg)
    state0 = SystemState(triple.rho0, triple.xi0, triple.theta0)
    started = time.perf_counter()
    result = continue_in_time(state0, cfg.driver, cfg.params, cfg.horizon, sigma)
    elapsed = time.perf_counter() - started

    outdir = cfg.output_dir
    outdir.mkdir(parents=True, exist_ok=True)
    traj = result.trajectory
    written = 0
    saved = sorted(set(range(0, len(traj), cfg.stride)) | {len(traj) - 1})
    for k in saved:
        write_snapshot(outdir / snapshot_name(k, float(traj.times[k])), traj.state(k), cfg.params)
        written += 1

    manifest = {
        "created": datetime.now(timezone.utc).isoformat(),
        "elapsed_seconds": elapsed,
        "version": __version__,
        "config_hash": config_hash(cfg.raw),
        "snapshots": written,
        "output_stride": cfg.stride,
    }
    for key in sorted(cfg.raw):
        manifest[f"config.{key}"] = cfg.raw[key]
    manifest.update(traj.manifest)
    write_manifest(outdir / "manifest.txt", manifest)

    print(
        f"status {result.status}: {traj.manifest['steps']} steps in {len(result.windows)} windows, "
        f"{result.shrink_events} shrink events, {written} snapshots in {outdir}"
    )
    if result.detail:
        print(f"  {result.detail}")
    if result.status in (STATUS_CONVERGED, STATUS_MARGIN):
        return 0
    return 3


def _params_from_manifest(manifest: dict) -> ModelParams:
    try:
        return ModelParams(
            c0=float(manifest["config.model.c0"]),
            cv=float(manifest["config.model.cv"]),
            kappa=float(manifest.get("config.model.kappa", "1.0")),
            theta_c=float(manifest.get("config.model.theta_c", "0.0")),
            well_a=float(manifest.get("config.model.potential.a", "3.0")),
        )
    except KeyError as exc:
        raise ValueError(f"manifest is missing {exc.args[0]}; cannot rebuild model") from None


def _cmd_report(args) -> int:
    rundir = Path(args.rundir)
    manifest_path = rundir / "manifest.txt"
    if not manifest_path.exists():
        raise ValueError(f"{rundir}: no manifest.txt; not a run directory")
    manifest = read_manifest(manifest_path)
    snaps = list_snapshots(rundir)
    if not snaps:
        raise ValueError(f"{rundir}: no snapshot files found")
    params = _params_from_manifest(manifest)

    from .model import lam  # local import keeps the module list tidy

    rows = []
    summary = {
        "time": [], "rho_min": [], "rho_max": [], "xi_min": [], "xi_max": [],
        "theta_min": [], "theta_max": [], "margin_min": [], "mu_max": [], "residual_max": [],
    }
    last = first = None
    for idx, t, path in snaps:
        grid, fields = read_snapshot(path)
        rho, xi, theta = fields["rho"], fields["xi"], fields["theta"]
        sq = np.sqrt(np.maximum(rho * xi, 0.0))
        margin = params.cv * np.exp(-1.0 - params.cstar * rho) - sq
        resid = float(np.max(np.abs(lam(rho, theta, params) + sq)))
        mu = fields.get("mu")
        if mu is None:
            mu = np.sqrt(np.maximum(xi, 0.0) / rho)
        row = {
            "index": idx,
            "time": t,
            "rho_min": float(rho.min()),
            "rho_max": float(rho.max()),
            "xi_min": float(xi.min()),
            "xi_max": float(xi.max()),
            "theta_min": float(theta.min()),
            "theta_max": float(theta.max()),
            "margin_min": float(margin.min()),
            "mu_max": float(np.max(mu)),
            "residual_max": resid,
        }
        rows.append(row)
        for key in summary:
            summary[key].append(row[key])
        if first is None:
            first = (t, grid, {**fields, "margin": margin})
        last = (t, grid, {**fields, "margin": margin})

    report_path = rundir / "report.csv"
    headers = list(rows[0])
    with report_path.open("w") as fh:
        fh.write(",".join(headers) + "\n")
        for row in rows:
            fh.write(",".join(str(row[k]) if k == "index" else fmt17(row[k]) for k in headers) + "\n")

    from .plots import save_history_figure, save_state_figure

    figdir = rundir / "figures"
    figdir.mkdir(exist_ok=True)
    figures = [
        save_state_figure(figdir / "state_initial.png", first[1], first[2], first[0], params),
        save_state_figure(figdir / "state_final.png", last[1], last[2], last[0], params),
        save_history_figure(figdir / "history.png", {k: np.asarray(v) for k, v in summary.items()}),
    ]

    status = manifest.get("status", "unknown")
    print(f"run status {status}, {len(rows)} snapshots, horizon reached {manifest.get('horizon_reached', '?')}")
    print(f"  final: rho in [{rows[-1]['rho_min']:.4g}, {rows[-1]['rho_max']:.4g}], "
          f"min margin {rows[-1]['margin_min']:.4g}, max residual {rows[-1]['residual_max']:.3e}")
    print(f"  wrote {report_path}")
    for f in figures:
        print(f"  wrote {f}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="thermoac",
        description="Desk-scale simulator for a singular phase-field system with pointwise temperature",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="validate, run the continuation, write snapshots and manifest")
    p.add_argument("config", help="flat key = value config file")

    p = sub.add_parser("validate", help="check the configured initial data, print named conditions")
    p.add_argument("config")

    p = sub.add_parser("make-init", help="synthesize a compatible initial snapshot and write it")
    p.add_argument("config")
    p.add_argument("--out", help="output file (default: <output.dir>/initial.csv)")

    p = sub.add_parser("report", help="summarize a run directory into report.csv and figures")
    p.add_argument("rundir")

    args = parser.parse_args(argv)
    handler = {
        "run": _cmd_run,
        "validate": _cmd_validate,
        "make-init": _cmd_make_init,
        "report": _cmd_report,
    }[args.command]
    try:
        return handler(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ThermoacError as exc:
        print(f"solver failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
