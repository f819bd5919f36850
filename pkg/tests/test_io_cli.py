"""Flat config parsing, delimited snapshots, and the four CLI commands."""

import numpy as np
import pytest

import thermoac as ta
from thermoac.cli import main as cli_main
from thermoac.config import parse_flat_text, run_config_from_raw
from thermoac.snapshots import (
    list_snapshots,
    parse_snapshot_name,
    read_field_csv,
    read_manifest,
    read_snapshot,
    snapshot_name,
    write_field_csv,
    write_manifest,
    write_snapshot,
)

P11 = ta.ModelParams(c0=1.0, cv=1.0)


def _config_text(outdir, **overrides):
    base = {
        "model.c0": "1.0",
        "model.cv": "1.0",
        "grid.dim": "1",
        "grid.n": "33",
        "driver.dt": "5e-4",
        "driver.T_init": "0.02",
        "driver.horizon": "0.04",
        "driver.outer_tol": "1e-8",
        "source.sigma_bar": "0.1",
        "output.dir": str(outdir),
        "output.stride": "20",
    }
    base.update(overrides)
    return "\n".join(f"{k} = {v}" for k, v in base.items()) + "\n"


# ---------------------------------------------------------------- config


def test_parse_flat_text_strips_comments_and_blanks():
    raw = parse_flat_text("# top\n\na.b = 1  # trailing\n  c.d = x = y\n")
    assert raw == {"a.b": "1", "c.d": "x = y"}


def test_parse_flat_text_rejects_bad_lines():
    with pytest.raises(ValueError, match="line 1"):
        parse_flat_text("no equals sign here")
    with pytest.raises(ValueError, match="duplicate"):
        parse_flat_text("a = 1\na = 2\n")
    with pytest.raises(ValueError, match="empty key"):
        parse_flat_text(" = 3\n")


def test_unknown_and_missing_keys_are_rejected():
    raw = parse_flat_text(_config_text("out"))
    run_config_from_raw(dict(raw))
    with pytest.raises(ValueError, match="unknown config keys: driver.bogus"):
        run_config_from_raw({**raw, "driver.bogus": "1"})
    short = {k: v for k, v in raw.items() if k != "model.cv"}
    with pytest.raises(ValueError, match="missing required config keys: model.cv"):
        run_config_from_raw(short)


def test_config_value_validation():
    raw = parse_flat_text(_config_text("out"))
    with pytest.raises(ValueError, match="not a number"):
        run_config_from_raw({**raw, "driver.dt": "fast"})
    with pytest.raises(ValueError, match="init.mode"):
        run_config_from_raw({**raw, "init.mode": "guess"})
    with pytest.raises(ValueError, match="theta_frac"):
        run_config_from_raw({**raw, "init.theta_frac": "1.5"})
    with pytest.raises(ValueError, match="stride"):
        run_config_from_raw({**raw, "output.stride": "0"})


def test_canonical_run_config_is_pinned():
    cfg = ta.canonical_run_config()
    assert cfg.grid == ta.Grid(dim=1, n=129)
    assert cfg.driver.dt == 2.5e-4
    assert cfg.driver.T_init == 0.1
    assert cfg.horizon == 0.3
    assert cfg.driver.outer_tol == 1e-8
    assert cfg.sigma_bar_spec == "0.1"
    assert cfg.theta_frac == 0.5
    assert cfg.stride == 40
    assert cfg.init_mode == "synthesize"
    assert cfg.params.c0 == 1.0 and cfg.params.cv == 1.0


def test_config_hash_ignores_insertion_order():
    raw = parse_flat_text(_config_text("out"))
    reordered = dict(reversed(list(raw.items())))
    assert ta.config_hash(raw) == ta.config_hash(reordered)
    assert ta.config_hash({**raw, "grid.n": "65"}) != ta.config_hash(raw)
    assert len(ta.config_hash(raw)) == 64


# ------------------------------------------------------------- snapshots


def _admissible_state(dim, n):
    grid = ta.Grid(dim=dim, n=n)
    triple = ta.synthesize(ta.default_rho0_profile(grid), 0.4, P11)
    return ta.SystemState(triple.rho0, triple.xi0, triple.theta0)


@pytest.mark.parametrize("dim,n", [(1, 9), (2, 5)])
def test_snapshot_round_trip_is_bit_exact(tmp_path, dim, n):
    state = _admissible_state(dim, n)
    path = write_snapshot(tmp_path / "snap.csv", state, P11)
    grid, fields = read_snapshot(path)
    assert grid == state.grid
    assert np.array_equal(fields["rho"], state.rho.values)
    assert np.array_equal(fields["xi"], state.xi.values)
    assert np.array_equal(fields["theta"], state.theta.values)
    assert np.array_equal(fields["mu"], state.mu().values)
    assert np.array_equal(
        fields["margin"],
        ta.pointwise_margin(state.rho.values, state.xi.values, P11),
    )


def test_snapshot_requires_core_columns(tmp_path):
    grid = ta.Grid(dim=1, n=9)
    write_field_csv(tmp_path / "only_rho.csv", ta.constant_field(grid, 0.5), name="rho")
    with pytest.raises(ValueError, match="missing column"):
        read_snapshot(tmp_path / "only_rho.csv")


def test_field_csv_round_trip_and_column_discipline(tmp_path):
    grid = ta.Grid(dim=1, n=17)
    (x,) = grid.coords()
    field = ta.ScalarField(grid, 0.4 + 0.1 * np.cos(np.pi * x))
    path = write_field_csv(tmp_path / "f.csv", field, name="rho0")
    back = read_field_csv(path)
    assert back.grid == grid
    assert np.array_equal(back.values, field.values)
    # a five-field snapshot is not a single-column field file
    state = _admissible_state(1, 9)
    snap = write_snapshot(tmp_path / "s.csv", state, P11)
    with pytest.raises(ValueError, match="exactly one value column"):
        read_field_csv(snap)


def test_nonuniform_coordinates_are_rejected(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("x,value\n0,1\n0.3,1\n1,1\n")
    with pytest.raises(ValueError, match="uniform"):
        read_field_csv(bad)


def test_manifest_round_trip_formats(tmp_path):
    path = write_manifest(
        tmp_path / "manifest.txt",
        {"a": 3, "b": 0.1, "c": True, "d": "Converged", "e": np.int64(7)},
    )
    back = read_manifest(path)
    assert back["a"] == "3"
    assert float(back["b"]) == 0.1
    assert back["c"] == "true"
    assert back["d"] == "Converged"
    assert back["e"] == "7"


def test_snapshot_names_parse_back():
    for idx, t in ((0, 0.0), (40, 0.02), (1200, 0.3), (7, 1.75e-3)):
        name = snapshot_name(idx, t)
        got_idx, got_t = parse_snapshot_name(name)
        assert got_idx == idx
        assert got_t == float(f"{t:.10g}")
    with pytest.raises(ValueError):
        parse_snapshot_name("x_000001_0.1.csv")


def test_list_snapshots_sorts_and_skips_junk(tmp_path):
    state = _admissible_state(1, 9)
    write_snapshot(tmp_path / snapshot_name(20, 0.5), state, P11)
    write_snapshot(tmp_path / snapshot_name(3, 0.075), state, P11)
    (tmp_path / "t_junk.csv").write_text("not,a,snapshot\n")
    (tmp_path / "report.csv").write_text("also,not\n")
    found = list_snapshots(tmp_path)
    assert [(idx, t) for idx, t, _ in found] == [(3, 0.075), (20, 0.5)]


# ------------------------------------------------------------------ cli


@pytest.fixture(scope="module")
def small_run(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli_small")
    cfgfile = root / "small.cfg"
    cfgfile.write_text(_config_text(root / "out"))
    assert cli_main(["run", str(cfgfile)]) == 0
    return root, cfgfile


def test_run_writes_stride_snapshots_and_manifest(small_run):
    root, cfgfile = small_run
    out = root / "out"
    snaps = list_snapshots(out)
    assert [idx for idx, _, _ in snaps] == [0, 20, 40, 60, 80]
    manifest = read_manifest(out / "manifest.txt")
    assert manifest["status"] == "Converged"
    assert manifest["snapshots"] == "5"
    assert manifest["steps"] == "80"
    assert manifest["windows"] == "2"
    assert manifest["config.grid.n"] == "33"
    assert manifest["version"] == ta.__version__
    assert len(manifest["config_hash"]) == 64
    assert float(manifest["elapsed_seconds"]) > 0.0
    assert "T" in manifest["created"]  # ISO timestamp


def test_run_snapshots_match_a_library_run(small_run):
    root, cfgfile = small_run
    cfg = ta.load_run_config(cfgfile)
    triple = ta.synthesize(ta.default_rho0_profile(cfg.grid), cfg.theta_frac, cfg.params)
    state0 = ta.SystemState(triple.rho0, triple.xi0, triple.theta0)
    res = ta.continue_in_time(
        state0, cfg.driver, cfg.params, cfg.horizon, float(cfg.sigma_bar_spec)
    )
    for idx, _, path in list_snapshots(root / "out"):
        _, fields = read_snapshot(path)
        assert np.array_equal(fields["rho"], res.trajectory.rho[idx])
        assert np.array_equal(fields["xi"], res.trajectory.xi[idx])
        assert np.array_equal(fields["theta"], res.trajectory.theta[idx])


def test_report_builds_csv_and_figures(small_run, capsys):
    root, _ = small_run
    out = root / "out"
    assert cli_main(["report", str(out)]) == 0
    lines = (out / "report.csv").read_text().splitlines()
    assert len(lines) == 6
    header = lines[0].split(",")
    assert header[:2] == ["index", "time"]
    assert "margin_min" in header and "residual_max" in header
    resid_col = header.index("residual_max")
    assert all(float(ln.split(",")[resid_col]) <= 1e-10 for ln in lines[1:])
    for name in ("state_initial.png", "state_final.png", "history.png"):
        fig = out / "figures" / name
        assert fig.exists() and fig.stat().st_size > 1000
    stdout = capsys.readouterr().out
    assert "run status Converged" in stdout
    assert "report.csv" in stdout


def test_validate_command_reports_conditions(tmp_path, capsys):
    good = tmp_path / "good.cfg"
    good.write_text(_config_text(tmp_path / "o1"))
    assert cli_main(["validate", str(good)]) == 0
    stdout = capsys.readouterr().out
    assert "PASS  compatibility" in stdout
    assert "initial data admissible" in stdout

    bad = tmp_path / "bad.cfg"
    bad.write_text(_config_text(tmp_path / "o2", **{"init.theta_frac": "0.0"}))
    assert cli_main(["validate", str(bad)]) == 1
    stdout = capsys.readouterr().out
    assert "FAIL  strict_margin" in stdout
    assert "initial data rejected" in stdout


def test_make_init_then_files_mode_run(tmp_path, capsys):
    synth = tmp_path / "synth.cfg"
    synth.write_text(_config_text(tmp_path / "o1"))
    init_file = tmp_path / "initial.csv"
    assert cli_main(["make-init", str(synth), "--out", str(init_file)]) == 0
    assert init_file.exists()

    files_cfg = tmp_path / "files.cfg"
    files_cfg.write_text(
        _config_text(
            tmp_path / "o2",
            **{"init.mode": "files", "init.rho0_file": str(init_file)},
        )
    )
    assert cli_main(["run", str(files_cfg)]) == 0
    stdout = capsys.readouterr().out
    assert "status Converged" in stdout
    assert (tmp_path / "o2" / "manifest.txt").exists()


def test_tampered_init_file_is_rejected(tmp_path, capsys):
    synth = tmp_path / "synth.cfg"
    synth.write_text(_config_text(tmp_path / "o1"))
    init_file = tmp_path / "initial.csv"
    assert cli_main(["make-init", str(synth), "--out", str(init_file)]) == 0
    grid, fields = read_snapshot(init_file)
    tampered = ta.SystemState(
        ta.ScalarField(grid, fields["rho"]),
        ta.ScalarField(grid, 25.0 * fields["xi"]),
        ta.ScalarField(grid, fields["theta"]),
    )
    write_snapshot(init_file, tampered, P11)

    files_cfg = tmp_path / "files.cfg"
    files_cfg.write_text(
        _config_text(
            tmp_path / "o2",
            **{"init.mode": "files", "init.rho0_file": str(init_file)},
        )
    )
    capsys.readouterr()
    assert cli_main(["run", str(files_cfg)]) == 1
    stdout = capsys.readouterr().out
    assert "FAIL  necessary_margin" in stdout
    assert "run aborted" in stdout
    assert not (tmp_path / "o2" / "manifest.txt").exists()


def test_make_init_requires_synthesize_mode(tmp_path, capsys):
    cfg = tmp_path / "files.cfg"
    cfg.write_text(
        _config_text(tmp_path / "o", **{"init.mode": "files", "init.rho0_file": "x.csv"})
    )
    assert cli_main(["make-init", str(cfg)]) == 2
    assert "make-init needs init.mode = synthesize" in capsys.readouterr().err


def test_underflow_run_exits_3(tmp_path, capsys):
    cfg = tmp_path / "stall.cfg"
    cfg.write_text(_config_text(tmp_path / "o", **{"driver.M_cap": "1e-9"}))
    assert cli_main(["run", str(cfg)]) == 3
    stdout = capsys.readouterr().out
    assert "status WindowUnderflow" in stdout


def test_config_errors_exit_2(tmp_path, capsys):
    cfg = tmp_path / "typo.cfg"
    cfg.write_text(_config_text(tmp_path / "o") + "driver.bogus = 1\n")
    assert cli_main(["run", str(cfg)]) == 2
    assert "unknown config keys" in capsys.readouterr().err

    assert cli_main(["run", str(tmp_path / "nope.cfg")]) == 2
    assert "error:" in capsys.readouterr().err


def test_report_on_empty_directory_exits_2(tmp_path, capsys):
    assert cli_main(["report", str(tmp_path)]) == 2
    assert "not a run directory" in capsys.readouterr().err
