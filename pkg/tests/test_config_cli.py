"""Tests of the config parser and the command-line front end."""

import json
import os

import numpy as np
import pytest

from sheathsim import cli, pipelines
from sheathsim.config import ConfigError, RunConfig, load_config, parse_config
from sheathsim.errors import SolverError


def findings(text, default_mode=None):
    with pytest.raises(ConfigError) as info:
        parse_config(text, default_mode=default_mode)
    return info.value.errors


def test_minimal_config_uses_defaults():
    cfg = parse_config("mode = profile")
    assert cfg.mode == "profile"
    assert cfg.ion_temp == 1.0
    assert cfg.epsilon == 0.02
    assert cfg.bc == "wall"
    assert cfg.center == 0.5  # derived from domain_length
    assert cfg.width == 0.1
    assert cfg.output_dir == "."


def test_default_mode_comes_from_subcommand():
    cfg = parse_config("t_end = 0.1", default_mode="limit")
    assert cfg.mode == "limit"
    assert cfg.t_end == 0.1


def test_mode_required_without_default():
    assert "mode: required" in findings("ion_temp = 1.0")


def test_all_problems_reported_with_line_numbers():
    text = "\n".join([
        "mode = simulate",
        "epsilon = 1.5",
        "junk line",
        "color = red",
        "epsilon = 0.1",
        "cfl = nope",
    ])
    got = findings(text)
    assert "line 2: epsilon: must be in (0,1]" in got
    assert "line 3: expected key = value" in got
    assert "line 4: unknown key 'color'" in got
    assert "line 5: duplicate key 'epsilon'" in got
    assert "line 6: cfl: cannot parse 'nope'" in got


def test_comments_and_blank_lines_ignored():
    cfg = parse_config("# a comment\n\nmode = profile  # trailing\n")
    assert cfg.mode == "profile"


def test_eps_list_rules():
    assert "eps_list: required when mode = converge" in findings(
        "mode = converge")
    cfg = parse_config("mode = converge\neps_list = 0.04, 0.02, 0.01")
    assert cfg.eps_list == [0.04, 0.02, 0.01]
    got = findings("mode = converge\neps_list = 0.04 0.04 0.01")
    assert any("strictly decreasing" in f for f in got)
    got = findings("mode = converge\neps_list = 0.04 0.02")
    assert any("at least 3 entries" in f for f in got)
    got = findings("mode = converge\neps_list = 0.06 0.02 0.01")
    assert any("domain_length >= 20*epsilon" in f for f in got)
    got = findings("mode = converge\neps_list = 0.04 -0.02 0.01")
    assert any("entries must be positive" in f for f in got)


def test_preset_must_vanish_at_both_ends():
    got = findings("mode = limit\npreset = bump\ncenter = 0.2\nwidth = 0.1")
    assert any("vanish at the wall" in f for f in got)
    got = findings("mode = limit\npreset = pulse\ncenter = 0.85\nwidth = 0.06")
    assert any("vanish at the far end" in f for f in got)
    cfg = parse_config("mode = limit\npreset = flat\ncenter = 0.2\nwidth = 0.1")
    assert cfg.preset == "flat"


def test_outflow_speed_windows():
    base = "mode = {}\nbc = outflow\nu_b = {}\n"
    got = findings(base.format("limit", "-1.5"))
    assert any("sqrt(ion_temp + 1)" in f for f in got)
    cfg = parse_config(base.format("limit", "-1.2"))
    assert cfg.boundary_mode().kind == "outflow"
    got = findings(base.format("simulate", "-1.2"))
    assert any("sqrt(ion_temp)" in f for f in got)
    got = findings(base.format("limit", "0.1"))
    assert any("must be negative" in f for f in got)
    got = findings("mode = converge\nbc = outflow\neps_list = 0.04 0.02 0.01")
    assert any("requires the wall boundary" in f for f in got)


def test_simulate_needs_room_for_the_layer():
    got = findings("mode = simulate\nepsilon = 0.06")
    assert any("domain_length >= 20*epsilon" in f for f in got)
    parse_config("mode = simulate\nepsilon = 0.05")


def test_output_dir_parent_must_exist(tmp_path):
    missing = tmp_path / "no" / "such" / "dir"
    got = findings(f"mode = profile\noutput_dir = {missing}")
    assert any("parent directory does not exist" in f for f in got)


def test_config_helpers_build_grids_and_states():
    cfg = parse_config("mode = simulate\nepsilon = 0.05\npreset = pulse\n"
                       "amplitude = 0.2")
    grid = cfg.full_grid()
    assert abs(grid.widths[0] - 0.05 / 24.0) <= 1e-15
    state = cfg.initial_state(grid)
    assert np.all(state.n == 1.0)
    assert state.u.min() >= -0.2
    assert state.u.max() <= 0.0
    flat = parse_config("mode = limit\npreset = flat")
    state = flat.initial_state(flat.limit_grid())
    assert np.all(state.n == 1.0)
    assert np.all(state.u == 0.0)
    bump = parse_config("mode = limit\npreset = bump\namplitude = 0.3")
    state = bump.initial_state(bump.limit_grid())
    assert abs(state.n.max() - 1.3) <= 1e-3
    assert np.all(state.u == 0.0)


def test_load_config_reads_file(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("mode = profile\ngamma = 2.0\n")
    cfg = load_config(str(path))
    assert cfg.gamma == 2.0


def write_cfg(tmp_path, text, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def test_cli_profile_round_trip(tmp_path, capsys):
    cfg = write_cfg(tmp_path, "mode = profile\nwall_value = 0.8\n"
                              "layer_nodes = 513\n")
    out = tmp_path / "out"
    rc = cli.main(["profile", "--config", cfg, "--output", str(out),
                   "--seed-free"])
    captured = capsys.readouterr()
    assert rc == 0
    assert captured.out.startswith("profile: ")
    assert "decay_rate=" in captured.out
    assert (out / "profile.csv").exists()
    meta = json.loads((out / "profile_meta.json").read_text())
    assert meta["wall_value"] == 0.8
    assert meta["decay_rate"] > 0.0


def test_cli_limit_reruns_are_byte_identical(tmp_path, capsys):
    cfg = write_cfg(tmp_path, "mode = limit\nlimit_cells = 64\n"
                              "t_end = 0.05\nsamples = 3\n")
    out_a = tmp_path / "a"
    out_b = tmp_path / "b"
    assert cli.main(["limit", "--config", cfg, "--output", str(out_a)]) == 0
    assert cli.main(["limit", "--config", cfg, "--output", str(out_b)]) == 0
    capsys.readouterr()
    names = sorted(p.name for p in out_a.iterdir())
    assert "limit_000.csv" in names and "mass.csv" in names
    for name in names:
        assert (out_a / name).read_bytes() == (out_b / name).read_bytes()


def test_cli_simulate_smoke(tmp_path, capsys):
    cfg = write_cfg(tmp_path, "mode = simulate\nepsilon = 0.05\n"
                              "interior_cells = 32\nt_end = 0.02\n"
                              "samples = 3\nlimit_cells = 64\n")
    out = tmp_path / "out"
    rc = cli.main(["simulate", "--config", cfg, "--output", str(out)])
    captured = capsys.readouterr()
    assert rc == 0
    assert "energy_drift=" in captured.out
    for name in ("snapshot_000.csv", "snapshot_002.csv", "energy.csv",
                 "mass_steps.csv", "simulate_meta.json"):
        assert (out / name).exists()


def test_cli_missing_config_file(tmp_path, capsys):
    rc = cli.main(["limit", "--config", str(tmp_path / "absent.cfg")])
    captured = capsys.readouterr()
    assert rc == 1
    assert "config error: cannot read" in captured.err


def test_cli_reports_every_finding(tmp_path, capsys):
    cfg = write_cfg(tmp_path, "mode = simulate\nepsilon = 2.0\ncfl = 7\n")
    rc = cli.main(["simulate", "--config", cfg])
    captured = capsys.readouterr()
    assert rc == 1
    lines = [l for l in captured.err.splitlines() if l]
    assert len(lines) >= 2
    assert all(l.startswith("config error: ") for l in lines)


def test_cli_mode_mismatch(tmp_path, capsys):
    cfg = write_cfg(tmp_path, "mode = limit\n")
    rc = cli.main(["profile", "--config", cfg])
    captured = capsys.readouterr()
    assert rc == 1
    assert "config says 'limit'" in captured.err


def test_cli_solver_failure_exit_code(tmp_path, capsys, monkeypatch):
    def explode(cfg, outdir):
        raise SolverError("synthetic blow-up")

    monkeypatch.setattr(pipelines, "run_profile_pipeline", explode)
    cfg = write_cfg(tmp_path, "mode = profile\n")
    rc = cli.main(["profile", "--config", cfg])
    captured = capsys.readouterr()
    assert rc == 2
    assert "solver failure: profile: SolverError: synthetic blow-up" \
        in captured.err


def test_cli_converge_smoke(tmp_path, capsys):
    cfg = write_cfg(tmp_path, "mode = converge\neps_list = 0.05 0.04 0.03\n"
                              "limit_cells = 64\ninterior_cells = 32\n"
                              "t_end = 0.03\nsamples = 3\nlayer_nodes = 257\n")
    out = tmp_path / "out"
    rc = cli.main(["converge", "--config", cfg, "--output", str(out),
                   "--jobs", "1"])
    captured = capsys.readouterr()
    assert rc == 0
    assert "l2_n_slope=" in captured.out
    for name in ("study.csv", "fits.csv", "study_meta.json"):
        assert (out / name).exists()
    with open(out / "study.csv") as fh:
        header = fh.readline().strip().split(",")
    assert header[0] == "epsilon"


def test_cli_rejects_nonpositive_jobs():
    with pytest.raises(SystemExit):
        cli.main(["converge", "--config", "x.cfg", "--jobs", "0"])


def test_run_config_dataclass_defaults():
    cfg = RunConfig(mode="profile")
    assert cfg.limit_cells == 512
    assert cfg.layer_nodes == 4097
    assert cfg.boundary_mode().kind == "wall"
