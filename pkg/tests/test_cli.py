"""Command line interface: config resolution, outputs, manifests, exit codes."""

import hashlib
import json

import pytest

from randbc.cli import REGISTRY, resolve_config, run


def sha256(path):
    return hashlib.sha256(path.read_bytes()).hexdigest()


def manifest(outdir):
    return json.loads((outdir / "manifest.json").read_text())


def test_registry_covers_the_documented_keys():
    for key in ("grid.n", "omega_prime.lo", "omega_prime.hi", "coeff.a",
                "coeff.q", "solver.rtol", "solver.maxiter", "bc.family",
                "bc.K", "bc.sigma.c", "bc.sigma.s", "seed", "threads"):
        assert key in REGISTRY


def test_config_precedence_defaults_file_overrides(tmp_path):
    cfgfile = tmp_path / "run.cfg"
    cfgfile.write_text("# comment line\ngrid.n = 21\nseed = 4\n")
    cfg = resolve_config("solve", str(cfgfile), {"grid.n": "25"})
    assert cfg["grid.n"] == 25
    assert cfg["seed"] == 4
    assert cfg["bc.family"] == "gaussian"


def test_unknown_keys_are_rejected_with_the_valid_key_list(tmp_path, capsys):
    rc = run(["solve", "--out", str(tmp_path / "o"), "--set", "no.such.key=1"])
    assert rc == 2
    err = capsys.readouterr().err
    assert "no.such.key" in err
    assert "grid.n" in err


def test_bad_value_exits_with_the_config_code(tmp_path, capsys):
    rc = run(["solve", "--out", str(tmp_path / "o"), "--set", "grid.n=banana"])
    assert rc == 2
    assert "grid.n" in capsys.readouterr().err


def test_solver_failure_exits_with_the_runtime_code(tmp_path, capsys):
    out = tmp_path / "o"
    rc = run(["solve", "--out", str(out), "--set", "grid.n=65",
              "--set", "solver.maxiter=2", "--set", "solver.rtol=1e-14"])
    assert rc == 1
    assert "residual" in capsys.readouterr().err
    # failed runs leave no partial outputs behind
    assert not out.exists()


def test_solve_writes_solution_and_manifest(tmp_path):
    out = tmp_path / "solve"
    rc = run(["solve", "--out", str(out), "--set", "grid.n=17", "--seed", "3"])
    assert rc == 0
    m = manifest(out)
    assert m["command"] == "solve"
    assert m["config"]["grid.n"] == "17"
    assert m["outputs"]["solution.csv"] == "sha256:" + sha256(out / "solution.csv")


def test_sample_writes_draws_and_norms(tmp_path):
    out = tmp_path / "sample"
    rc = run(["sample", "--out", str(out), "--set", "sample.count=3",
              "--set", "bc.K=9", "--seed", "1"])
    assert rc == 0
    assert (out / "samples.csv").exists()
    assert (out / "sample_norms.csv").exists()


def test_experiment_rerun_from_manifest_is_byte_identical(tmp_path):
    base = tmp_path / "exp"
    args = ["constraint-experiment", "--set", "grid.n=17", "--set", "bc.K=9",
            "--set", "N_list=1,2", "--set", "M=50", "--seed", "6"]
    assert run(args + ["--out", str(base)]) == 0
    rerun = tmp_path / "rerun"
    assert run(["constraint-experiment", "--config", str(base / "manifest.json"),
                "--out", str(rerun), "--threads", "2"]) == 0
    for name in ("success_curve.csv", "cover_summary.csv", "cover_field.csv"):
        assert (base / name).read_bytes() == (rerun / name).read_bytes()
    assert manifest(base)["outputs"] == manifest(rerun)["outputs"]
    lines = (base / "cover_field.csv").read_text().splitlines()
    assert lines[0] == "x,y,value,label"
    assert len(lines) > 1
    labels = {int(row.rsplit(",", 1)[1]) for row in lines[1:]}
    assert labels <= {1, 2}


def test_worker_env_fallback_matches_serial_run(tmp_path, monkeypatch):
    serial = tmp_path / "serial"
    args = ["constraint-experiment", "--set", "grid.n=17", "--set", "bc.K=9",
            "--set", "N_list=1,2", "--set", "M=50", "--seed", "6"]
    assert run(args + ["--out", str(serial), "--threads", "1"]) == 0
    monkeypatch.setenv("RANDBC_THREADS", "3")
    enviro = tmp_path / "env"
    assert run(args + ["--out", str(enviro), "--threads", "0"]) == 0
    assert manifest(serial)["outputs"] == manifest(enviro)["outputs"]


def test_variance_check_outputs(tmp_path):
    out = tmp_path / "var"
    rc = run(["variance-check", "--out", str(out), "--set", "grid.n=17",
              "--set", "bc.K=9", "--set", "M=300"])
    assert rc == 0
    header = (out / "variance_check.csv").read_text().splitlines()[0]
    assert header == "x,y,mc,series,z"


def test_tail_check_outputs(tmp_path):
    out = tmp_path / "tail"
    rc = run(["tail-check", "--out", str(out), "--set", "M=1000",
              "--set", "bc.K=9", "--set", "bc.family=rademacher"])
    assert rc == 0
    assert (out / "tail_curve.csv").exists()
    assert (out / "tail_summary.csv").exists()


def test_runge_curve_outputs(tmp_path):
    out = tmp_path / "runge"
    rc = run(["runge", "--out", str(out), "--set", "grid.n=33",
              "--set", "bc.K=9", "--set", "runge.target=fundamental_solution",
              "--set", "runge.lambdas=1e-2,1e-4,1e-6"])
    assert rc == 0
    lines = (out / "runge_curve.csv").read_text().splitlines()
    assert lines[0] == "lambda,eps,boundary_cost"
    assert len(lines) == 4


def test_qpat_command_round_trip(tmp_path):
    out = tmp_path / "qpat"
    rc = run(["qpat", "--out", str(out), "--set", "grid.n=33"])
    assert rc == 0
    assert (out / "mu_hat.csv").exists()
    assert (out / "qpat_metrics.csv").exists()


def test_conductivity_command_round_trip(tmp_path):
    out = tmp_path / "cond"
    rc = run(["conductivity", "--out", str(out), "--set", "grid.n=33"])
    assert rc == 0
    assert (out / "log_a_hat.csv").exists()
    assert (out / "conductivity_metrics.csv").exists()


def test_malformed_field_expression_is_a_config_error(tmp_path, capsys):
    rc = run(["solve", "--out", str(tmp_path / "o"),
              "--set", "coeff.a=import os"])
    assert rc == 2
    assert "coeff.a" in capsys.readouterr().err


def test_existing_output_directory_with_files_is_refused(tmp_path, capsys):
    out = tmp_path / "busy"
    out.mkdir()
    (out / "leftover.txt").write_text("x")
    rc = run(["solve", "--out", str(out), "--set", "grid.n=17"])
    assert rc == 2
