"""Command-line parsing, dispatch, output files and determinism."""
from __future__ import annotations

import json
import subprocess
import sys

import pytest

from bpagame import cli
from bpagame.analysis import fixed_point
from bpagame.model import MixingMatrix


def run_main(argv, capsys):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_solve_prints_record(capsys):
    code, out, _ = run_main(["solve", "--r", "0.3", "--rho-r", "0.7", "--rho-b", "0.4"], capsys)
    assert code == 0
    rec = json.loads(out)
    assert set(rec) == {"r", "rho_r", "rho_b", "alpha", "residual", "certified_unique",
                        "cut_fraction"}
    assert rec["alpha"] == fixed_point(0.3, MixingMatrix(0.7, 0.4)).alpha
    assert rec["certified_unique"] is True


def test_validation_errors_one_line_each(capsys):
    code, out, err = run_main(["solve", "--r", "1.5", "--rho-r", "2", "--rho-b", "x"], capsys)
    assert code == cli.EXIT_VALIDATION
    lines = err.strip().splitlines()
    assert len(lines) == 3
    assert all(line.startswith("bpagame: error: ") for line in lines)
    assert out == ""


def test_missing_required(capsys):
    code, _, err = run_main(["game", "--r", "0.3"], capsys)
    assert code == cli.EXIT_VALIDATION and "gamma" in err


def test_profile_conflict(capsys):
    code, _, err = run_main(["solve", "--r", "0.3", "--profile", "homophily", "--rho-r", "0.2"],
                            capsys)
    assert code == cli.EXIT_VALIDATION and "conflicts" in err
    code, _, _ = run_main(["solve", "--r", "0.3", "--profile", "sideways"], capsys)
    assert code == cli.EXIT_VALIDATION


def test_flags_override_config(tmp_path):
    cfg = tmp_path / "run.ini"
    cfg.write_text("[bpagame]\nr = 0.2\nprofile = heterophily\nseed = 4\n")
    desc = cli.parse_config(["urn", "--config", str(cfg), "--r", "0.6"])
    assert desc.params["r"] == 0.6
    assert (desc.params["rho_r"], desc.params["rho_b"]) == (0.0, 0.0)
    assert desc.params["seed"] == 4
    desc = cli.parse_config(["urn", "--config", str(cfg), "--profile", "unbiased"])
    assert (desc.params["rho_r"], desc.params["rho_b"]) == (0.5, 0.5)


def test_unknown_config_key(tmp_path, capsys):
    cfg = tmp_path / "run.ini"
    cfg.write_text("[bpagame]\nr = 0.2\nprofile = heterophily\nbogus = 1\n")
    code, _, err = run_main(["solve", "--config", str(cfg)], capsys)
    assert code == cli.EXIT_VALIDATION and "bogus" in err


@pytest.mark.parametrize("argv", [
    ["simulate", "--r", "0.3", "--rho-r", "0.7", "--rho-b", "0.4", "--n", "500", "--seed", "3",
     "--mode", "rejection"],
    ["urn", "--r", "0.3", "--profile", "unbiased", "--horizon", "500", "--seed", "3"],
    ["urn", "--r", "0.3", "--profile", "unbiased", "--horizon", "500", "--trials", "5"],
])
def test_manifest_round_trip_and_determinism(argv, tmp_path, capsys):
    first, second = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run_main(argv + ["--csv", str(first)], capsys)[0] == 0
    desc = cli.parse_config(argv)
    replay = cli.parse_config([argv[0], "--config", str(first)])
    assert replay.params == desc.params
    assert run_main([argv[0], "--config", str(first), "--csv", str(second)], capsys)[0] == 0
    assert first.read_bytes() == second.read_bytes()


def test_simulate_outputs(tmp_path, capsys):
    argv = ["simulate", "--n", "200", "--r", "0.3", "--profile", "homophily", "--seed", "1",
            "--dot", str(tmp_path / "g.dot"), "--edges", str(tmp_path / "g.txt"),
            "--csv", str(tmp_path / "g.csv")]
    code, out, _ = run_main(argv, capsys)
    assert code == 0
    summary = json.loads(out)
    assert summary["cut_count"] == 1 and summary["n_vertices"] == 202
    assert "duration_s" in summary
    csv_lines = (tmp_path / "g.csv").read_text().splitlines()
    header = [line for line in csv_lines if not line.startswith("#")]
    assert header[0] == "t,alpha,cut_fraction" and len(header) == 202
    assert "duration" not in (tmp_path / "g.csv").read_text()
    edges = [line.split() for line in (tmp_path / "g.txt").read_text().splitlines()
             if not line.startswith("#")]
    assert len(edges) == 201
    assert sum(1 for _, _, a, b in edges if a != b) == 1
    dot = (tmp_path / "g.dot").read_text()
    assert dot.count("fillcolor=red") + dot.count("fillcolor=blue") == 202
    assert dot.count(" -- ") == 201
    # edge list and DOT manifests are valid configs too
    replay = cli.parse_config(["simulate", "--config", str(tmp_path / "g.txt")])
    assert replay.params == cli.parse_config(argv).params


def test_output_dir_from_environment(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv(cli.OUTPUT_DIR_ENV, str(tmp_path / "out"))
    code, _, _ = run_main(["urn", "--r", "0.3", "--profile", "unbiased", "--horizon", "10"],
                          capsys)
    assert code == 0 and (tmp_path / "out" / "urn.csv").exists()


def test_trial_results_independent_of_jobs(tmp_path, capsys):
    base = ["urn", "--r", "0.3", "--rho-r", "0.7", "--rho-b", "0.4", "--horizon", "2000",
            "--trials", "8", "--seed", "10"]
    assert run_main(base + ["--jobs", "1", "--csv", str(tmp_path / "1.csv")], capsys)[0] == 0
    assert run_main(base + ["--jobs", "3", "--csv", str(tmp_path / "3.csv")], capsys)[0] == 0
    assert (tmp_path / "1.csv").read_bytes() == (tmp_path / "3.csv").read_bytes()


def test_game_report_and_table(tmp_path, capsys):
    code, out, _ = run_main(["game", "--gamma", "0.7", "--r", "0.3", "--grid", "10",
                             "--br-csv", str(tmp_path / "br.csv")], capsys)
    assert code == 0
    report = json.loads(out)
    assert report["equilibria"] == [{"rho_r": 1.0, "rho_b": 1.0, "classification": "stable"}]
    rows = [line for line in (tmp_path / "br.csv").read_text().splitlines()
            if not line.startswith("#")]
    assert rows[0].startswith("responder,opponent_rho,u_0.0")
    assert len(rows) == 1 + 2 * 11


def test_validate_reads_manifest(tmp_path, capsys):
    csv = tmp_path / "a.csv"
    run_main(["urn", "--r", "0.3", "--profile", "unbiased", "--horizon", "5",
              "--csv", str(csv)], capsys)
    code, out, _ = run_main(["validate", "--config", str(csv)], capsys)
    assert code == 0 and json.loads(out)["subcommand"] == "urn"
    csv.write_text(csv.read_text().replace("r = 0.3", "r = 3"))
    code, _, err = run_main(["validate", "--config", str(csv)], capsys)
    assert code == cli.EXIT_VALIDATION and err.count("\n") == 1


def test_simulation_abort_exit_code(capsys):
    # one restart allowed; at t=1 of an unbiased run half the proposals restart
    codes = {run_main(["simulate", "--r", "0.5", "--profile", "unbiased", "--n", "2000",
                       "--mode", "rejection", "--cap", "1", "--seed", str(s),
                       "--csv", "/dev/null"], capsys)[0] for s in range(3)}
    assert codes == {cli.EXIT_SIMULATION}


def test_solver_inconsistency_exit_code(monkeypatch, capsys):
    from bpagame.analysis import SolverInconsistency

    def broken(*_):
        raise SolverInconsistency("bracket lost")

    monkeypatch.setattr(cli, "fixed_point", broken)
    code, _, err = run_main(["solve", "--r", "0.3", "--rho-r", "0.7", "--rho-b", "0.4"], capsys)
    assert code == cli.EXIT_SOLVER and "bracket lost" in err


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "bpagame", "solve", "--r", "0.3",
                           "--profile", "homophily"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["alpha"] == 0.3
