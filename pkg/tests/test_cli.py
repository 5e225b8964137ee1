"""Command line behavior: parsing, exit codes, file side effects."""

import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from igabench import ProblemInstance, load_instance, save_instance
from igabench.cli import CliInvocation, main, parse_invocation


def _generate(tmp_path, name="inst.json", **overrides):
    args = {
        "--m": "16",
        "--n": "32",
        "--rho": "0.15",
        "--snr-db": "25",
        "--kappa": "0.05",
        "--seed": "7",
    }
    args.update(overrides)
    path = tmp_path / name
    argv = ["generate"]
    for flag, value in args.items():
        argv.extend([flag, value])
    argv.extend(["--out", str(path)])
    assert main(argv) == 0
    return path


class TestParseInvocation:
    def test_solve_paths_split_out(self):
        inv = parse_invocation(
            ["solve", "--algo", "iga", "--in", "a.json", "--iters", "10", "--trace-out", "t.csv"]
        )
        assert isinstance(inv, CliInvocation)
        assert inv.subcommand == "solve"
        assert inv.input_path == "a.json" and inv.output_path == "t.csv"
        assert inv.flags["algo"] == "iga" and inv.flags["iters"] == 10
        assert "input" not in inv.flags and "trace_out" not in inv.flags

    def test_sweep_config_is_input(self):
        inv = parse_invocation(["sweep", "--config", "cfg.json", "--out", "r.csv"])
        assert inv.input_path == "cfg.json" and inv.output_path == "r.csv"

    def test_usage_error_exits_two(self):
        assert main(["solve", "--algo", "nope", "--in", "x", "--iters", "1"]) == 2
        assert main(["generate", "--m", "4"]) == 2  # missing required flags
        assert main(["bogus"]) == 2
        assert main([]) == 2


class TestGenerate:
    def test_writes_loadable_instance(self, tmp_path, capsys):
        path = _generate(tmp_path)
        inst = load_instance(path)
        assert inst.m == 16 and inst.n == 32 and inst.seed == 7
        out = capsys.readouterr().out
        assert out.count("\n") == 1 and str(path) in out

    def test_bad_rho_named_in_error(self, tmp_path, capsys):
        code = main(
            ["generate", "--m", "4", "--n", "8", "--rho", "1.5", "--snr-db", "20",
             "--kappa", "0.05", "--seed", "1", "--out", str(tmp_path / "x.json")]
        )
        assert code == 2
        err = capsys.readouterr().err
        assert "rho" in err and "1.5" in err

    def test_noiseless_inf_snr(self, tmp_path):
        path = _generate(tmp_path, "noiseless.json", **{"--snr-db": "inf"})
        assert load_instance(path).sigma_z2 == 0.0


class TestSolve:
    def test_each_algorithm_runs(self, tmp_path, capsys):
        path = _generate(tmp_path)
        capsys.readouterr()
        for algo in ("iga", "aiga", "amp"):
            assert main(["solve", "--algo", algo, "--in", str(path), "--iters", "20"]) == 0
            line = capsys.readouterr().out
            assert line.startswith(algo) and "residual=" in line

    def test_trace_csv_layout(self, tmp_path):
        path = _generate(tmp_path)
        trace_path = tmp_path / "trace.csv"
        code = main(
            ["solve", "--algo", "aiga", "--in", str(path), "--iters", "6",
             "--tol", "0", "--trace-out", str(trace_path)]
        )
        assert code == 0
        with open(trace_path, newline="") as fh:
            rows = list(csv.reader(fh))
        assert rows[0][:4] == ["iter", "nmse", "residual", "active_fraction"]
        assert len(rows) == 8  # header + initial state + 6 steps

    def test_damping_rejected_off_iga(self, tmp_path, capsys):
        path = _generate(tmp_path)
        code = main(["solve", "--algo", "aiga", "--in", str(path), "--iters", "5", "--damping", "0.5"])
        assert code == 2
        assert "damping" in capsys.readouterr().err
        assert main(["solve", "--algo", "iga", "--in", str(path), "--iters", "5", "--damping", "0.5"]) == 0

    def test_missing_input_is_io_error(self, tmp_path):
        assert main(["solve", "--algo", "amp", "--in", str(tmp_path / "nope.json"), "--iters", "5"]) == 3

    def test_malformed_instance_is_io_error(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{]")
        assert main(["solve", "--algo", "amp", "--in", str(bad), "--iters", "5"]) == 3

    def test_divergence_exits_four_with_partial_trace(self, tmp_path, capsys):
        rng = np.random.default_rng(0)
        inst = ProblemInstance(
            m=4, n=8, a=rng.standard_normal((4, 8)) / 2.0, y=np.full(4, 1e300), kappa=0.05
        )
        path = tmp_path / "explosive.json"
        save_instance(inst, path)
        trace_path = tmp_path / "partial.csv"
        with np.errstate(over="ignore", invalid="ignore"):
            code = main(
                ["solve", "--algo", "amp", "--in", str(path), "--iters", "100",
                 "--tol", "0", "--trace-out", str(trace_path)]
            )
        assert code == 4
        assert "diverged" in capsys.readouterr().err
        with open(trace_path, newline="") as fh:
            rows = list(csv.reader(fh))
        assert len(rows) > 2  # header plus the iterations completed before blow-up


class TestEquiv:
    def test_pass_exits_zero(self, tmp_path, capsys):
        path = _generate(tmp_path, "desk.json", **{"--m": "64", "--n": "128", "--rho": "0.05",
                                                   "--snr-db": "20", "--seed": "3"})
        assert main(["equiv", "--in", str(path), "--iters", "30"]) == 0
        assert "PASS" in capsys.readouterr().out

    def test_fail_exits_five(self, tmp_path, capsys):
        rng = np.random.default_rng(0)
        inst = ProblemInstance(
            m=4, n=8, a=rng.standard_normal((4, 8)) / 2.0, y=np.full(4, 1e300), kappa=0.05
        )
        path = tmp_path / "explosive.json"
        save_instance(inst, path)
        with np.errstate(over="ignore", invalid="ignore"):
            assert main(["equiv", "--in", str(path), "--iters", "50"]) == 5
        assert "FAIL" in capsys.readouterr().out


def _sweep_config(tmp_path, **overrides):
    doc = {
        "m": 16,
        "n": 32,
        "rho": 0.15,
        "kappa": 0.05,
        "snr_db_list": [20.0],
        "sample_count": 2,
        "max_iter": 4,
        "algorithms": ["aiga", "amp"],
        "seed": 77,
    }
    doc.update(overrides)
    path = tmp_path / "sweep.json"
    path.write_text(json.dumps(doc))
    return path


class TestSweep:
    def test_writes_expected_rows(self, tmp_path, capsys):
        cfg_path = _sweep_config(tmp_path)
        out_path = tmp_path / "results.csv"
        assert main(["sweep", "--config", str(cfg_path), "--out", str(out_path)]) == 0
        with open(out_path, newline="") as fh:
            rows = list(csv.reader(fh))
        assert len(rows) == 1 + 2 * 1 * 5  # header + algos * snrs * (T+1)
        assert "10 rows" in capsys.readouterr().out

    def test_config_output_key_used_without_out_flag(self, tmp_path):
        out_path = tmp_path / "from_config.csv"
        cfg_path = _sweep_config(tmp_path, output=str(out_path))
        assert main(["sweep", "--config", str(cfg_path)]) == 0
        assert out_path.exists()

    def test_no_output_anywhere_is_usage_error(self, tmp_path):
        cfg_path = _sweep_config(tmp_path)
        assert main(["sweep", "--config", str(cfg_path)]) == 2

    def test_unknown_key_rejected(self, tmp_path, capsys):
        cfg_path = _sweep_config(tmp_path, bogus=1)
        assert main(["sweep", "--config", str(cfg_path), "--out", str(tmp_path / "r.csv")]) == 2
        assert "bogus" in capsys.readouterr().err

    def test_missing_key_rejected(self, tmp_path):
        doc = json.loads(_sweep_config(tmp_path).read_text())
        del doc["seed"]
        cfg_path = tmp_path / "missing.json"
        cfg_path.write_text(json.dumps(doc))
        assert main(["sweep", "--config", str(cfg_path), "--out", str(tmp_path / "r.csv")]) == 2

    def test_unreadable_config_is_io_error(self, tmp_path):
        assert main(["sweep", "--config", str(tmp_path / "absent.json"), "--out", "r.csv"]) == 3
        bad = tmp_path / "bad.json"
        bad.write_text("{]")
        assert main(["sweep", "--config", str(bad), "--out", "r.csv"]) == 3


class TestCorrespond:
    def test_pass_exits_zero(self, capsys):
        assert main(["correspond", "--trials", "100", "--seed", "5"]) == 0
        assert "PASS 100/100" in capsys.readouterr().out


class TestEntryPoint:
    def test_module_invocation(self):
        proc = subprocess.run(
            [sys.executable, "-m", "igabench", "correspond", "--trials", "20", "--seed", "1"],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0
        assert "PASS 20/20" in proc.stdout
