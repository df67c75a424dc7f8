import os
import subprocess
import sys

import pytest

from semibohm import cli
from semibohm.errors import NumericalAbort

FAST = ["--scenario", "free_plane", "--tsteps", "100", "--seeds", "5"]


def run(argv, capsys):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


class TestRun:
    def test_success(self, tmp_path, capsys):
        code, out, _ = run(["run", *FAST, "--out", str(tmp_path)], capsys)
        assert code == 0
        assert "PASS non_crossing" in out and "free_plane" in out
        assert (tmp_path / "trajectories.csv").exists()

    def test_config_file_with_flag_override(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("scenario=free_plane\nseeds=3\ndoubling=false\ntsteps=80\n")
        code, out, _ = run(["run", "--config", str(cfg), "--seeds", "4",
                            "--out", str(tmp_path / "o")], capsys)
        assert code == 0
        assert "step_doubling" not in out
        assert "seeds=4" in (tmp_path / "o" / "spec.txt").read_text()

    def test_audit_failure(self, capsys):
        # far too few steps and modes: energy drift and doubling audits fail
        code, out, _ = run(["run", "--scenario", "harmonic_focus", "--epsilon", "0.1",
                            "--modes", "256", "--tsteps", "20", "--seeds", "5"], capsys)
        assert code == 2
        assert "FAIL energy_drift" in out

    @pytest.mark.parametrize("argv", [
        ["run", "--scenario", "free_caustic", "--epsilon", "-1"],
        ["run", "--scenario", "nonsense"],
        ["run", "--scenario", "free_plane", "--modes", "100"],
        ["run"],
        ["run", "--config", "/nonexistent/run.cfg"],
        ["launch"],
    ])
    def test_config_errors(self, argv, capsys):
        assert run(argv, capsys)[0] == 3

    def test_bad_thread_cap(self, monkeypatch, capsys):
        monkeypatch.setenv(cli.THREADS_ENV, "many")
        assert run(["run", *FAST], capsys)[0] == 3
        monkeypatch.setenv(cli.THREADS_ENV, "0")
        assert run(["run", *FAST], capsys)[0] == 3

    def test_numerical_abort(self, monkeypatch, capsys):
        def explode(*args, **kwargs):
            raise NumericalAbort("non-finite position for seed 3 at step 7")

        monkeypatch.setattr("semibohm.runner.co_evolve", explode)
        code, _, err = run(["run", *FAST], capsys)
        assert code == 4 and "seed 3" in err


class TestSweepAndReport:
    def test_sweep_then_report(self, tmp_path, monkeypatch, capsys):
        monkeypatch.setenv(cli.THREADS_ENV, "2")
        cfg = tmp_path / "sweep.cfg"
        cfg.write_text("modes=1024\ntsteps=300\nseeds=9\ndoubling=false\nmeasure_samples=1024\n")
        code, out, _ = run(["sweep", "--scenario", "free_caustic", "--config", str(cfg),
                            "--epsilon-list", "3e-2,1e-2", "--out", str(tmp_path / "s")], capsys)
        assert code == 0
        assert sorted(os.listdir(tmp_path / "s")) == ["eps_0.01", "eps_0.03"]
        assert "pre-caustic deviation strictly decreasing" in out
        code, again, _ = run(["report", "--in", str(tmp_path / "s")], capsys)
        assert code == 0
        # rows come back sorted by directory name; the numbers are the same
        assert set(again.splitlines()[2:4]) == set(out.splitlines()[2:4])

    def test_single_worker_sweep(self, tmp_path, monkeypatch, capsys):
        monkeypatch.setenv(cli.THREADS_ENV, "1")
        code, _, _ = run(["sweep", "--scenario", "free_plane", "--epsilon-list", "0.01",
                          "--out", str(tmp_path)], capsys)
        assert code == 0
        assert (tmp_path / "eps_0.01" / "audits.csv").exists()

    def test_bad_epsilon_list(self, tmp_path, capsys):
        assert run(["sweep", "--scenario", "free_plane", "--epsilon-list", "a,b",
                    "--out", str(tmp_path)], capsys)[0] == 3

    def test_report_without_runs(self, tmp_path, capsys):
        assert run(["report", "--in", str(tmp_path)], capsys)[0] == 3
        assert run(["report", "--in", str(tmp_path / "missing")], capsys)[0] == 3


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "semibohm.cli", "run", "--scenario", "nope"],
                          capture_output=True, text=True)
    assert proc.returncode == 3
