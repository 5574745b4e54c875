import json
import subprocess
import sys

import pytest

from nlslab import cli
from nlslab.errors import SolverError
from nlslab.radial import from_csv

SMALL_CFG = """params.N = 3
params.lambda1 = 1
params.p1 = 1
grid.M = 256
stepping.dt = 1e-2
run.frame = physical
run.t_end = 1
"""


@pytest.fixture
def cfg(tmp_path):
    path = tmp_path / "small.cfg"
    path.write_text(SMALL_CFG)
    return path


def call(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, (json.loads(out.out) if out.out.strip() else None), out.err


def test_classify_json(capsys):
    code, out, _ = call(capsys, "classify", "--N", 3, "--lambda1", 1, "--p1", 0.9)
    assert code == 0
    assert out["tag"] == "Scattering_Sigma"
    assert out["source"] == "Theorem 2 case (3)"
    assert out["corollary"] == "Corollary 1.1"


def test_classify_threshold_needs_mass(capsys):
    args = ["classify", "--N", 3, "--lambda1", 1, "--lambda2", -1, "--p1", 0.8, "--p2", 1.2]
    code, _, err = call(capsys, *args)
    assert code == 2 and "mass" in err
    code, out, _ = call(capsys, *args, "--mass", 0.1)
    assert code == 0 and out["source"] == "Theorem 2 case (4)"
    assert out["threshold_margin"] > 0


def test_bad_parameters_exit_2(capsys, cfg):
    assert call(capsys, "classify", "--N", 2, "--lambda1", 1, "--p1", 1)[0] == 2
    assert call(capsys, "simulate", cfg, "--set", "grid.M=4")[0] == 2
    assert call(capsys, "simulate", cfg, "--set", "nonsense")[0] == 2
    assert call(capsys, "simulate", cfg.with_name("missing.cfg"))[0] == 2


def test_solver_failure_exit_3(capsys, cfg, monkeypatch, tmp_path):
    def boom(*a, **k):
        raise SolverError("no convergence")
    monkeypatch.setattr(cli, "run", boom)
    code, _, err = call(capsys, "simulate", cfg, "--out", tmp_path)
    assert code == 3 and "no convergence" in err


def test_simulate_and_lens(capsys, cfg, tmp_path):
    code, out, _ = call(capsys, "simulate", cfg, "--out", tmp_path)
    assert code == 0 and out["ledger"] == {"physical": "ledger_physical.csv"}
    code, out, _ = call(capsys, "lens", cfg, "--out", tmp_path, "--set", "run.s_end=0.5")
    assert code == 0 and out["ledger"] == {"lens": "ledger_lens.csv"}


def test_ground_state_profile(capsys, tmp_path):
    prof = tmp_path / "W.csv"
    code, out, _ = call(capsys, "ground-state", "--N", 3, "--profile", prof)
    assert code == 0
    assert out["CN"] > 0 and out["residual_pohozaev"] < 1e-6
    W = from_csv(prof.read_text())
    assert W.grid.N == 3 and W.values[0].real == pytest.approx(out["w0"], rel=1e-3)


def test_decay_fit_from_csv(capsys, tmp_path):
    path = tmp_path / "series.csv"
    rows = ["t,L4"] + [f"{t},{(1 + t) ** -0.75!r}" for t in range(0, 101)]
    path.write_text("\n".join(rows) + "\n")
    code, out, _ = call(capsys, "decay-fit", "--csv", path, "--r", 4, "--N", 3)
    assert code == 0
    assert out["slope"] == pytest.approx(-0.75, abs=1e-9)
    code, _, err = call(capsys, "decay-fit", "--csv", path, "--column", "L9")
    assert code == 2 and "L9" in err


def test_decay_fit_from_config(capsys, cfg, tmp_path):
    code, out, _ = call(capsys, "decay-fit", "--config", cfg, "--out", tmp_path,
                        "--set", "params.lambda1=0")
    assert code == 0 and out["frame"] == "physical"
    assert set(out["decay"]) == {"r4", "r6"}


def test_extract(capsys, cfg, tmp_path):
    code, out, _ = call(capsys, "extract", cfg, "--out", tmp_path, "--eps", 0.2, 0.1,
                        "--set", "run.s_end=0.9", "--set", "run.t_end=none")
    assert code == 0
    assert len(out["rows"]) == 2
    assert (tmp_path / out["run_id"] / "scattering_state.csv").exists()


def test_sweep(capsys, cfg, tmp_path):
    code, out, _ = call(capsys, "sweep", cfg, "--out", tmp_path,
                        "--axis", "params.p1=0.6,0.7")
    assert code == 0 and out["points"] == 2 and out["failures"] == 0
    assert [r["tag"] for r in out["rows"]] == ["NoScattering_L2", "Scattering_Sigma"]
    assert call(capsys, "sweep", cfg, "--axis", "params.p1")[0] == 2


def test_console_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "nlslab.cli", "classify", "--N", "3",
                          "--lambda1", "1", "--lambda2", "1", "--p1", "0.5", "--p2", "1.0"],
                         capture_output=True, text=True, cwd=tmp_path)
    assert res.returncode == 0
    assert json.loads(res.stdout)["source"] == "Theorem 1(i)"
