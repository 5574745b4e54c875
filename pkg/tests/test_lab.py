import csv
import json

import numpy as np
import pytest

from nlslab.errors import ParameterError
from nlslab.lab import (
    ConfigError,
    RunConfig,
    config_from_dict,
    expand_axes,
    initial_datum,
    load_config,
    parse_config_text,
    run,
    sweep,
)
from nlslab.radial import ModelParams, gaussian, make_grid, norm_l2, to_csv

SMALL = {
    "params.N": 3, "params.lambda1": 1.0, "params.p1": 1.0,
    "grid.R": 20.0, "grid.M": 256, "stepping.dt": 1e-2,
    "run.frame": "lens", "run.s_end": 0.5,
}


def small(**over):
    data = dict(SMALL)
    data.update(over)
    return config_from_dict(data)


def test_parse_text_and_json_mirror(tmp_path):
    text = "# comment\nparams.N = 3\nparams.lambda1 = 1\nparams.p1 = 0.5  # trailing\nrun.t_end = 1\n"
    cfg_txt = tmp_path / "a.cfg"
    cfg_txt.write_text(text)
    cfg_json = tmp_path / "a.json"
    cfg_json.write_text(json.dumps({"params": {"N": 3, "lambda1": 1, "p1": 0.5},
                                    "run": {"t_end": 1}}))
    a, b = load_config(cfg_txt), load_config(cfg_json)
    assert a == b
    assert a.run_id() == b.run_id()
    assert a.params == ModelParams(3, 1.0, p1=0.5)


def test_text_round_trip():
    cfg = small(**{"run.monitors": "gronwall, witness", "extract.eps": "0.2, 0.1"})
    again = config_from_dict(parse_config_text(cfg.to_text()))
    assert again == cfg
    assert again.run_id() == cfg.run_id()


def test_run_id_ignores_spelling():
    assert small(**{"params.lambda1": "1"}).run_id() == small(**{"params.lambda1": 1.0}).run_id()
    assert small().run_id() != small(**{"params.p1": 1.1}).run_id()


@pytest.mark.parametrize("over, message", [
    ({"bogus.key": 1}, "unknown"),
    ({"run.frame": "sideways"}, "run.frame"),
    ({"run.s_end": 1.0}, "s_end"),
    ({"run.frame": "physical", "run.s_end": None}, "t_end"),
    ({"run.monitors": "picard"}, "picard"),
    ({"run.monitors": "telepathy"}, "unknown monitors"),
    ({"grid.M": 2.5}, "integer"),
    ({"grid.M": 8}, "interior nodes"),
    ({"stepping.dt": -1}, "dt"),
    ({"init.kind": "file"}, "init.file"),
    ({"run.frame": "both", "run.t_end": 2.0, "run.s_end": 0.5}, "disagree"),
    ({"run.monitors": "extract", "extract.eps": "0.9"}, "extract"),
])
def test_config_validation(over, message):
    with pytest.raises(ParameterError, match=message):
        small(**over)


def test_missing_required_and_duplicates():
    with pytest.raises(ConfigError):
        config_from_dict({"params.N": 3, "run.t_end": 1})
    with pytest.raises(ConfigError, match="duplicate"):
        parse_config_text("params.N = 3\nparams.N = 4\n")
    with pytest.raises(ConfigError, match="expected"):
        parse_config_text("params.N 3\n")


def test_datum_file_hashed_by_content(tmp_path):
    grid = make_grid(20, 256, 3)
    (tmp_path / "a.csv").write_text(to_csv(gaussian(grid)))
    (tmp_path / "b.csv").write_text(to_csv(gaussian(grid)))
    cfgs = []
    for name in ("a.csv", "b.csv"):
        path = tmp_path / f"{name}.cfg"
        path.write_text("params.N = 3\nparams.lambda1 = 1\nparams.p1 = 1\ngrid.M = 256\n"
                        f"init.kind = file\ninit.file = {name}\nrun.t_end = 0.1\n")
        cfgs.append(load_config(path))
    assert cfgs[0].run_id() == cfgs[1].run_id()
    np.testing.assert_allclose(initial_datum(cfgs[0]).values, gaussian(grid).values)


def test_random_datum_depends_on_seed():
    a = initial_datum(small(**{"init.kind": "random", "run.seed": 1}))
    b = initial_datum(small(**{"init.kind": "random", "run.seed": 1}))
    c = initial_datum(small(**{"init.kind": "random", "run.seed": 2}))
    assert np.array_equal(a.values, b.values)
    assert not np.array_equal(a.values, c.values)
    assert norm_l2(a) == pytest.approx(1.0)


def test_lens_run_writes_artifacts(tmp_path):
    cfg = small(**{"run.monitors": "gronwall, witness, decay", "params.p1": 0.5,
                   "run.s_end": 0.9, "witness.window": "0.5, 0.9"})
    rec = run(cfg, tmp_path)
    d = tmp_path / rec.run_id
    for name in ("config.txt", "ledger_lens.csv", "final_lens.csv", "record.json",
                 "witness.csv", "decay_lens.csv"):
        assert (d / name).exists(), name
    data = json.loads((d / "record.json").read_text())
    assert data["verdict"]["tag"] == "NoScattering_L2"
    assert data["final"]["lens"]["identity_residual_max"] < 1e-3
    assert "growth_ratio" in data["monitors"]["lens"]["witness"]
    assert load_config(d / "config.txt") == cfg


def test_ledger_csv_byte_identical_on_rerun(tmp_path):
    cfg = small()
    a = run(cfg, tmp_path / "a")
    b = run(cfg, tmp_path / "b")
    for name in ("ledger_lens.csv", "final_lens.csv", "config.txt"):
        assert (a.directory / name).read_bytes() == (b.directory / name).read_bytes()


def test_zero_datum_gives_zero_ledger(tmp_path):
    cfg = small(**{"init.amplitude": 0.0, "run.frame": "both", "run.t_end": 1.0,
                   "run.s_end": None})
    rec = run(cfg, tmp_path)
    with (rec.directory / "ledger_lens.csv").open() as fh:
        rows = list(csv.DictReader(fh))
    for row in rows:
        for col in ("mass", "energy", "grad_l2", "lp1", "M", "K", "residual"):
            assert float(row[col]) == 0.0
    assert rec.verdict["tag"] == "Scattering_Sigma"
    assert rec.frame_equivalence["relative_l2"] == 0.0


def test_frame_both_reports_equivalence(tmp_path):
    cfg = small(**{"run.frame": "both", "run.t_end": 1.0, "run.s_end": None,
                   "grid.M": 1024, "stepping.dt": 1e-3})
    rec = run(cfg, tmp_path)
    eq = rec.frame_equivalence
    assert eq["t"] == 1.0 and eq["s"] == 0.5
    assert eq["relative_l2"] < 1e-2
    assert set(rec.ledger) == {"physical", "lens"}


def test_free_flow_has_no_verdict(tmp_path):
    rec = run(small(**{"params.lambda1": 0.0}), tmp_path)
    assert rec.verdict["tag"] is None


def test_picard_monitor(tmp_path):
    cfg = small(**{"run.frame": "physical", "run.t_end": 0.2, "run.s_end": None,
                   "run.monitors": "picard", "params.lambda1": 0.1, "picard.iters": 6})
    mon = run(cfg, tmp_path).monitors["physical"]["picard"]
    diffs = mon["cauchy_diffs"]
    assert len(diffs) == 5
    assert all(b < a for a, b in zip(diffs, diffs[1:]))


def test_expand_axes_order():
    pts = expand_axes({"a": [1, 2], "b": ["x", "y", "z"]})
    assert len(pts) == 6
    assert pts[0] == {"a": 1, "b": "x"} and pts[1] == {"a": 1, "b": "y"}


def test_single_point_sweep_matches_run(tmp_path):
    cfg = small()
    rep = sweep(cfg, {"params.p1": [1.0]}, tmp_path / "s")
    direct = run(cfg, tmp_path / "r")
    assert rep.rows[0]["run_id"] == direct.run_id
    assert rep.rows[0]["status"] == "ok"
    a = (tmp_path / "s" / direct.run_id / "ledger_lens.csv").read_bytes()
    assert a == (direct.directory / "ledger_lens.csv").read_bytes()


def test_sweep_grid_border_resume_and_parallel(tmp_path):
    base = small(**{"params.p2": 1.2})
    axes = {"params.p1": [0.6, 0.7, 0.8], "params.lambda2": [-1.0, 0.0, 1.0]}
    rep = sweep(base, axes, tmp_path, jobs=2)
    assert len(rep.rows) == 9 and rep.failures == 0
    with rep.path.open() as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 9
    tags = {(float(r["params.p1"]), float(r["params.lambda2"])): r["tag"] for r in rows}
    assert tags[(0.6, 0.0)] == "NoScattering_L2"
    assert tags[(0.7, 0.0)] == "Scattering_Sigma"
    again = sweep(base, axes, tmp_path)
    assert {r["status"] for r in again.rows} == {"cached"}
    assert [r["run_id"] for r in again.rows] == [r["run_id"] for r in rep.rows]


def test_sweep_point_failure_is_not_fatal(tmp_path):
    rep = sweep(small(), {"params.p1": [1.0, -1.0]}, tmp_path)
    assert [r["status"] for r in rep.rows] == ["ok", "error"]
    assert rep.failures == 1
    assert "ParameterError" in rep.rows[1]["error"]


def test_sweep_rejects_unknown_axis(tmp_path):
    with pytest.raises(ConfigError):
        sweep(small(), {"params.q": [1]}, tmp_path)


def test_runconfig_replace_validates():
    with pytest.raises(ConfigError):
        small().replace(frame="nowhere")
    assert isinstance(small().replace(M=512), RunConfig)
