import csv
import json

import numpy as np
import pytest

from ahlfors_lab import curves
from ahlfors_lab.lab import cli, config, experiments, plot
from ahlfors_lab.lab.config import REPORT_SCHEMA, ConfigError, ExperimentConfig

SMALL_E6 = {"params": {"windows": [[2, 1024], [6, 2048]], "min_factor": 1}}


def test_config_validation(tmp_path):
    with pytest.raises(ConfigError):
        ExperimentConfig("E9")
    with pytest.raises(ConfigError):
        ExperimentConfig("E1", seed=-1)
    with pytest.raises(ConfigError):
        ExperimentConfig("E1", corpus=[{"file": str(tmp_path / "missing.json")}])
    with pytest.raises(ConfigError):
        ExperimentConfig("E1", corpus=[{"samples": 10}])
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"experiment": "E1", "colour": "red"})
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({})
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps({"experiment": "E6", **SMALL_E6}))
    cfg = ExperimentConfig.load(p)
    assert cfg.params["min_factor"] == 1
    assert ExperimentConfig.load(p, "E5").experiment == "E5"
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    with pytest.raises(ConfigError):
        ExperimentConfig.load(bad)


def test_clean_makes_json_safe():
    out = config.clean({"a": np.float64(np.inf), "b": np.array([1, 2]), "c": 1 + 2j, "d": np.nan,
                        "e": np.bool_(True)})
    assert out == {"a": "inf", "b": [1, 2], "c": [1.0, 2.0], "d": "nan", "e": True}
    json.dumps(out, allow_nan=False)


def test_runs_are_deterministic():
    a = experiments.run(ExperimentConfig.from_dict({"experiment": "E6", **SMALL_E6})).to_json()
    b = experiments.run(ExperimentConfig.from_dict({"experiment": "E6", **SMALL_E6})).to_json()
    assert a == b
    rec = json.loads(a)
    assert rec["schema"] == REPORT_SCHEMA
    assert rec["anchor"] == experiments.ANCHORS["E6"]
    assert rec["passed"] is True
    assert rec["config"]["resolved_params"]["windows"] == [[2, 1024], [6, 2048]]
    assert len(rec["profiles"]) == 2


def test_failing_sub_operation_becomes_error_record():
    rep = experiments.run(ExperimentConfig("E6", params={"windows": [[2, 1024], [100, 1024]]}))
    assert not rep.passed
    assert rep.error["type"] == "GeometryError"
    assert "where" in rep.error
    json.loads(rep.to_json())


def test_unknown_parameter_is_an_error_record():
    rep = experiments.run(ExperimentConfig("E6", params={"min_factr": 2}))
    assert rep.error["type"] == "ConfigError"
    assert "min_factr" in rep.error["message"]


def test_plot_zero_profile_draws_axes_only():
    svg = plot.svg_profile("zero", [0.1, 0.2, 0.4], [0.0, 0.0, 0.0])
    assert "<polyline" not in svg
    assert svg.count("<line") == 2
    svg = plot.svg_profile("ok", [0.1, 0.2, 0.4], [1.0, 2.0, 3.0])
    assert "<polyline" in svg


def test_plot_rejects_malformed_reports():
    with pytest.raises(plot.PlotError) as exc:
        plot.plot_report({"profiles": [{"scale": [1, 2], "value": [1]}]})
    assert exc.value.field == "profiles[0]"
    with pytest.raises(plot.PlotError):
        plot.plot_report({"profiles": [{"scale": [1, "x"], "value": [1, 2]}]})
    with pytest.raises(plot.PlotError):
        plot.plot_report({})
    with pytest.raises(plot.PlotError):
        plot.plot_report([])


def test_plot_is_deterministic():
    rep = {"experiment": "E0", "profiles": [{"name": "p", "scale": [0.1, 1.0], "value": [2.0, "inf"]}]}
    assert plot.plot_report(rep) == plot.plot_report(rep)
    assert list(plot.plot_report(rep)) == ["E0_00"]


def test_cli_pipeline(tmp_path, capsys):
    d = tmp_path
    assert cli.main(["gen", "--kind", "ellipse", "--samples", "512", "--param", "a=1.2", "--param", "b=1.0",
                     "-o", str(d / "c.json"), "--measure-out", str(d / "m.json")]) == 0
    assert cli.main(["gen", "--kind", "circle", "--samples", "256", "-o", str(d / "disk.json")]) == 0
    assert cli.main(["metrics", "--in", str(d / "c.json"), "--which", "chordarc", "-o", str(d / "k.json")]) == 0
    assert json.loads((d / "k.json").read_text())["constant"] >= 1
    assert cli.main(["fit", "--boundary", str(d / "c.json"), "-o", str(d / "f.json")]) == 0
    (d / "pts.csv").write_text("# x,y\n0,0\n0.3,0.1\n")
    assert cli.main(["eval", "--map", str(d / "f.json"), "--points", str(d / "pts.csv"),
                     "-o", str(d / "w.csv")]) == 0
    rows = list(csv.reader((d / "w.csv").open()))
    assert rows[0] == ["x", "y", "u", "v", "abs_derivative"] and len(rows) == 3
    # a disk measure: arclength of a circle of radius 1/2
    assert cli.main(["gen", "--kind", "circle", "--samples", "256", "--param", "radius=0.5",
                     "-o", str(d / "g.json"), "--measure-out", str(d / "nu.json")]) == 0
    assert cli.main(["transport", "--measure", str(d / "nu.json"), "--map", str(d / "f.json"),
                     "-o", str(d / "pushed.json")]) == 0
    assert cli.main(["transport", "--measure", str(d / "pushed.json"), "--map", str(d / "f.json"),
                     "--dir", "pull", "-o", str(d / "back.json")]) == 0
    assert cli.main(["carleson", "--measure", str(d / "nu.json"), "--form", "sector",
                     "-o", str(d / "s.json")]) == 0
    assert cli.main(["carleson", "--measure", str(d / "pushed.json"), "--boundary", str(d / "c.json"),
                     "-o", str(d / "b.json")]) == 0
    assert "vanishing" in json.loads((d / "b.json").read_text())


def test_cli_gen_snowflake_flags(tmp_path):
    out = tmp_path / "s.json"
    assert cli.main(["gen", "--kind", "snowflake", "--depth", "3", "--policy", "left-fixed",
                     "--samples", "512", "-o", str(out)]) == 0
    pts = np.array(json.loads(out.read_text())["points"])
    want = curves.snowflake(3, "left-fixed", samples=512).points
    np.testing.assert_array_equal(pts[:, 0] + 1j * pts[:, 1], want)


def test_cli_errors_are_json(tmp_path, capsys):
    (tmp_path / "bad.json").write_text(json.dumps({"points": [[0, 0]]}))
    assert cli.main(["metrics", "--in", str(tmp_path / "bad.json")]) == 2
    err = json.loads(capsys.readouterr().err)
    assert err["error"]["type"] == "GeometryError"
    (tmp_path / "r.json").write_text(json.dumps({"profiles": "nope"}))
    assert cli.main(["plot", "--report", str(tmp_path / "r.json"), "--out", str(tmp_path)]) == 2
    assert json.loads(capsys.readouterr().err)["error"]["field"] == "profiles"


def test_cli_run_exit_codes(tmp_path, capsys):
    cfg = tmp_path / "e6.json"
    cfg.write_text(json.dumps(SMALL_E6))
    assert cli.main(["run", "--experiment", "E6", "--config", str(cfg), "--out", str(tmp_path / "ok")]) == 0
    out = capsys.readouterr().out
    assert "[PASS] E6" in out and "[FAIL]" not in out
    assert (tmp_path / "ok" / "E6.json").exists()
    assert (tmp_path / "ok" / "E6_00.svg").exists()
    assert cli.main(["plot", "--report", str(tmp_path / "ok" / "E6.json"), "--out", str(tmp_path / "pl")]) == 0
    assert (tmp_path / "pl" / "E6_01.svg").read_text() == (tmp_path / "ok" / "E6_01.svg").read_text()
    strict = tmp_path / "strict.json"
    strict.write_text(json.dumps({"params": {**SMALL_E6["params"], "min_factor": 1000}}))
    assert cli.main(["run", "--experiment", "E6", "--config", str(strict), "--out", str(tmp_path / "no")]) == 1
    assert "[FAIL] E6" in capsys.readouterr().out
