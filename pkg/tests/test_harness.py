import csv
import filecmp
import json
import os
from pathlib import Path

import pytest

from pensionsim.harness import cli
from pensionsim.harness.config import (ConfigError, config_from_dict, max_age_distribution, validate_sweep)
from pensionsim.harness.output import preflight, write_outputs
from pensionsim.harness.sweep import default_jobs, run_sweep
from pensionsim.metrics import CSV_COLUMNS
from pensionsim.rng import ClampedNormal, UniformInt, derive_seed

SMALL = {
    "scenario": "S(ON, OFF, U)",
    "ticks": 40,
    "replications": 2,
    "master_seed": 5,
    "axis_x": {"name": "fixed_fee", "values": [0, 0.5]},
    "axis_y": {"name": "pension_tax_pct", "values": [0, 20]},
    "model": {"initial_population": 100},
    "final_window": 10,
}


def write_cfg(tmp_path, data, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(data))
    return p


def test_cells_and_seeds():
    cfg = config_from_dict(SMALL)
    assert [c for c, _, _ in cfg.cells()] == [0, 1, 2, 3]
    assert cfg.cells()[1][1:] == (0, 20)
    assert cfg.seeds()[(3, 1)] == derive_seed(5, 3, 1)


@pytest.mark.parametrize("patch,msg", [
    ({"axis_x": {"name": "salary", "values": [1]}}, "unknown axis"),
    ({"axis_x": {"name": "fixed_fee", "values": []}}, "no values"),
    ({"ticks": 0}, "ticks"),
    ({"replications": 0}, "replications"),
    ({"scenario": "S(ON,OFF)"}, "expected"),
    ({"policy": {"pension_tax_pct": 140}}, "policy"),
    ({"bogus": 1}, "unknown config keys"),
    ({"model": {"children": {"kind": "poisson"}}}, "kind"),
])
def test_config_errors(patch, msg):
    with pytest.raises(ConfigError, match=msg):
        validate_sweep(config_from_dict({**SMALL, **patch}))


def test_max_age_axis():
    assert max_age_distribution(80, 65, "U") == UniformInt(66, 100)
    d = max_age_distribution(80, 55, "N")
    assert isinstance(d, ClampedNormal) and (d.lo, d.hi, d.sigma) == (60, 100, 6.7)
    with pytest.raises(ConfigError):
        max_age_distribution(50, 75, "U")
    cfg = config_from_dict({**SMALL, "axis_x": {"name": "retirement_age", "values": [60, 70]},
                            "axis_y": {"name": "max_age_mean", "values": [70, 90]}})
    scens = validate_sweep(cfg)
    assert scens[1].max_age == UniformInt(70, 110) and scens[2].max_age == UniformInt(71, 90)


def test_collision_detected():
    cfg = config_from_dict(SMALL)
    with pytest.raises(ConfigError, match="collide"):
        validate_sweep(cfg, seeder=lambda m, c, r: c)


def test_validate_cli_collision(tmp_path, monkeypatch, capsys):
    p = write_cfg(tmp_path, SMALL)
    assert cli.main(["validate", "--config", str(p)]) == 0
    import pensionsim.harness.config as config_mod
    monkeypatch.setattr(config_mod, "derive_seed", lambda m, c, r: 1)
    monkeypatch.setattr(cli, "derive_seed", lambda m, c, r: 1)
    assert cli.main(["validate", "--config", str(p)]) != 0
    assert "collide" in capsys.readouterr().err


def test_jobs_byte_identical(tmp_path):
    cfg = config_from_dict(SMALL)
    dirs = []
    for jobs in (1, 4, 8):
        d = tmp_path / f"j{jobs}"
        write_outputs(d, run_sweep(cfg, jobs=jobs))
        dirs.append(d)
    names = sorted(os.listdir(dirs[0]))
    assert len(names) == 4 * 2 * 2 + 2
    for other in dirs[1:]:
        assert sorted(os.listdir(other)) == names
        match, mismatch, errors = filecmp.cmpfiles(dirs[0], other, names, shallow=False)
        assert not mismatch and not errors


def test_output_formats(tmp_path):
    res = run_sweep(config_from_dict({**SMALL, "replications": 1}), jobs=1)
    write_outputs(tmp_path, res)
    with open(tmp_path / "timeseries_3_0.csv") as fh:
        rows = list(csv.reader(fh))
    assert tuple(rows[0]) == CSV_COLUMNS and len(rows) == 41
    assert rows[1][CSV_COLUMNS.index("fund_per_retiree")] == ""
    summary = json.loads((tmp_path / "summary_3_0.json").read_text())
    assert summary["seed"] == derive_seed(5, 3, 0)
    assert summary["policy"]["fixed_fee"] == 0.5 and summary["policy"]["pension_tax_pct"] == 20
    f = summary["fund"]
    assert abs(f["balance"] - (f["contributions_total"] - f["pensions_paid_total"] - f["welfare_paid_total"])) < 1e-9
    with open(tmp_path / "aggregate.csv") as fh:
        agg = list(csv.DictReader(fh))
    assert len(agg) == 4 and set(agg[0]) == {"x", "y", "rep", "population", "gini", "fund_per_retiree",
                                             "gdp_per_capita"}


def test_run_equals_single_cell_sweep(tmp_path):
    cli.main(["run", "--scenario", "S(ON, OFF, U)", "--ticks", "30", "--seed", "9", "--out", str(tmp_path / "a")])
    one = {**SMALL, "ticks": 30, "replications": 1, "master_seed": 9,
           "axis_x": {"name": "retirement_age", "values": [65]},
           "axis_y": {"name": "pension_tax_pct", "values": [0]}, "final_window": 100}
    p = write_cfg(tmp_path, {k: v for k, v in one.items() if k != "model"})
    assert cli.main(["sweep", "--config", str(p), "--out", str(tmp_path / "b"), "--jobs", "1"]) == 0
    assert filecmp.cmp(tmp_path / "a" / "timeseries_0_0.csv", tmp_path / "b" / "timeseries_0_0.csv", shallow=False)
    assert filecmp.cmp(tmp_path / "a" / "summary_0_0.json", tmp_path / "b" / "summary_0_0.json", shallow=False)


def test_cli_errors(tmp_path, capsys):
    with pytest.raises(SystemExit) as e:
        cli.main(["run", "--out", str(tmp_path), "--frobnicate"])
    assert e.value.code == 2
    with pytest.raises(SystemExit) as e:
        cli.main(["sweep", "--config", "x.json", "--jobs", "0"])
    assert e.value.code == 2
    assert cli.main(["run", "--scenario", "S(ON,X,U)", "--out", str(tmp_path)]) == 1
    assert "expected" in capsys.readouterr().err
    assert cli.main(["validate", "--config", str(tmp_path / "missing.json")]) == 1
    bad = tmp_path / "bad.json"
    bad.write_text("{ not json")
    assert cli.main(["sweep", "--config", str(bad), "--out", str(tmp_path)]) == 1
    assert "invalid JSON" in capsys.readouterr().err


def test_unwritable_output(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    p = write_cfg(tmp_path, SMALL)
    assert cli.main(["sweep", "--config", str(p), "--out", str(blocker / "sub")]) == 1
    assert "not writable" in capsys.readouterr().err
    assert preflight(tmp_path / "new" / "dir").is_dir()


def test_map_cli(tmp_path, capsys):
    m = tmp_path / "m.txt"
    assert cli.main(["map", "--emit", str(m)]) == 0
    assert cli.main(["map", "--check", str(m)]) == 0
    m.write_text("0 1\n2 9\n")
    assert cli.main(["map", "--check", str(m)]) == 1
    assert "line 2, column 2" in capsys.readouterr().err


def test_config_with_files(tmp_path):
    (tmp_path / "tiny.map").write_text("\n".join(["4 4 4 4 4 4 4 4 4 4"] * 10) + "\n")
    (tmp_path / "knots.txt").write_text("0 0.5\n30 1.0\n90 0.4\n")
    data = {**SMALL, "scenario": "S(OFF, ON, U)", "ticks": 10,
            "model": {"initial_population": 30, "map_file": "tiny.map", "knots_file": "knots.txt"}}
    p = write_cfg(tmp_path, data)
    assert cli.main(["sweep", "--config", str(p), "--out", str(tmp_path / "o"), "--jobs", "1"]) == 0
    (tmp_path / "knots.txt").write_text("0 0.5\n0 1.0\n90 0.4\n")
    assert cli.main(["validate", "--config", str(p)]) == 1


def test_jobs_env(monkeypatch):
    monkeypatch.setenv("PENSIONSIM_JOBS", "3")
    assert default_jobs() == 3
    monkeypatch.setenv("PENSIONSIM_JOBS", "zero")
    with pytest.raises(ValueError):
        default_jobs()


def test_example_configs_validate():
    for p in sorted(Path(__file__).resolve().parents[1].joinpath("configs").glob("*.json")):
        assert cli.main(["validate", "--config", str(p)]) == 0
