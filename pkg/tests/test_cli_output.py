import json

import numpy as np
import pytest

from lgsolve import geometry as geo
from lgsolve import presets
from lgsolve.anisotropy import l2
from lgsolve.chord_solver import solve
from lgsolve.cli import main
from lgsolve.output import emit_levels_svg, grid_points, to_jsonable, write_field_csv, write_json
from lgsolve.scenarios import Scenario, list_scenarios, load_scenario, report_exit_code, scenario_dir
from lgsolve.exceptions import ConfigError


@pytest.fixture(scope="module")
def small_field():
    d = geo.disc(n=512)
    return solve(d, presets.cos_theta(d), l2(), K=30)


def test_csv_format_and_determinism(tmp_path, small_field):
    P = grid_points(small_field.domain, 10)
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    write_field_csv(a, P, small_field(P))
    write_field_csv(b, P, small_field(P))
    assert a.read_bytes() == b.read_bytes()
    rows = a.read_text().splitlines()
    assert rows[0] == "x,y,u"
    assert len(rows) == len(P) + 1
    x, y, u = map(float, rows[1].split(","))
    assert u == pytest.approx(small_field(np.array([[x, y]]))[0], abs=1e-9)


def test_svg_structure_and_determinism(tmp_path, small_field):
    a, b = tmp_path / "a.svg", tmp_path / "b.svg"
    emit_levels_svg(small_field, a, title="cos")
    emit_levels_svg(small_field, b, title="cos")
    assert a.read_bytes() == b.read_bytes()
    text = a.read_text()
    assert text.startswith('<?xml version="1.0"')
    assert 'version="1.1"' in text
    assert text.count('<g class="level"') == len(small_field.levels)
    assert 'id="domain"' in text and 'id="legend"' in text


def test_svg_escape_arrows(tmp_path):
    S = presets.strip_exp()
    h = geo.supporting_halfplane(S, (0.0, 0.0))
    from lgsolve.unbounded import solve_truncated
    fld = solve_truncated(S, presets.monotone_y(S), h, 6.0, K=10, level_range=(-1.0, 1.0))
    p = tmp_path / "m.svg"
    emit_levels_svg(fld, p)
    assert p.read_text().count('marker-end="url(#arrow)"') == 10


def test_json_conversion(tmp_path):
    obj = {"a": np.float64(1.5), "b": np.arange(3), "c": float("inf"), "d": (np.bool_(True),)}
    assert to_jsonable(obj) == {"a": 1.5, "b": [0, 1, 2], "c": None, "d": [True]}
    p = tmp_path / "r.json"
    write_json(p, obj)
    assert json.loads(p.read_text())["b"] == [0, 1, 2]


def test_scenarios_listed_and_loadable():
    names = list_scenarios()
    for want in ("brothers", "bump-train", "catenoid", "hyperbola-nonunique", "l1-regularization"):
        assert want in names
    for n in names:
        s = load_scenario(scenario_dir() / f"{n}.cfg")
        assert s.name == n


def test_bad_scenario_rejected(tmp_path):
    p = tmp_path / "bad.cfg"
    p.write_text("[scenario]\nmode = bounded\ndata = nosuchdata\n")
    with pytest.raises(ConfigError):
        load_scenario(p)
    p.write_text("[scenario]\nmode = sideways\n")
    with pytest.raises(ConfigError):
        load_scenario(p)
    with pytest.raises(ConfigError):
        Scenario(name="x", mode="bounded", solver={"levels": -3})


def test_exit_code_rule():
    assert report_exit_code([{"all_pass": True}]) == 0
    assert report_exit_code([{"all_pass": True}, {"all_pass": False}]) == 3
    assert report_exit_code([]) == 0


def test_cli_solve_writes_outputs(tmp_path, capsys):
    args = ["solve", "--levels", "30", "--csv", str(tmp_path / "u.csv"), "--svg", str(tmp_path / "u.svg"),
            "--report", str(tmp_path / "r.json"), "--grid", "12"]
    assert main(args) == 0
    rep = json.loads((tmp_path / "r.json").read_text())
    assert rep["all_pass"] and rep["knobs"]["K"] == 30
    first = (tmp_path / "u.csv").read_bytes(), (tmp_path / "u.svg").read_bytes()
    assert main(args) == 0
    assert first == ((tmp_path / "u.csv").read_bytes(), (tmp_path / "u.svg").read_bytes())
    assert "[PASS] solve: nesting" in capsys.readouterr().out


def test_cli_catenoid(capsys):
    assert main(["catenoid", "--a", "0.3"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["regime"] == "CatenoidRegion"
    assert out["catenoid"]["value"] < out["disc_area"]
    assert main(["catenoid", "--critical"]) == 0
    crit = json.loads(capsys.readouterr().out)
    assert abs(crit["gap"]) <= 1e-10


def test_cli_errors(capsys):
    assert main(["catenoid"]) == 2
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "config_error" and err["exit_code"] == 2
    assert main(["reproduce", "no-such-scenario"]) == 2
    capsys.readouterr()
    assert main(["solve", "--norm", "l1", "--levels", "10"]) == 16
    assert json.loads(capsys.readouterr().err)["error"] == "not_strict_ball"
    assert main(["solve", "--levels", "10", "--verify", "1,1,0,0"]) == 2


def test_cli_reproduce_empty_and_list(capsys):
    assert main(["reproduce"]) == 0
    assert main(["list-scenarios"]) == 0
    assert "brothers" in capsys.readouterr().out


def test_cli_reproduce_catenoid(tmp_path):
    assert main(["reproduce", "catenoid", "--out", str(tmp_path)]) == 0
    rep = json.loads((tmp_path / "catenoid" / "catenoid.json").read_text())
    assert rep["all_pass"]
    assert rep["regimes"]["below"]["type"] == "CatenoidRegion"
