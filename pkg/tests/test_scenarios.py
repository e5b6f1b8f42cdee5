"""Every scenario file runs and reports its certificates."""
from pathlib import Path

import pytest

from lgsolve.scenarios import list_scenarios, load_scenario, run_scenario, scenario_dir

FAST = ["catenoid", "staircase-trace", "c0-bump"]


@pytest.mark.parametrize("name", FAST)
def test_fast_scenarios(name, tmp_path):
    rep = run_scenario(load_scenario(scenario_dir() / f"{name}.cfg"), tmp_path)
    assert rep["certificates"]
    assert rep["all_pass"], [c for c in rep["certificates"] if not c["pass"]]
    assert Path(rep["outputs"]["json"]).exists()
    assert str(tmp_path) in rep["outputs"]["json"]


@pytest.mark.slow
@pytest.mark.parametrize("name", [n for n in list_scenarios() if n not in FAST])
def test_slow_scenarios(name, tmp_path):
    rep = run_scenario(load_scenario(scenario_dir() / f"{name}.cfg"), tmp_path)
    failed = [(c["name"], c["value"], c["tolerance"]) for c in rep["certificates"] if not c["pass"]]
    assert not failed, failed
