import json

import pandas as pd
import pytest

from quantum_cycles.cli import EXIT_FAILED, EXIT_OK, EXIT_USAGE, main

PASSING = """
name = "census"

[[suites]]
suite = "bohr_sommerfeld"
params = { levels = [3], n = 32 }
"""

# residuals 2/(k+2) at k = 2, 3 decay slower than the required slope
FAILING = """
name = "too-coarse"

[[suites]]
suite = "toeplitz"
params = { levels = [2, 3], points = 1, rays = 1 }
"""


@pytest.fixture
def scenario(tmp_path):
    def write(text, name="scenario.toml"):
        path = tmp_path / name
        path.write_text(text)
        return str(path)

    return write


def test_run_writes_a_report(scenario, tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["run", scenario(PASSING), "--out", str(out), "--seed", "3"]) == EXIT_OK
    report = json.loads((out / "report.json").read_text())
    assert report["seed"] == 3
    assert (out / "bohr_sommerfeld_suite-fibers.csv").exists()
    assert "bohr_sommerfeld_suite.fiber_count" in capsys.readouterr().out


def test_failed_check_exits_with_one(scenario, tmp_path):
    assert main(["run", scenario(FAILING), "--out", str(tmp_path / "out")]) == EXIT_FAILED


def test_unusable_scenarios_exit_with_two(scenario, tmp_path, capsys):
    assert main(["run", scenario("name = "), "--out", str(tmp_path)]) == EXIT_USAGE
    assert main(["run", str(tmp_path / "absent.toml"), "--out", str(tmp_path)]) == EXIT_USAGE
    assert "error:" in capsys.readouterr().err


def test_empty_scenario_exits_cleanly(scenario, tmp_path):
    assert main(["run", scenario('name = "empty"'), "--out", str(tmp_path)]) == EXIT_OK
    assert json.loads((tmp_path / "report.json").read_text())["reports"] == []


def test_sweep_writes_one_row_per_value(scenario, tmp_path):
    out = tmp_path / "out"
    assert main(["sweep", "k", "2,3,5", scenario(PASSING), "--out", str(out), "--jobs", "2"]) == EXIT_OK
    table = pd.read_csv(out / "sweep-k.csv")
    assert list(table["k"]) == [2, 3, 5]
    assert list(table.columns[:2]) == ["k", "passed"]


def test_bad_arguments_exit_with_two(scenario):
    with pytest.raises(SystemExit) as exc:
        main(["sweep", "temperature", "1,2", scenario(PASSING)])
    assert exc.value.code == 2
    assert main(["sweep", "k", "a,b", scenario(PASSING)]) == EXIT_USAGE
