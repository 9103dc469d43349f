import asyncio
import math

import pytest
from pydantic import ValidationError

from quantum_cycles.geometry.errors import DomainError, ScenarioError
from quantum_cycles.interfaces.tool import evaluate
from quantum_cycles.services.tool_service import ToolService
from quantum_cycles.tools import all_suites
from quantum_cycles.tools.bohr_sommerfeld.models import BohrSommerfeldSuiteInput
from quantum_cycles.tools.bohr_sommerfeld import BohrSommerfeldSuiteTool
from quantum_cycles.tools.bpu import BpuSuiteTool
from quantum_cycles.tools.bpu.models import BpuSuiteInput
from quantum_cycles.tools.moduli import ModuliSuiteTool
from quantum_cycles.tools.moduli.models import ModuliSuiteInput
from quantum_cycles.tools.prequantum import PrequantumSuiteTool
from quantum_cycles.tools.prequantum.models import PrequantumSuiteInput
from quantum_cycles.tools.presets import ObservableSpec, resolve_observable
from quantum_cycles.tools.projective_qm import ProjectiveSuiteTool
from quantum_cycles.tools.projective_qm.models import ProjectiveSuiteInput
from quantum_cycles.tools.toeplitz import ToeplitzSuiteTool
from quantum_cycles.tools.toeplitz.models import ToeplitzSuiteInput


def failed(report):
    return [c.name for c in report.checks if not c.passed]


@pytest.fixture
def service():
    s = ToolService()
    s.register_tools(all_suites())
    return s


def test_evaluate_modes_and_errors():
    assert evaluate("a", "x", lambda: 1e-12, 1e-10).passed
    assert not evaluate("a", "x", lambda: 1.0, 1e-10).passed
    assert evaluate("order", "x", lambda: 2.1, 1.8, mode="at_least").passed
    assert not evaluate("nan", "x", lambda: math.nan, 1.0).passed

    def boom():
        raise DomainError("outside the model")

    result = evaluate("err", "x", boom, 1.0)
    assert not result.passed
    assert "outside the model" in result.message


def test_projective_suite():
    report = ProjectiveSuiteTool().run(ProjectiveSuiteInput(dims=[2, 3], pairs=5, rays=20))
    assert failed(report) == []
    assert [row["dim"] for row in report.tables["dimensions"]] == [2, 3]


def test_prequantum_suite_records_every_grid():
    report = PrequantumSuiteTool().run(PrequantumSuiteInput(grids=[32, 64], pairs=1))
    names = {c.name: c for c in report.checks}
    assert set(names) == {"chern_number", "commutator_order", "hermiticity_order"}
    assert names["chern_number"].passed
    assert [row["grid"] for row in report.tables["residuals"]] == [32, 64]


def test_prequantum_suite_with_one_grid_skips_the_order():
    report = PrequantumSuiteTool().run(PrequantumSuiteInput(grids=[32], pairs=1))
    assert {c.name for c in report.checks} == {"chern_number", "commutator_residual"}
    assert report.passed


def test_toeplitz_suite():
    report = ToeplitzSuiteTool().run(ToeplitzSuiteInput(levels=[8, 16, 32], points=2, rays=1))
    assert failed(report) == []
    assert [row["k"] for row in report.tables["residuals"]] == [8, 16, 32]


def test_toeplitz_suite_flags_slow_decay():
    report = ToeplitzSuiteTool().run(ToeplitzSuiteInput(levels=[2, 3], points=1, rays=1))
    assert failed(report) == ["correspondence_slope"]


def test_bohr_sommerfeld_suite():
    report = BohrSommerfeldSuiteTool().run(BohrSommerfeldSuiteInput(levels=[2, 3, 5], n=32))
    assert failed(report) == []
    fibers = report.tables["fibers"]
    assert sum(r["model"] == "sphere" for r in fibers) == 1 + 2 + 4
    assert sum(r["model"] == "torus" for r in fibers) == 2 + 3 + 5


def test_moduli_suite():
    report = ModuliSuiteTool().run(ModuliSuiteInput(n=64, pairs=1, flow_steps=200))
    assert failed(report) == []
    assert [row["n"] for row in report.tables["fd4_ladder"]] == [32, 64, 128]
    ladder = {c.name: c for c in report.checks}["fd4_order"]
    assert ladder.tolerance == 3.0
    assert ladder.value >= 3.0


def test_bpu_suite():
    report = BpuSuiteTool().run(BpuSuiteInput(levels=[3, 4], n=64))
    assert failed(report) == []
    smooth = [r for r in report.tables["fibers"] if r["status"] == "smooth"]
    assert [(r["k"], r["monomial"]) for r in smooth] == [(3, 1), (3, 2), (4, 1), (4, 2), (4, 3)]
    poles = [r for r in report.tables["fibers"] if r["status"] == "pole"]
    assert all(r["overlap"] is None for r in poles)


def test_inputs_are_validated():
    with pytest.raises(ValidationError):
        BohrSommerfeldSuiteInput(levels=[0])
    with pytest.raises(ValidationError):
        PrequantumSuiteInput(grids=[64, 32])
    with pytest.raises(ValidationError):
        ToeplitzSuiteInput(levels=[4, 4])
    with pytest.raises(ValidationError):
        ProjectiveSuiteInput(dims=[2], unknown=1)
    with pytest.raises(ValidationError):
        ModuliSuiteInput(tol_scale=0.0)


def test_observable_presets():
    assert resolve_observable(ObservableSpec(kind="height")).name
    with pytest.raises(ScenarioError):
        resolve_observable(ObservableSpec(kind="linear", coefficients=[1.0]))
    with pytest.raises(ScenarioError):
        resolve_observable(ObservableSpec(kind="trig"))


def test_tool_service_executes_by_short_name(service):
    response = asyncio.run(service.execute_tool("bohr_sommerfeld", {"levels": [3], "n": 32}))
    payload = service._serialize_response(response)
    assert payload["suite"] == "bohr_sommerfeld_suite"
    assert payload["error"] is None
    assert all(c["passed"] for c in payload["checks"])


def test_tool_service_rejects_unknown_suites(service):
    with pytest.raises(ScenarioError):
        service.get_tool("hydrogen")
    with pytest.raises(ValidationError):
        asyncio.run(service.execute_tool("bpu", {"levels": [1]}))


def test_every_suite_publishes_its_schema(service):
    for name in service.names:
        schema = service.get_tool(name).get_schema()
        assert schema["name"] == name
        assert "tol_scale" in schema["input"]["properties"]
        assert "checks" in schema["output"]["properties"]
