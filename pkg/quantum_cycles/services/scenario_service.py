"""Scenario files: loading, parallel suite runs, reports and parameter sweeps."""

import json
import os
import tomllib
import typing
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone
from importlib.resources import files
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from quantum_cycles.geometry.errors import ScenarioError
from quantum_cycles.interfaces.tool import SuiteReport
from quantum_cycles.services.tool_service import ToolService
from quantum_cycles.utils.formatters import records_to_csv, to_report_json
from quantum_cycles.utils.logger import get_debug_logger
from quantum_cycles.utils.validators import validate_sweep_parameter

logger = get_debug_logger(__name__)

SCENARIO_PACKAGE = "quantum_cycles.scenarios"


class SuiteRun(BaseModel):
    """One suite of a scenario with its parameter overrides."""

    model_config = ConfigDict(extra="forbid")

    suite: str
    params: Dict[str, Any] = Field(default_factory=dict)


class Scenario(BaseModel):
    model_config = ConfigDict(extra="forbid")

    name: str
    description: str = ""
    seed: int = 0
    tol_scale: float = Field(default=1.0, gt=0)
    suites: List[SuiteRun] = Field(default_factory=list)


class ScenarioReport(BaseModel):
    scenario: str
    seed: int
    tol_scale: float
    timestamp: str = Field(description="Excluded when comparing reports")
    reports: List[SuiteReport] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.reports)


def bundled_scenarios() -> List[str]:
    return sorted(p.name.removesuffix(".toml") for p in files(SCENARIO_PACKAGE).iterdir() if p.name.endswith(".toml"))


def bundled_text(name: str) -> str:
    """Raw TOML of a bundled scenario.

    Raises:
        ScenarioError: If no bundled scenario has that name
    """
    if name not in bundled_scenarios():
        raise ScenarioError(f"No bundled scenario {name!r}; available: {', '.join(bundled_scenarios())}")
    return files(SCENARIO_PACKAGE).joinpath(f"{name}.toml").read_text(encoding="utf-8")


def parse_scenario(text: str, fmt: str = "toml") -> Scenario:
    try:
        data = json.loads(text) if fmt == "json" else tomllib.loads(text)
        return Scenario.model_validate(data)
    except (tomllib.TOMLDecodeError, json.JSONDecodeError) as e:
        raise ScenarioError(f"Cannot parse scenario: {e}") from e
    except ValidationError as e:
        raise ScenarioError(f"Invalid scenario: {e}") from e


def load_scenario(source: str | Path) -> Scenario:
    """Load a scenario from a TOML or JSON file, or by bundled name.

    Raises:
        ScenarioError: If the file is missing, unreadable or invalid
    """
    path = Path(source)
    if not path.exists() and str(source) in bundled_scenarios():
        return parse_scenario(bundled_text(str(source)))
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ScenarioError(f"Cannot read scenario {source}: {e}") from e
    logger.debug(f"Loading scenario from {path}")
    return parse_scenario(text, "json" if path.suffix.lower() == ".json" else "toml")


def default_jobs() -> int:
    try:
        return max(1, int(os.getenv("QUANTUM_CYCLES_JOBS", "1")))
    except ValueError:
        return 1


def parse_sweep_value(text: str) -> int | float:
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError as e:
        raise ScenarioError(f"Sweep values must be numbers, got {text!r}") from e


class ScenarioService:
    """Runs scenarios against the registered suites."""

    def __init__(self, tool_service: ToolService, jobs: Optional[int] = None):
        self._tools = tool_service
        self.jobs = jobs or default_jobs()

    def _inputs(self, scenario: Scenario, seed: Optional[int], tol_scale: Optional[float]) -> List[tuple]:
        """Validate every suite's parameters before anything runs."""
        inputs = []
        for run in scenario.suites:
            tool = self._tools.get_tool(run.suite)
            params = {"seed": scenario.seed, "tol_scale": scenario.tol_scale, **run.params}
            if seed is not None:
                params["seed"] = seed
            if tol_scale is not None:
                params["tol_scale"] = tol_scale
            try:
                inputs.append((tool, tool.input_model.model_validate(params)))
            except ValidationError as e:
                raise ScenarioError(f"Invalid parameters for {tool.name}: {e}") from e
        return inputs

    def run(self, scenario: Scenario, seed: Optional[int] = None, tol_scale: Optional[float] = None) -> ScenarioReport:
        """Run every suite of ``scenario``; reports keep the scenario's suite order.

        Raises:
            ScenarioError: If a suite is unknown or its parameters are invalid
        """
        inputs = self._inputs(scenario, seed, tol_scale)
        logger.debug(f"Running scenario {scenario.name} with {len(inputs)} suites on {self.jobs} workers")

        def run_one(item) -> SuiteReport:
            tool, input_data = item
            try:
                return tool.run_safely(input_data)
            except Exception as e:
                logger.warning(f"Suite {tool.name} raised {type(e).__name__}: {e}")
                return SuiteReport(suite=tool.name, error=f"{type(e).__name__}: {e}")

        with ThreadPoolExecutor(max_workers=self.jobs) as pool:
            reports = list(pool.map(run_one, inputs))
        return ScenarioReport(
            scenario=scenario.name,
            seed=scenario.seed if seed is None else seed,
            tol_scale=scenario.tol_scale if tol_scale is None else tol_scale,
            timestamp=datetime.now(timezone.utc).isoformat(),
            reports=reports,
        )

    def write_report(self, report: ScenarioReport, out_dir: str | Path) -> List[Path]:
        """Write ``report.json`` and one CSV per suite table into ``out_dir``."""
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        path = out / "report.json"
        path.write_text(to_report_json(report.model_dump(mode="json")), encoding="utf-8")
        written = [path]
        for suite in report.reports:
            for table, rows in suite.tables.items():
                if not rows:
                    continue
                csv_path = out / f"{suite.suite}-{table}.csv"
                csv_path.write_text(records_to_csv(rows), encoding="utf-8")
                written.append(csv_path)
        logger.debug(f"Wrote {len(written)} report files to {out}")
        return written

    def _with_parameter(self, scenario: Scenario, parameter: str, value: int | float) -> Scenario:
        suites, matched = [], False
        for run in scenario.suites:
            tool = self._tools.get_tool(run.suite)
            field = tool.sweepable.get(parameter)
            if field is None:
                suites.append(run)
                continue
            matched = True
            annotation = tool.input_model.model_fields[field].annotation
            override = [value] if typing.get_origin(annotation) is list else value
            suites.append(SuiteRun(suite=run.suite, params={**run.params, field: override}))
        if not matched:
            raise ScenarioError(f"No suite in scenario {scenario.name!r} accepts parameter {parameter!r}")
        return scenario.model_copy(update={"suites": suites})

    def sweep(self, parameter: str, values: Sequence[int | float], scenario: Scenario,
              seed: Optional[int] = None, tol_scale: Optional[float] = None) -> pd.DataFrame:
        """Re-run ``scenario`` once per value; one row per value, columns ``<suite>.<check>``.

        Raises:
            ScenarioError: If the parameter is unknown or no suite accepts it
        """
        try:
            validate_sweep_parameter(parameter)
        except ValueError as e:
            raise ScenarioError(str(e)) from e
        if not values:
            raise ScenarioError("A sweep needs at least one value")
        rows = []
        for value in values:
            report = self.run(self._with_parameter(scenario, parameter, value), seed=seed, tol_scale=tol_scale)
            row: Dict[str, Any] = {parameter: value, "passed": report.passed}
            for suite in report.reports:
                for check in suite.checks:
                    row[f"{suite.suite}.{check.name}"] = check.value
            rows.append(row)
        return pd.DataFrame(rows)
