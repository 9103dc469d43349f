"""Interfaces for verification suites exposed as tools."""

import asyncio
import math
from abc import ABC, abstractmethod
from typing import Any, Callable, ClassVar, Dict, List, Literal, Optional, Type

from pydantic import BaseModel, ConfigDict, Field

from quantum_cycles.geometry.errors import QuantumCyclesError
from quantum_cycles.utils.logger import get_debug_logger

logger = get_debug_logger(__name__)


class BaseToolInput(BaseModel):
    """Base class for suite inputs; every suite is seeded and tolerance-scaled."""

    model_config = ConfigDict(extra="forbid")

    seed: int = Field(default=0, description="Seed for numpy.random.default_rng")
    tol_scale: float = Field(default=1.0, gt=0, description="Multiplier applied to every tolerance")


class CheckResult(BaseModel):
    """One verified property: measured value against its tolerance."""

    name: str
    anchor: str = Field(description="The result this check verifies, e.g. 'bracket theorem'")
    value: Optional[float] = None
    tolerance: Optional[float] = None
    passed: bool
    message: Optional[str] = None


class SuiteReport(BaseModel):
    """Output schema shared by every suite tool."""

    suite: str
    checks: List[CheckResult] = Field(default_factory=list)
    tables: Dict[str, List[Dict[str, Any]]] = Field(
        default_factory=dict, description="Named convergence tables, one record per row"
    )
    error: Optional[str] = Field(default=None, description="Set when the suite could not run at all")

    @property
    def passed(self) -> bool:
        return self.error is None and all(c.passed for c in self.checks)


def evaluate(name: str, anchor: str, compute: Callable[[], float], tolerance: float,
             mode: Literal["at_most", "at_least"] = "at_most") -> CheckResult:
    """Run ``compute`` and compare it with ``tolerance``; library errors become failed checks."""
    try:
        value = float(compute())
    except QuantumCyclesError as e:
        logger.debug(f"check {name} raised {type(e).__name__}: {e}")
        return CheckResult(name=name, anchor=anchor, tolerance=tolerance, passed=False,
                           message=f"{type(e).__name__}: {e}")
    if math.isnan(value):
        passed = False
    else:
        passed = value <= tolerance if mode == "at_most" else value >= tolerance
    return CheckResult(name=name, anchor=anchor, value=value, tolerance=tolerance, passed=passed)


class ToolContent(BaseModel):
    """Model for content in tool responses."""

    type: Literal["text", "json"] = "text"
    text: Optional[str] = None
    json_data: Optional[Dict[str, Any]] = None


class ToolResponse(BaseModel):
    """Model for tool responses."""

    content: List[ToolContent]

    @classmethod
    def from_model(cls, model: BaseModel) -> "ToolResponse":
        return cls(content=[ToolContent(type="json", json_data=model.model_dump(mode="json"))])

    @classmethod
    def from_text(cls, text: str) -> "ToolResponse":
        return cls(content=[ToolContent(type="text", text=text)])


class Tool(ABC):
    """Abstract base class for all suites.

    Subclasses implement the synchronous :meth:`run`; :meth:`execute` moves it
    off the event loop and turns a failure to set up the suite into a report
    carrying ``error`` instead of raising.
    """

    name: ClassVar[str]
    description: ClassVar[str]
    input_model: ClassVar[Type[BaseToolInput]]
    output_model: ClassVar[Type[BaseModel]] = SuiteReport
    # scenario sweep parameter -> input field
    sweepable: ClassVar[Dict[str, str]] = {}

    @abstractmethod
    def run(self, input_data: BaseToolInput) -> SuiteReport:
        """Run every check of the suite."""

    def run_safely(self, input_data: BaseToolInput) -> SuiteReport:
        try:
            return self.run(input_data)
        except QuantumCyclesError as e:
            logger.warning(f"Suite {self.name} failed: {type(e).__name__}: {e}")
            return SuiteReport(suite=self.name, error=f"{type(e).__name__}: {e}")

    async def execute(self, input_data: BaseToolInput) -> ToolResponse:
        """Execute the suite with validated input."""
        report = await asyncio.to_thread(self.run_safely, input_data)
        return ToolResponse.from_model(report)

    def get_schema(self) -> Dict[str, Any]:
        """Get JSON schema for the tool."""
        return {
            "name": self.name,
            "description": self.description,
            "input": self.input_model.model_json_schema(),
            "output": self.output_model.model_json_schema(),
        }
