"""Pydantic models for the moduli space suite."""

from typing import List

from pydantic import ConfigDict, Field, field_validator

from quantum_cycles.interfaces.tool import BaseToolInput
from quantum_cycles.utils.validators import validate_ascending, validate_resolutions


class ModuliSuiteInput(BaseToolInput):
    """Input schema for the Kahler moduli space of half-weighted Bohr-Sommerfeld loops."""

    model_config = ConfigDict(json_schema_extra={"examples": [{"n": 64, "tau": 0.5, "pairs": 2}]})

    n: int = Field(default=128, ge=16, le=2048, description="Vertices of the base loop")
    tau: float = Field(default=0.5, gt=0, description="Scale of the Kahler structure")
    pairs: int = Field(default=3, ge=1, le=50, description="Random observable pairs")
    resolutions: List[int] = Field(default=[32, 64, 128], description="Loop sizes for the fourth-order ladder")
    min_order: float = Field(default=3.0, gt=0, description="Required slope of the ladder residuals against loop size")
    flow_time: float = Field(default=0.5, gt=0)
    flow_steps: int = Field(default=1000, ge=1, le=100_000)

    @field_validator("resolutions")
    @classmethod
    def _resolutions(cls, v: List[int]) -> List[int]:
        return validate_ascending(validate_resolutions(v, 16, "loop size"), "loop size")
