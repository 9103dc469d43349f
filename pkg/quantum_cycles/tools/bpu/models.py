"""Pydantic models for the Bohr-Sommerfeld to projective map suite."""

from typing import List

from pydantic import ConfigDict, Field, field_validator

from quantum_cycles.interfaces.tool import BaseToolInput
from quantum_cycles.utils.validators import validate_resolutions


class BpuSuiteInput(BaseToolInput):
    """Input schema for the BPU suite."""

    model_config = ConfigDict(json_schema_extra={"examples": [{"levels": [3, 4, 5], "n": 64}]})

    levels: List[int] = Field(default=list(range(3, 13)), description="Quantization levels k")
    n: int = Field(default=64, ge=16, le=1024, description="Vertices per latitude")
    volume: float = Field(default=2.0, gt=0, description="Half-weight volume on every fiber")

    @field_validator("levels")
    @classmethod
    def _levels(cls, v: List[int]) -> List[int]:
        return validate_resolutions(v, 2, "level")
