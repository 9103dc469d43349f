"""Pydantic models for the Bohr-Sommerfeld census suite."""

from typing import List

from pydantic import ConfigDict, Field, field_validator

from quantum_cycles.interfaces.tool import BaseToolInput
from quantum_cycles.utils.validators import validate_resolutions


class BohrSommerfeldSuiteInput(BaseToolInput):
    """Input schema for the Bohr-Sommerfeld fiber census."""

    model_config = ConfigDict(json_schema_extra={"examples": [{"levels": [2, 3, 5], "n": 64}]})

    levels: List[int] = Field(default=list(range(2, 13)), description="Quantization levels k")
    n: int = Field(default=64, ge=16, le=4096, description="Vertices per fiber loop")

    @field_validator("levels")
    @classmethod
    def _levels(cls, v: List[int]) -> List[int]:
        return validate_resolutions(v, 1, "level")
