"""Pydantic models for the prequantum suite."""

from typing import List

from pydantic import ConfigDict, Field, field_validator

from quantum_cycles.interfaces.tool import BaseToolInput
from quantum_cycles.utils.validators import validate_ascending, validate_resolutions


class PrequantumSuiteInput(BaseToolInput):
    """Input schema for the prequantum suite on the torus."""

    model_config = ConfigDict(json_schema_extra={"examples": [{"grids": [64, 128, 256], "pairs": 3}]})

    grids: List[int] = Field(default=[64, 128, 256], description="Grid sizes n (n x n vertices)")
    level: int = Field(default=1, ge=1, le=8, description="Tensor power k")
    pairs: int = Field(default=3, ge=1, le=20, description="Random trig-polynomial pairs")
    amplitude: float = Field(default=0.05, gt=0, le=0.2, description="Scale of the random observables")

    @field_validator("grids")
    @classmethod
    def _grids(cls, v: List[int]) -> List[int]:
        return validate_ascending(validate_resolutions(v, 8, "grid"), "grid")
