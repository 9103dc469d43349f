"""Pydantic models for the projective quantum mechanics suite."""

from typing import List

from pydantic import ConfigDict, Field, field_validator

from quantum_cycles.interfaces.tool import BaseToolInput
from quantum_cycles.utils.validators import validate_resolutions


class ProjectiveSuiteInput(BaseToolInput):
    """Input schema for the projective quantum mechanics suite."""

    model_config = ConfigDict(json_schema_extra={"examples": [{"dims": [2, 3], "pairs": 10, "rays": 50}]})

    dims: List[int] = Field(default=[2, 3, 4, 5, 6], description="Hilbert space dimensions", min_length=1)
    pairs: int = Field(default=20, ge=1, le=1000, description="Random Hermitian pairs per dimension")
    rays: int = Field(default=200, ge=1, le=10_000, description="Random rays per dimension")
    planck: float = Field(default=1.0, gt=0)

    @field_validator("dims")
    @classmethod
    def _dims(cls, v: List[int]) -> List[int]:
        return validate_resolutions(v, 2, "dimension")
