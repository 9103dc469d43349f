"""Pydantic models for the Berezin-Toeplitz suite."""

from typing import List

from pydantic import ConfigDict, Field, field_validator

from quantum_cycles.interfaces.tool import BaseToolInput
from quantum_cycles.tools.presets import ObservableSpec
from quantum_cycles.utils.validators import validate_ascending, validate_resolutions


class ToeplitzSuiteInput(BaseToolInput):
    """Input schema for the Berezin-Toeplitz suite on the sphere."""

    model_config = ConfigDict(
        json_schema_extra={
            "examples": [
                {"levels": [4, 8, 16], "f": {"kind": "height"}, "g": {"kind": "coordinate", "index": 0}},
                {"levels": [8, 16, 32], "f": {"kind": "random_quadratic", "seed": 3}, "g": {"kind": "height"}},
            ]
        }
    )

    levels: List[int] = Field(default=[4, 8, 16, 32, 64], description="Ascending quantization levels k")
    f: ObservableSpec = Field(default_factory=lambda: ObservableSpec(kind="height"))
    g: ObservableSpec = Field(default_factory=lambda: ObservableSpec(kind="coordinate", index=0))
    points: int = Field(default=10, ge=1, le=1000, description="Random points for the lambda_k check")
    rays: int = Field(default=3, ge=1, le=100, description="Random rays for the Berezin symbol check")

    @field_validator("levels")
    @classmethod
    def _levels(cls, v: List[int]) -> List[int]:
        return validate_ascending(validate_resolutions(v, 2, "level"), "level")
