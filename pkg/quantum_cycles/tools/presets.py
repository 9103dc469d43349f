"""Named observable presets used by scenario files and suite inputs."""

from typing import List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from quantum_cycles.geometry.errors import ScenarioError
from quantum_cycles.geometry.observables import (
    ClassicalObservable,
    coordinate,
    height,
    linear,
    random_sphere_polynomial,
    trig_polynomial,
)


class ObservableSpec(BaseModel):
    """Observable given by name.

    ``height`` and ``coordinate`` live on the sphere, ``trig`` on the torus
    (terms ``(m_p, m_q, a, b)``), ``linear`` on either model depending on the
    length of ``coefficients``; ``random_quadratic`` draws from ``seed``.
    """

    model_config = ConfigDict(extra="forbid")

    kind: Literal["height", "coordinate", "linear", "trig", "random_quadratic"]
    index: int = Field(default=0, ge=0, le=2)
    coefficients: List[float] = Field(default_factory=list)
    terms: List[Tuple[int, int, float, float]] = Field(default_factory=list)
    seed: Optional[int] = None


def resolve_observable(spec: ObservableSpec) -> ClassicalObservable:
    if spec.kind == "height":
        return height()
    if spec.kind == "coordinate":
        return coordinate(spec.index, 3)
    if spec.kind == "linear":
        if len(spec.coefficients) not in (2, 3):
            raise ScenarioError("linear observables need 2 (torus) or 3 (sphere) coefficients")
        return linear(spec.coefficients)
    if spec.kind == "trig":
        if not spec.terms:
            raise ScenarioError("trig observables need at least one term")
        return trig_polynomial(spec.terms)
    return random_sphere_polynomial(np.random.default_rng(spec.seed or 0))
