"""Half-weighted Bohr-Sommerfeld loops on the sphere as holomorphic sections.

Transport along a loop uses the north potential, the same gauge as the
spinor frame of :mod:`quantum_cycles.geometry.toeplitz`: in that frame the
level-``k`` connection reads ``d - i k sin(theta/2)**2 dphi``. A loop through
the south pole is outside both and is rejected.
"""

from typing import List, Literal, Optional, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field
from scipy.optimize import brentq

from quantum_cycles.geometry.bohr_sommerfeld import TOL_HOL, wrapped_distance
from quantum_cycles.geometry.errors import ClosureError, DegenerateImageError, DomainError, HolonomyUndefinedError
from quantum_cycles.geometry.loop_calculus import HalfWeight, LagrangianLoop, latitude, periodic_antiderivative
from quantum_cycles.geometry.moduli import ModuliPoint, critical_residual, isodrastic_flow, moduli_point
from quantum_cycles.geometry.observables import ClassicalObservable, height
from quantum_cycles.geometry.phase_space import PhaseModel
from quantum_cycles.geometry.projective_qm import KahlerConventions, Ray, symbol_field
from quantum_cycles.geometry.toeplitz import HolomorphicModel, holomorphic_model, orthonormal_sections, toeplitz_operator
from quantum_cycles.utils.logger import get_debug_logger

logger = get_debug_logger(__name__)

TOL_IMAGE = 1e-12
TOL_CRITICAL = 1e-8
SPHERE = PhaseModel(kind="sphere")


class PlanckianLift(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    loop: LagrangianLoop
    level: int
    phases: np.ndarray = Field(description="Unit-complex frame coefficient of the parallel section per vertex")
    closure_defect: float
    transport_residual: float

    def with_global_phase(self, c: complex) -> "PlanckianLift":
        return self.model_copy(update={"phases": self.phases * (c / abs(c))})


def planckian_lift(loop: LagrangianLoop, k: int, tol_hol: float = TOL_HOL) -> PlanckianLift:
    """Parallel unit section along ``loop``, pinned to ``1`` at vertex 0."""
    if loop.model.kind != "sphere":
        raise DomainError("Planckian lifts are built on the sphere model")
    if np.min(1.0 + loop.points[:, 2]) <= 0.0:
        raise HolonomyUndefinedError("Loop meets the south pole")
    density = loop.model.potential(loop.points, loop.tangent(), "north")
    action = float(np.mean(density))
    defect = wrapped_distance(k * action)
    if defect > tol_hol:
        raise ClosureError(f"Transport at level {k} does not close (defect {defect:.3e})", defect=defect)
    drift = periodic_antiderivative(density - action, loop.derivative)
    cumulative = action * loop.u + drift - drift[0]
    phases = np.exp(2j * np.pi * k * cumulative)
    rate = 2j * np.pi * k * density
    residual = np.max(np.abs(loop.d(phases) - rate * phases)) / max(1.0, np.max(np.abs(rate)))
    return PlanckianLift(loop=loop, level=k, phases=phases, closure_defect=defect,
                         transport_residual=float(residual))


def pairing_functional(pt: ModuliPoint, m: HolomorphicModel, lift: Optional[PlanckianLift] = None) -> np.ndarray:
    """``l_j = int_S <m_j, sigma> theta**2`` on the orthonormal monomials."""
    if pt.level != m.level:
        raise DomainError(f"Point of level {pt.level} paired with sections of level {m.level}")
    lift = lift or planckian_lift(pt.loop, pt.level, pt.tol_hol)
    basis = orthonormal_sections(m.level, pt.loop.points)
    return basis.T @ (np.conj(lift.phases) * pt.w) * pt.loop.du


def bpu_map(pt: ModuliPoint, m: HolomorphicModel, lift: Optional[PlanckianLift] = None) -> Ray:
    """Ray of the section ``s0`` with ``<s, s0> = l(s)`` for every holomorphic ``s``."""
    ell = pairing_functional(pt, m, lift)
    size = np.linalg.norm(ell)
    if size < TOL_IMAGE * pt.volume:
        raise DegenerateImageError(f"Pairing functional vanishes (norm {size:.3e})")
    return Ray.from_vector(np.conj(ell) / size)


class EigenstateCheck(BaseModel):
    is_critical: bool
    critical_residual: float
    eigen_residual: float
    expectation: float


def eigenstate_check(f: ClassicalObservable, pt: ModuliPoint, m: HolomorphicModel,
                     tol_critical: float = TOL_CRITICAL) -> EigenstateCheck:
    """Critical points of ``F_f`` against eigenvectors of the Toeplitz operator of ``f``."""
    crit = critical_residual(f, pt).total
    v = bpu_map(pt, m).vector
    A = toeplitz_operator(f, m).matrix
    mean = float(np.vdot(v, A @ v).real)
    residual = float(np.linalg.norm(A @ v - mean * v))
    return EigenstateCheck(is_critical=crit <= tol_critical, critical_residual=crit,
                           eigen_residual=residual, expectation=mean)


class FlowCorrespondence(BaseModel):
    scale: float = Field(description="c in dBPU(X_{F_f}) = c X_{Q_f}")
    relative_error: float


def flow_correspondence(f: ClassicalObservable, pt: ModuliPoint, m: HolomorphicModel, t: float = 1e-4,
                        steps: int = 4, scale: Optional[float] = None,
                        conv: KahlerConventions = KahlerConventions()) -> FlowCorrespondence:
    """Finite-difference image of the isodrastic flow against the projective flow of ``A_f``.

    With ``scale=None`` the constant is fitted here; otherwise the given one is
    reused and only the residual is measured.
    """
    v0 = bpu_map(pt, m).vector
    vt = bpu_map(isodrastic_flow(f, pt, t, steps), m).vector
    vt = vt * np.exp(-1j * np.angle(np.vdot(v0, vt)))
    dv = (vt - v0) / t
    dv = dv - np.vdot(v0, dv) * v0
    X = symbol_field(toeplitz_operator(f, m), Ray(vector=v0), conv)
    if scale is None:
        scale = float(np.vdot(X, dv).real / np.vdot(X, X).real)
    error = float(np.linalg.norm(dv - scale * X) / max(np.linalg.norm(dv), 1e-300))
    return FlowCorrespondence(scale=scale, relative_error=error)


class MetricWeight(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    volume: float
    adapted: HalfWeight


def metric_weight(loop: LagrangianLoop, riemannian: Literal["round", "kahler"] = "round",
                  sign: int = 1) -> MetricWeight:
    """Half-weight whose square is the arc-length density of a metric along the loop.

    ``round`` is the metric of the unit sphere in R^3. ``kahler`` is the model
    metric compatible with ``omega``; on the sphere it is the round metric over
    ``4 pi``, so its lengths are shorter by ``sqrt(4 pi)``.
    """
    t = loop.tangent()
    if riemannian == "round":
        speed = np.linalg.norm(t, axis=1)
    elif riemannian == "kahler":
        speed = np.sqrt(loop.model.metric(loop.points, t, t))
    else:
        raise DomainError(f"Unsupported metric {riemannian}")
    return MetricWeight(volume=loop.integrate(speed), adapted=HalfWeight.from_density(speed, sign=sign))


def latitude_of_area(area: float, n: int = 64) -> LagrangianLoop:
    return latitude(SPHERE, area, n)


def latitude_length(area: float, n: int = 64) -> float:
    return metric_weight(latitude_of_area(area, n)).volume


def latitudes_of_length(r: float, n: int = 64) -> List[Tuple[LagrangianLoop, HalfWeight]]:
    """Half-weighted latitudes of round length ``r``: two loops, two signs each."""
    top = latitude_length(0.5, n)
    if not 0.0 < r <= top + 1e-12:
        raise DomainError(f"No latitude has length {r}; the equator has {top:.6f}")
    if abs(r - top) < 1e-12:
        areas = [0.5]
    else:
        areas = [brentq(lambda a: latitude_length(a, n) - r, lo, hi, xtol=1e-14) for lo, hi in
                 ((1e-12, 0.5), (0.5, 1.0 - 1e-12))]
    out = []
    for area in areas:
        loop = latitude_of_area(area, n)
        for sign in (1, -1):
            out.append((loop, metric_weight(loop, sign=sign).adapted))
    return out


def fiber_table(k: int, n: int = 128, r: float = 2.0) -> pd.DataFrame:
    """BS latitudes ``m/k`` against monomial directions; the poles are reported as degenerate."""
    m = holomorphic_model(k)
    rows = [{"fiber": 0, "monomial": 0, "overlap": float("nan"), "eigen_residual": float("nan"), "status": "pole"}]
    for j in range(1, k):
        pt = moduli_point(latitude_of_area(j / k, n), k, r=r)
        v = bpu_map(pt, m).vector
        check = eigenstate_check(height(), pt, m)
        rows.append({
            "fiber": j,
            "monomial": int(np.argmax(np.abs(v))),
            "overlap": float(np.max(np.abs(v)) ** 2),
            "eigen_residual": check.eigen_residual,
            "status": "smooth",
        })
    rows.append({"fiber": k, "monomial": k, "overlap": float("nan"), "eigen_residual": float("nan"), "status": "pole"})
    logger.debug(f"fiber table k={k}: {k - 1} smooth fibers")
    return pd.DataFrame(rows)
