"""Prequantum holonomy of loops, Bohr-Sommerfeld detection and invariant half-weights."""

from typing import List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy.optimize import brentq

from quantum_cycles.geometry.errors import (
    ChartOverflowError,
    DegenerateFiberError,
    DomainError,
    HolonomyUndefinedError,
)
from quantum_cycles.geometry.loop_calculus import (
    HalfWeight,
    LagrangianLoop,
    fourier_interpolate,
    latitude,
    tangential_coefficient,
    torus_fiber,
    transport_density,
)
from quantum_cycles.geometry.observables import ClassicalObservable, coordinate, height
from quantum_cycles.geometry.phase_space import PhaseModel
from quantum_cycles.utils.logger import get_debug_logger

logger = get_debug_logger(__name__)

TOL_HOL = 1e-8
# closest an automatically charted loop may come to a singular pole
POLE_CLEARANCE = 1e-3


class HolonomyClass(BaseModel):
    model_config = ConfigDict(frozen=True)

    phase: complex
    jacobian_coordinate: float = Field(description="k * action mod 1, in [0, 1)")
    is_BS: bool
    action: float = Field(description="Level-one action, the integral of alpha")
    chart: str


def wrapped_distance(x: float) -> float:
    """Distance from ``x`` to the nearest integer."""
    return float(abs(x - np.round(x)))


def select_chart(loop: LagrangianLoop) -> Literal["north", "south"]:
    """Potential chart whose singular pole is farthest from the loop."""
    if loop.chart is not None:
        z = loop.points[:, 2]
        bad = (1.0 + z) if loop.chart == "north" else (1.0 - z)
        if np.min(bad) <= 0.0:
            raise HolonomyUndefinedError(f"Loop meets the singular pole of chart {loop.chart}")
        return loop.chart
    gap_south = np.min(np.linalg.norm(loop.points - np.array([0.0, 0.0, -1.0]), axis=1))
    gap_north = np.min(np.linalg.norm(loop.points - np.array([0.0, 0.0, 1.0]), axis=1))
    if max(gap_south, gap_north) < POLE_CLEARANCE:
        raise HolonomyUndefinedError("Loop passes through both poles; no potential chart covers it")
    return "north" if gap_south >= gap_north else "south"


def loop_action(loop: LagrangianLoop) -> Tuple[float, str]:
    """``(oint alpha, chart)`` by periodic trapezoid quadrature.

    Torus loops are integrated on the unwrapped lift with the twist correction
    for each cut crossing, which makes the result exact for periodic data.
    """
    model = loop.model
    if model.kind == "sphere":
        chart = select_chart(loop)
        return loop.integrate(model.potential(loop.points, loop.tangent(), chart)), chart
    if model.kind == "darboux":
        return loop.integrate(model.potential(loop.points, loop.tangent())), "darboux"
    steps = np.diff(np.vstack([loop.points, loop.points[:1] + np.array(loop.winding)]), axis=0)
    if np.max(np.abs(steps)) >= 0.5:
        raise HolonomyUndefinedError("Torus loop jumps across a cut without winding bookkeeping")
    m_p, m_q = loop.winding
    periodic = loop.periodic_part()
    p_tilde, q_tilde = periodic[:, 0], periodic[:, 1]
    q_dot = m_q + loop.d(q_tilde)
    action = loop.integrate(p_tilde * q_dot) + 0.5 * m_p * m_q - m_p * np.mean(q_tilde)
    return float(action), "torus"


def holonomy_class(loop: LagrangianLoop, k: int, tol_hol: float = TOL_HOL) -> HolonomyClass:
    """Holonomy ``exp(2 pi i k oint alpha)`` of the level-``k`` connection along ``loop``."""
    if k < 1:
        raise ValueError(f"Level must be >= 1, got {k}")
    action, chart = loop_action(loop)
    jac = float(np.mod(k * action, 1.0))
    is_bs = wrapped_distance(k * action) <= tol_hol
    logger.debug(f"holonomy: action={action:.12f} k={k} jac={jac:.3e} BS={is_bs}")
    return HolonomyClass(
        phase=complex(np.exp(2j * np.pi * k * action)),
        jacobian_coordinate=jac,
        is_BS=bool(is_bs),
        action=action,
        chart=chart,
    )


class LagrangianFibration(BaseModel):
    """Real polarization by level sets of one action observable."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    model: PhaseModel
    action_observable: ClassicalObservable
    base: Tuple[float, float] = Field(description="Interior of the base interval")
    n: int = Field(default=256, ge=16, description="Vertices per fiber loop")

    def fiber(self, t: float) -> LagrangianLoop:
        if self.model.kind == "sphere":
            return latitude(self.model, t, self.n, chart="north")
        return torus_fiber(self.model, t, self.n)

    def action(self, t: float) -> float:
        return loop_action(self.fiber(t))[0]

    def degenerate_fibers(self) -> List[float]:
        """Base points whose fibers are not smooth loops (the sphere's poles)."""
        return [0.0, 1.0] if self.model.kind == "sphere" else []


def sphere_fibration(model: PhaseModel, n: int = 256) -> LagrangianFibration:
    """Latitudes labelled by the omega-area of their north cap."""
    if model.kind != "sphere":
        raise DomainError("The height fibration lives on the sphere")
    return LagrangianFibration(model=model, action_observable=height(), base=(1e-6, 1.0 - 1e-6), n=n)


def torus_fibration(model: PhaseModel, n: int = 256) -> LagrangianFibration:
    """Fibers ``{p = const}`` of the torus, ``p`` in ``[0, 1)``."""
    if model.kind != "torus":
        raise DomainError("The momentum fibration lives on the torus")
    return LagrangianFibration(model=model, action_observable=coordinate(0, 2), base=(0.0, 1.0 - 1e-9), n=n)


def bs_fibers(fib: LagrangianFibration, k: int) -> List[float]:
    """Sorted base values of smooth fibers with ``k * action`` integral.

    The action is monotone on the base, so each integer in range owns exactly
    one root, located by Brent's method.
    """
    if k < 1:
        raise ValueError(f"Level must be >= 1, got {k}")
    lo, hi = fib.base
    a_lo, a_hi = k * fib.action(lo), k * fib.action(hi)
    if a_lo > a_hi:
        raise DegenerateFiberError("Action must increase along the base")
    roots = []
    for m in range(int(np.ceil(a_lo - 1e-12)), int(np.floor(a_hi)) + 1):
        if abs(a_lo - m) <= 1e-12:
            roots.append(lo)
            continue
        if abs(a_hi - m) <= 1e-12:
            continue
        roots.append(brentq(lambda t: k * fib.action(t) - m, lo, hi, xtol=1e-15, rtol=1e-15))
    logger.debug(f"bs_fibers k={k}: {len(roots)} smooth fibers")
    return sorted(roots)


def root_isolation(fib: LagrangianFibration, k: int, roots: List[float], window: float = 0.02,
                   samples: int = 65) -> bool:
    """True when every root is the only Bohr-Sommerfeld fiber in its window."""
    lo, hi = fib.base
    for r in roots:
        t = np.linspace(max(lo, r - window), min(hi, r + window), samples)
        levels = np.floor(np.array([k * fib.action(s) for s in t]) + 1e-12)
        if np.sum(np.abs(np.diff(levels))) > 1:
            return False
    return True


def invariant_half_weight(loop: LagrangianLoop, fib: LagrangianFibration, r: float = 2.0) -> HalfWeight:
    """Half-weight whose square is the flow-invariant measure ``dt`` of ``X_{f1}``.

    Along a regular fiber ``X_{f1} = a gamma'`` and ``dt = du / a``.
    """
    f1 = fib.action_observable
    values = loop.restrict(f1)
    spread = np.ptp(values) / max(1.0, np.max(np.abs(values)))
    if spread > 1e-6:
        raise DegenerateFiberError(f"Loop is not a level set of {f1.name} (spread {spread:.2e})")
    a = tangential_coefficient(loop, f1)
    if np.min(np.abs(a)) < 1e-10 or np.ptp(np.sign(a)) != 0:
        raise DegenerateFiberError("Action flow vanishes or reverses along the fiber")
    return HalfWeight.from_density(1.0 / np.abs(a), r)


def flow_invariance_residual(loop: LagrangianLoop, weight: HalfWeight, f: ClassicalObservable) -> float:
    """``max |(a_f w)'|``, the size of ``Lie_{W_f} theta**2``."""
    return float(np.max(np.abs(transport_density(loop, f, weight.w))))


def darboux_chart(base: LagrangianLoop, psi: np.ndarray, max_shift: float = 0.2) -> LagrangianLoop:
    """Graph of ``d psi`` over ``base`` in Weinstein normal coordinates.

    The vertex ``gamma(u)`` moves to ``gamma(u) - psi'(u) nu(u)``, so the
    deformation field ``V`` satisfies ``iota_V omega = d psi`` on the loop.
    """
    psi = np.asarray(psi, dtype=float)
    shift = -base.d(psi)[:, None] * base.normal()
    size = np.max(np.linalg.norm(shift, axis=1))
    if size > max_shift:
        raise ChartOverflowError(f"Graph of d psi leaves the tubular neighbourhood ({size:.3f} > {max_shift})")
    try:
        return base.with_points(base.model.project(base.points + shift))
    except DomainError as e:
        raise ChartOverflowError(str(e)) from e


def reparametrize(loop: LagrangianLoop, weight: Optional[HalfWeight], amplitude: float,
                  mode: int = 1) -> Tuple[LagrangianLoop, Optional[HalfWeight]]:
    """Resample along ``u(s) = s + amplitude sin(2 pi mode s) / (2 pi mode)``.

    The weight is transported as a density: ``w~(s) = w(u(s)) u'(s)``.
    """
    if not abs(amplitude) < 1.0:
        raise ValueError("Reparametrization amplitude must satisfy |amplitude| < 1")
    s = loop.u
    u = s + amplitude * np.sin(2.0 * np.pi * mode * s) / (2.0 * np.pi * mode)
    du_ds = 1.0 + amplitude * np.cos(2.0 * np.pi * mode * s)
    new_loop = loop.with_points(loop.model.project(loop.interpolate(u)))
    if weight is None:
        return new_loop, None
    w = fourier_interpolate(weight.w, u) * du_ds
    return new_loop, HalfWeight.from_density(w, sign=weight.sign)
