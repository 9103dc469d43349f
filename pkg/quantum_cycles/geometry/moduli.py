"""Discretized moduli space of half-weighted Bohr-Sommerfeld loops.

A tangent vector ``(psi1, psi2)`` at ``(S, theta)`` moves the loop by the
normal field ``V = -psi1' nu`` (so ``iota_V omega = d psi1`` on ``S``) and
rescales the half-weight as ``theta -> theta (1 + eps psi2)``. Both
components have zero mean against ``w = theta**2``.
"""

from typing import List, Literal, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.linalg import null_space

from quantum_cycles.geometry.bohr_sommerfeld import TOL_HOL, darboux_chart, holonomy_class
from quantum_cycles.geometry.errors import (
    DomainError,
    InvalidStructureError,
    InvalidTangentError,
    LevelError,
    SolverError,
)
from quantum_cycles.geometry.loop_calculus import (
    HalfWeight,
    LagrangianLoop,
    fourier_interpolate,
    periodic_antiderivative,
    tangential_coefficient,
    transport_density,
    weighted_mean,
)
from quantum_cycles.geometry.observables import ClassicalObservable, linear
from quantum_cycles.geometry.phase_space import FOUR_PI, integrate_flow
from quantum_cycles.utils.logger import get_debug_logger

logger = get_debug_logger(__name__)

DEFAULT_TAU = 0.5
DEFAULT_VOLUME = 2.0
TOL_MEAN = 1e-10
TOL_VOLUME = 1e-8


class ModuliPoint(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    loop: LagrangianLoop
    weight: HalfWeight
    level: int = Field(ge=1)
    tau: float = Field(default=DEFAULT_TAU, gt=0)
    r: float = Field(default=DEFAULT_VOLUME, gt=0, description="Volume int theta**2 of the half-weight")
    tol_hol: float = Field(default=TOL_HOL, gt=0, description="Holonomy tolerance for the BS check")

    @model_validator(mode="after")
    def _check(self) -> "ModuliPoint":
        if self.weight.theta.size != self.loop.n:
            raise DomainError("Half-weight and loop must share vertices")
        if abs(self.weight.volume - self.r) > TOL_VOLUME * self.r:
            raise DomainError(f"Half-weight has volume {self.weight.volume:.6g}, expected {self.r:.6g}")
        if not holonomy_class(self.loop, self.level, self.tol_hol).is_BS:
            raise InvalidStructureError(f"Loop is not Bohr-Sommerfeld at level {self.level}")
        return self

    @property
    def w(self) -> np.ndarray:
        return self.weight.w

    @property
    def volume(self) -> float:
        return self.weight.volume


def moduli_point(loop: LagrangianLoop, k: int, weight: Optional[HalfWeight] = None, tau: float = DEFAULT_TAU,
                 r: float = DEFAULT_VOLUME, **kwargs) -> ModuliPoint:
    """Point at level ``k``; a given weight is rescaled to volume ``r``."""
    if weight is None:
        weight = HalfWeight.uniform(loop.n, r)
    elif weight.theta.size == loop.n:
        weight = HalfWeight.from_density(weight.w, r, sign=weight.sign)
    return ModuliPoint(loop=loop, weight=weight, level=k, tau=tau, r=r, **kwargs)


class ModuliTangent(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    psi1: np.ndarray
    psi2: np.ndarray

    def stacked(self) -> np.ndarray:
        return np.concatenate([self.psi1, self.psi2])

    @classmethod
    def from_stacked(cls, v: np.ndarray) -> "ModuliTangent":
        n = v.size // 2
        return cls(psi1=v[:n], psi2=v[n:])

    def rotated(self) -> "ModuliTangent":
        """``I(psi1, psi2) = (-psi2, psi1)``."""
        return ModuliTangent(psi1=-self.psi2, psi2=self.psi1)

    def scaled(self, c: float) -> "ModuliTangent":
        return ModuliTangent(psi1=c * self.psi1, psi2=c * self.psi2)

    def norm(self) -> float:
        return float(np.linalg.norm(self.stacked()))


def tangent(pt: ModuliPoint, psi1: np.ndarray, psi2: np.ndarray) -> ModuliTangent:
    """Tangent vector with both components centered against ``w``."""
    w = pt.w
    psi1, psi2 = np.asarray(psi1, dtype=float), np.asarray(psi2, dtype=float)
    return ModuliTangent(psi1=psi1 - weighted_mean(psi1, w), psi2=psi2 - weighted_mean(psi2, w))


def check_tangent(pt: ModuliPoint, v: ModuliTangent) -> None:
    if v.psi1.size != pt.loop.n or v.psi2.size != pt.loop.n:
        raise InvalidTangentError("Tangent components must live on the loop vertices")
    for name, psi in (("psi1", v.psi1), ("psi2", v.psi2)):
        mean = pt.loop.integrate(psi * pt.w)
        if abs(mean) > TOL_MEAN * max(1.0, np.max(np.abs(psi)) * pt.volume):
            raise InvalidTangentError(f"{name} has nonzero weighted mean {mean:.3e}")


def random_tangent(pt: ModuliPoint, rng: np.random.Generator, modes: int = 3) -> ModuliTangent:
    """Smooth random tangent built from low Fourier modes."""
    u = pt.loop.u
    parts = []
    for _ in range(2):
        c = rng.normal(size=(modes, 2))
        parts.append(sum(a * np.cos(2 * np.pi * (m + 1) * u) + b * np.sin(2 * np.pi * (m + 1) * u)
                         for m, (a, b) in enumerate(c)))
    return tangent(pt, parts[0], parts[1])


class KahlerValues(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    omega: float
    metric: float
    Iv: ModuliTangent


def moduli_omega(pt: ModuliPoint, v: ModuliTangent, w: ModuliTangent) -> float:
    return pt.loop.integrate((v.psi1 * w.psi2 - v.psi2 * w.psi1) * pt.w)


def moduli_metric(pt: ModuliPoint, v: ModuliTangent, w: ModuliTangent) -> float:
    return pt.loop.integrate((v.psi1 * w.psi1 + v.psi2 * w.psi2) * pt.w)


def kahler_eval(pt: ModuliPoint, v: ModuliTangent, w: ModuliTangent) -> KahlerValues:
    check_tangent(pt, v)
    check_tangent(pt, w)
    return KahlerValues(omega=moduli_omega(pt, v, w), metric=moduli_metric(pt, v, w), Iv=v.rotated())


def induced_function(f: ClassicalObservable, pt: ModuliPoint) -> float:
    """``F_f = tau * int f|_S theta**2``."""
    return pt.tau * pt.loop.integrate(pt.loop.restrict(f) * pt.w)


def dynamical_field(f: ClassicalObservable, pt: ModuliPoint) -> ModuliTangent:
    """Velocity of the isodrastic flow of ``f``: ``(f|_S - mean, -1/2 (a_f w)' / w)``."""
    values = pt.loop.restrict(f)
    return ModuliTangent(
        psi1=values - weighted_mean(values, pt.w),
        psi2=-0.5 * transport_density(pt.loop, f, pt.w) / pt.w,
    )


def differential(f: ClassicalObservable, pt: ModuliPoint) -> np.ndarray:
    """Covector of ``dF_f`` on stacked tangents."""
    loop, w = pt.loop, pt.w
    c1 = pt.tau * transport_density(loop, f, w) * loop.du
    c2 = 2.0 * pt.tau * loop.restrict(f) * w * loop.du
    return np.concatenate([c1, c2])


def _omega_matrix(pt: ModuliPoint) -> np.ndarray:
    n = pt.loop.n
    Wd = np.diag(pt.w * pt.loop.du)
    Z = np.zeros((n, n))
    return np.block([[Z, Wd], [-Wd, Z]])


def _zero_mean_basis(pt: ModuliPoint) -> np.ndarray:
    n = pt.loop.n
    row = pt.w * pt.loop.du
    constraints = np.zeros((2, 2 * n))
    constraints[0, :n] = row
    constraints[1, n:] = row
    return null_space(constraints)


def _solve_field(pt: ModuliPoint, Q: np.ndarray, load: np.ndarray) -> ModuliTangent:
    """Solve ``Omega(X, q_j) = load_j`` for the columns ``q_j`` of ``Q``."""
    M = Q.T @ _omega_matrix(pt) @ Q
    s = np.linalg.svd(M, compute_uv=False)
    if s[-1] <= 1e-12 * s[0]:
        raise SolverError(f"Discretized moduli form is singular (condition {s[0] / max(s[-1], 1e-300):.2e})")
    y, *_ = np.linalg.lstsq(M.T, load, rcond=None)
    return ModuliTangent.from_stacked(Q @ y)


def hamiltonian_field(f: ClassicalObservable, pt: ModuliPoint) -> ModuliTangent:
    """Solve ``Omega(X, v) = dF_f(v)`` on the zero-mean tangent space."""
    Q = _zero_mean_basis(pt)
    return _solve_field(pt, Q, Q.T @ differential(f, pt))


def central_identity_residual(f: ClassicalObservable, pt: ModuliPoint) -> float:
    """``||X_{F_f} - 2 tau Theta(f)|| / scale``."""
    X = hamiltonian_field(f, pt).stacked()
    target = dynamical_field(f, pt).scaled(2.0 * pt.tau).stacked()
    return float(np.linalg.norm(X - target) / max(1.0, np.linalg.norm(target)))


def displaced(pt: ModuliPoint, v: ModuliTangent, eps: float, tol_hol: float = 1e-5, level: int = 1) -> ModuliPoint:
    """Point reached by moving ``eps`` along ``v`` in the Darboux chart of the loop.

    The level-``k`` chart reads ``psi1`` against ``k omega``, so the loop
    moves along the graph of ``d psi1 / k``.
    """
    loop = darboux_chart(pt.loop, eps * v.psi1 / level)
    weight = HalfWeight.from_density(pt.w * (1.0 + eps * v.psi2) ** 2, sign=pt.weight.sign)
    return ModuliPoint(loop=loop, weight=weight, level=pt.level, tau=pt.tau, r=pt.r,
                       tol_hol=max(tol_hol, pt.tol_hol))


def differential_check(f: ClassicalObservable, pt: ModuliPoint, v: ModuliTangent,
                       eps: float = 1e-6) -> Tuple[float, float]:
    """``(FD derivative of F_f along v, Omega(X_{F_f}, v))``."""
    check_tangent(pt, v)
    fd = (induced_function(f, displaced(pt, v, eps)) - induced_function(f, displaced(pt, v, -eps))) / (2 * eps)
    return fd, moduli_omega(pt, hamiltonian_field(f, pt), v)


def restricted_bracket_residual(f: ClassicalObservable, g: ClassicalObservable, loop: LagrangianLoop,
                                shear: Optional[np.ndarray] = None) -> np.ndarray:
    """Pointwise ``{f, g}|_S - (a_g f' - a_f g')`` for the transversal ``nu + shear gamma'``."""
    a_f, a_g = tangential_coefficient(loop, f, shear), tangential_coefficient(loop, g, shear)
    f_dot, g_dot = loop.d(loop.restrict(f)), loop.d(loop.restrict(g))
    return loop.model.poisson(f, g, loop.points) - (a_g * f_dot - a_f * g_dot)


class BracketCheck(BaseModel):
    lhs: float
    rhs: float
    restricted_residual: float = Field(description="max pointwise residual of the restricted identity")
    transversal_spread: float = Field(description="difference of the restricted identity between transversals")


def bracket_check(f: ClassicalObservable, g: ClassicalObservable, pt: ModuliPoint) -> BracketCheck:
    """``Omega(X_{F_f}, X_{F_g})`` against ``2 tau F_{f,g}``."""
    lhs = moduli_omega(pt, hamiltonian_field(f, pt), hamiltonian_field(g, pt))
    rhs = 2.0 * pt.tau * induced_function(pt.loop.model.bracket_observable(f, g), pt)
    plain = restricted_bracket_residual(f, g, pt.loop)
    sheared = restricted_bracket_residual(f, g, pt.loop, np.sin(2.0 * np.pi * pt.loop.u))
    return BracketCheck(
        lhs=lhs,
        rhs=rhs,
        restricted_residual=float(max(np.max(np.abs(plain)), np.max(np.abs(sheared)))),
        transversal_spread=float(np.max(np.abs(plain - sheared))),
    )


class CriticalResidual(BaseModel):
    level_variance: float
    transport: float

    @property
    def total(self) -> float:
        return self.level_variance + self.transport


def critical_residual(f: ClassicalObservable, pt: ModuliPoint) -> CriticalResidual:
    """Weighted variance of ``f|_S`` plus ``max |Lie_{W_f} theta**2|``."""
    values = pt.loop.restrict(f)
    mean = weighted_mean(values, pt.w)
    return CriticalResidual(
        level_variance=weighted_mean((values - mean) ** 2, pt.w),
        transport=float(np.max(np.abs(transport_density(pt.loop, f, pt.w)))),
    )


def isodrastic_flow(f: ClassicalObservable, pt: ModuliPoint, t: float, steps: int,
                    method: Literal["midpoint", "rk4"] = "midpoint") -> ModuliPoint:
    """Carry the loop along the flow of ``X_f``; the weight rides along in the parameter."""
    if t == 0.0:
        return pt
    points = integrate_flow(pt.loop.model, f, pt.loop.points, t, steps, method)
    return ModuliPoint(loop=pt.loop.with_points(points), weight=pt.weight, level=pt.level, tau=pt.tau, r=pt.r,
                       tol_hol=max(pt.tol_hol, 1e-6))


def flow_derivative_check(f: ClassicalObservable, g: ClassicalObservable, pt: ModuliPoint,
                          dt: float = 1e-4, steps: int = 4) -> Tuple[float, float]:
    """``(d/dt F_g along the flow of f, {F_g, F_f} / 2 tau)``."""
    ahead = induced_function(g, isodrastic_flow(f, pt, dt, steps))
    behind = induced_function(g, isodrastic_flow(f, pt, -dt, steps))
    bracket = moduli_omega(pt, hamiltonian_field(g, pt), hamiltonian_field(f, pt))
    return (ahead - behind) / (2 * dt), bracket / (2.0 * pt.tau)


def tau_for_level(k: int, hbar: float) -> float:
    """``tau = k hbar / 2``, so that ``2 tau / k = hbar``."""
    return 0.5 * k * hbar


class LevelBrackets(BaseModel):
    bracket_k: float
    bracket_1: float

    @property
    def ratio(self) -> float:
        return self.bracket_k / self.bracket_1 if self.bracket_1 != 0 else 0.0


def chart_fields(fs: Sequence[ClassicalObservable], pt: ModuliPoint, level: int = 1,
                 eps: float = 1e-5) -> List[ModuliTangent]:
    """Hamiltonian fields of ``F_f`` in the level-``level`` Darboux chart.

    Each ``dF_f(q)`` is a fourth-order central difference of ``F_f`` along
    ``displaced(..., level=level)``; the chart carries ``Omega_level`` with
    the level-one expression.
    """
    Q = _zero_mean_basis(pt)
    loads = np.zeros((len(fs), Q.shape[1]))
    for j, q in enumerate(Q.T):
        v = ModuliTangent.from_stacked(q)
        values = []
        for step in (2.0, 1.0, -1.0, -2.0):
            moved = displaced(pt, v, step * eps, tol_hol=1e-3, level=level)
            values.append([induced_function(f, moved) for f in fs])
        a2, a1, b1, b2 = np.array(values)
        loads[:, j] = (8.0 * (a1 - b1) - (a2 - b2)) / (12.0 * eps)
    return [_solve_field(pt, Q, load) for load in loads]


def level_rescale(f: ClassicalObservable, g: ClassicalObservable, pt: ModuliPoint, k: int) -> LevelBrackets:
    """``{F_f, F_g}`` measured in the level-``k`` chart next to the level-one chart."""
    if k < 1:
        raise LevelError(f"Level must be >= 1, got {k}")
    if not holonomy_class(pt.loop, 1, pt.tol_hol).is_BS:
        raise LevelError("Point is not Bohr-Sommerfeld at level 1")
    bracket_1 = moduli_omega(pt, *chart_fields([f, g], pt, 1))
    bracket_k = moduli_omega(pt, *chart_fields([f, g], pt, k))
    logger.debug(f"level rescaling k={k}: {bracket_k:.6e} vs {bracket_1:.6e}")
    return LevelBrackets(bracket_k=bracket_k, bracket_1=bracket_1)


def surjectivity_witness(target: ModuliTangent, pt: ModuliPoint, radius: float = 0.2) -> ClassicalObservable:
    """Observable supported near the loop whose dynamical field is ``target``.

    In tubular coordinates ``x = gamma(u) + s nu(u)`` it reads
    ``(psi1(u) + s beta(u)) chi(d)`` with ``beta w = -2 int psi2 w`` and
    ``chi`` a bump in the distance ``d`` to the loop, flat to second order
    at ``d = 0`` and zero beyond ``radius``. So ``f|_S = psi1`` and
    ``a_f = beta``. ``radius`` must stay below the tubular radius of the loop.
    """
    check_tangent(pt, target)
    if radius <= 0:
        raise DomainError(f"Witness radius must be positive, got {radius}")
    loop, w = pt.loop, pt.w
    beta = -2.0 * periodic_antiderivative(target.psi2 * w, loop.derivative) / w
    model = loop.model

    def func(X: np.ndarray) -> np.ndarray:
        shape = X.shape[:-1]
        flat = X.reshape(-1, X.shape[-1])
        u = loop.nearest_parameter(flat)
        base = loop.interpolate(u)
        d2 = np.sum((flat - base) ** 2, axis=-1) / radius**2
        inside = d2 < 1.0
        values = np.zeros(flat.shape[0])
        if np.any(inside):
            ui, Xi = u[inside], flat[inside]
            s = model.omega(Xi, loop.interpolate(ui, 1), Xi - base[inside])
            chi = np.exp(1.0 - 1.0 / (1.0 - d2[inside]))
            values[inside] = (fourier_interpolate(target.psi1, ui) + s * fourier_interpolate(beta, ui)) * chi
        return values.reshape(shape)

    return ClassicalObservable(name="witness", dim=model.ambient_dim, func=func)


class QuasiClassicalObject(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    kind: Literal["number", "field"]
    value: Optional[float] = None
    field: Optional[np.ndarray] = Field(default=None, description="Normal deformation -(f|_S)' nu per vertex")


def quasiclassical_object(f: ClassicalObservable, loop: LagrangianLoop, tol: float = 1e-10) -> QuasiClassicalObject:
    values = loop.restrict(f)
    if np.var(values) <= tol:
        return QuasiClassicalObject(kind="number", value=float(np.mean(values)))
    return QuasiClassicalObject(kind="field", field=-loop.d(values)[:, None] * loop.normal())


class CommutatorCheck(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    commutator: np.ndarray = Field(description="omega(gamma', Delta) / eps**2 per vertex")
    bracket: np.ndarray = Field(description="(f, g)|_S derivative per vertex")
    relative_error: float


def quasiclassical_bracket_check(f: ClassicalObservable, g: ClassicalObservable, loop: LagrangianLoop,
                                 eps: float = 1e-3, steps: int = 4) -> CommutatorCheck:
    """Compare the flow commutator on the loop with the object of ``{f, g}``.

    ``phi^g_{-e} phi^f_{-e} phi^g_e phi^f_e`` displaces each vertex by
    ``-eps**2 X_{f,g}``, whose normal part is ``(f, g)|_S'``.
    """
    model = loop.model
    X = loop.points
    for h, t in ((f, eps), (g, eps), (f, -eps), (g, -eps)):
        X = integrate_flow(model, h, X, t, steps)
    delta = X - loop.points
    commutator = model.omega(loop.points, loop.tangent(), delta) / eps**2
    bracket = loop.d(loop.restrict(model.bracket_observable(f, g)))
    scale = max(np.max(np.abs(bracket)), 1e-300)
    return CommutatorCheck(
        commutator=commutator,
        bracket=bracket,
        relative_error=float(np.max(np.abs(commutator - bracket)) / scale),
    )


class KernelWitness(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    value: float
    point: ModuliPoint


def kernel_witness(f: ClassicalObservable, center: np.ndarray, pt: ModuliPoint) -> KernelWitness:
    """Rotate the loop through ``center`` by a rigid isodrastic motion and evaluate ``F_f`` there."""
    loop = pt.loop
    if loop.model.kind != "sphere":
        raise DomainError("Kernel witnesses are built from rotations of the sphere")
    center = np.asarray(center, dtype=float)
    center = center / np.linalg.norm(center)
    i0 = int(np.argmax(loop.points @ center))
    axis = np.cross(loop.points[i0], center)
    size = np.linalg.norm(axis)
    if size < 1e-12:
        return KernelWitness(value=induced_function(f, pt), point=pt)
    angle = float(np.arctan2(size, loop.points[i0] @ center))
    # the flow of a.x rotates about a at angular speed 4 pi
    moved = isodrastic_flow(linear(axis / size), pt, angle / FOUR_PI, max(16, int(100 * angle)))
    return KernelWitness(value=induced_function(f, moved), point=moved)


class CriticalLinearization(BaseModel):
    kernel_dim: int
    invariance_residual: float
    smallest_singular_value: float


def critical_linearization(f: ClassicalObservable, pt: ModuliPoint, eps: float = 1e-6,
                           tol: float = 1e-6) -> CriticalLinearization:
    """Linearize ``Theta(f)`` at ``pt`` by central differences and test ``I``-invariance of its kernel."""
    Q = _zero_mean_basis(pt)
    columns = []
    for q in Q.T:
        v = ModuliTangent.from_stacked(q)
        plus = dynamical_field(f, displaced(pt, v, eps)).stacked()
        minus = dynamical_field(f, displaced(pt, v, -eps)).stacked()
        columns.append(Q.T @ (plus - minus) / (2 * eps))
    L = np.array(columns).T
    _, s, Vt = np.linalg.svd(L)
    K = Vt[s <= tol * s[0]].T
    n = pt.loop.n
    I = np.block([[np.zeros((n, n)), -np.eye(n)], [np.eye(n), np.zeros((n, n))]])
    Iq = Q.T @ I @ Q
    residual = 0.0
    if K.shape[1] > 0:
        image = Iq @ K
        residual = float(np.linalg.norm(image - K @ (K.T @ image)))
    logger.debug(f"critical linearization: kernel {K.shape[1]}, smallest sv {s[-1]:.3e}")
    return CriticalLinearization(kernel_dim=int(K.shape[1]), invariance_residual=residual,
                                 smallest_singular_value=float(s[-1]))


def isolation_check(f: ClassicalObservable, pt: ModuliPoint, rng: np.random.Generator, directions: int = 20,
                    eps: float = 1e-4) -> bool:
    """True when ``|X_{F_f}|`` grows in every sampled direction away from ``pt``."""
    base = hamiltonian_field(f, pt).norm()
    for _ in range(directions):
        v = random_tangent(pt, rng)
        v = v.scaled(1.0 / v.norm())
        if hamiltonian_field(f, displaced(pt, v, eps)).norm() <= base:
            return False
    return True
