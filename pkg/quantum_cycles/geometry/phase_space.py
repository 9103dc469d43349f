"""Classical phase models: symplectic data, Hamiltonian calculus and flows.

Conventions used everywhere in the package:

* ``iota(X_f) omega = df`` and ``{f, g} = omega(X_f, X_g) = df(X_g)``;
* the sphere carries ``omega = sigma / 4 pi`` (total area 1), so ``{x, y} = 4 pi z``;
* the torus and Darboux charts carry ``omega = dp ^ dq`` and ``alpha = p dq``.

Points are handled in ambient coordinates internally; ``PhasePoint`` is the
chart-level view exposed to callers.
"""

from typing import Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from quantum_cycles.geometry.errors import DomainError, FlowEscapeError
from quantum_cycles.geometry.observables import ClassicalObservable
from quantum_cycles.utils.logger import get_debug_logger

logger = get_debug_logger(__name__)

FOUR_PI = 4.0 * np.pi
ModelKind = Literal["sphere", "torus", "darboux"]
ChartId = Literal["north", "south", "torus", "darboux"]

# Polar charts stop short of the opposite pole.
POLAR_LIMIT = np.pi - 1e-9


class PhasePoint(BaseModel):
    """A chart id plus two chart coordinates.

    Sphere charts use ``(theta, phi)`` with ``theta`` measured from the chart's
    own pole; planar charts use ``(p, q)``.
    """

    model_config = ConfigDict(frozen=True)

    chart: ChartId
    coords: Tuple[float, float]


class PhaseModel(BaseModel):
    """One of the supported classical phase spaces at a fixed level ``k``."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: ModelKind = Field(description="sphere, torus or darboux")
    level: int = Field(default=1, ge=1, description="Tensor power k, omega_k = k omega")
    planck: float = Field(default=1.0, gt=0, description="Planck constant h")
    p_range: Tuple[float, float] = Field(default=(0.0, 1.0))
    q_range: Tuple[float, float] = Field(default=(0.0, 1.0))
    quad_n: int = Field(default=256, ge=4, description="Quadrature resolution per axis")

    @field_validator("p_range", "q_range")
    @classmethod
    def _ordered(cls, v: Tuple[float, float]) -> Tuple[float, float]:
        if not v[0] < v[1]:
            raise ValueError(f"Empty coordinate range: {v}")
        return v

    @property
    def ambient_dim(self) -> int:
        return 3 if self.kind == "sphere" else 2

    @property
    def is_planar(self) -> bool:
        return self.kind != "sphere"

    @property
    def total_area(self) -> float:
        if self.kind == "darboux":
            return (self.p_range[1] - self.p_range[0]) * (self.q_range[1] - self.q_range[0])
        return 1.0

    # -- charts ---------------------------------------------------------

    def validate_point(self, pt: PhasePoint) -> None:
        a, b = pt.coords
        if self.kind == "sphere":
            if pt.chart not in ("north", "south"):
                raise DomainError(f"Chart {pt.chart!r} does not belong to the sphere")
            if not 0.0 <= a <= POLAR_LIMIT:
                raise DomainError(f"Polar angle {a} outside [0, pi) of chart {pt.chart}")
        elif self.kind == "torus":
            if pt.chart != "torus":
                raise DomainError(f"Chart {pt.chart!r} does not belong to the torus")
            if not (0.0 <= a < 1.0 and 0.0 <= b < 1.0):
                raise DomainError(f"Torus coordinates {pt.coords} outside [0, 1)^2")
        else:
            if pt.chart != "darboux":
                raise DomainError(f"Chart {pt.chart!r} does not belong to the Darboux chart")
            if not self.inside_rectangle(np.array([a, b])):
                raise DomainError(f"Point {pt.coords} outside the Darboux rectangle")

    def inside_rectangle(self, X: np.ndarray) -> np.ndarray:
        p, q = X[..., 0], X[..., 1]
        return (
            (self.p_range[0] <= p) & (p <= self.p_range[1])
            & (self.q_range[0] <= q) & (q <= self.q_range[1])
        )

    def embed(self, pt: PhasePoint) -> np.ndarray:
        """Ambient coordinates of a validated chart point."""
        self.validate_point(pt)
        a, b = pt.coords
        if self.kind != "sphere":
            return np.array([a, b], dtype=float)
        sign = 1.0 if pt.chart == "north" else -1.0
        return np.array([np.sin(a) * np.cos(b), np.sin(a) * np.sin(b), sign * np.cos(a)])

    def chart_point(self, X: np.ndarray, prefer: Optional[ChartId] = None) -> PhasePoint:
        """Chart view of an ambient point, keeping ``prefer`` when it is safe."""
        X = np.asarray(X, dtype=float)
        if self.kind == "torus":
            return PhasePoint(chart="torus", coords=tuple(float(c) for c in np.mod(X, 1.0)))
        if self.kind == "darboux":
            pt = PhasePoint(chart="darboux", coords=(float(X[0]), float(X[1])))
            self.validate_point(pt)
            return pt
        n = X / np.linalg.norm(X)
        chart = prefer if prefer in ("north", "south") else None
        if chart is None or (chart == "north" and n[2] < -0.9) or (chart == "south" and n[2] > 0.9):
            chart = "north" if n[2] >= 0.0 else "south"
        sign = 1.0 if chart == "north" else -1.0
        theta = float(np.arccos(np.clip(sign * n[2], -1.0, 1.0)))
        phi = float(np.arctan2(n[1], n[0]))
        return PhasePoint(chart=chart, coords=(theta, phi))

    def project(self, X: np.ndarray) -> np.ndarray:
        """Retract ambient points back onto the model."""
        if self.kind == "sphere":
            return X / np.linalg.norm(X, axis=-1, keepdims=True)
        return X

    # -- symplectic structure -------------------------------------------

    def omega(self, X: np.ndarray, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        if self.kind == "sphere":
            n = self.project(X)
            return np.einsum("...i,...i->...", n, np.cross(u, v)) / FOUR_PI
        return u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0]

    def complex_structure(self, X: np.ndarray, v: np.ndarray) -> np.ndarray:
        """Compatible almost complex structure, ``omega(u, I v) = g(u, v)``."""
        if self.kind == "sphere":
            return np.cross(self.project(X), v)
        return np.stack([-v[..., 1], v[..., 0]], axis=-1)

    def metric(self, X: np.ndarray, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        dot = np.einsum("...i,...i->...", u, v)
        return dot / FOUR_PI if self.kind == "sphere" else dot

    def potential(self, X: np.ndarray, V: np.ndarray, chart: ChartId = "north") -> np.ndarray:
        """Symplectic potential ``alpha(V)`` at ``X`` in the given chart."""
        if self.kind != "sphere":
            return X[..., 0] * V[..., 1]
        n = self.project(X)
        swirl = n[..., 0] * V[..., 1] - n[..., 1] * V[..., 0]
        if chart == "south":
            return -swirl / (FOUR_PI * (1.0 - n[..., 2]))
        return swirl / (FOUR_PI * (1.0 + n[..., 2]))

    def hamiltonian_vector(self, f: ClassicalObservable, X: np.ndarray) -> np.ndarray:
        """``X_f`` at ambient points ``X``."""
        G = f.differential(self.project(X))
        if self.kind == "sphere":
            return FOUR_PI * np.cross(G, self.project(X))
        return np.stack([G[..., 1], -G[..., 0]], axis=-1)

    def poisson(self, f: ClassicalObservable, g: ClassicalObservable, X: np.ndarray) -> np.ndarray:
        """``{f, g} = df(X_g)`` evaluated at ambient points."""
        X = np.asarray(X, dtype=float)
        Gf = f.differential(self.project(X))
        Gg = g.differential(self.project(X))
        if self.kind == "sphere":
            return FOUR_PI * np.einsum("...i,...i->...", self.project(X), np.cross(Gf, Gg))
        return Gf[..., 0] * Gg[..., 1] - Gf[..., 1] * Gg[..., 0]

    def bracket_observable(self, f: ClassicalObservable, g: ClassicalObservable) -> ClassicalObservable:
        """``{f, g}`` as an observable (finite-difference differential)."""
        return ClassicalObservable(
            name=f"{{{f.name},{g.name}}}",
            dim=self.ambient_dim,
            func=lambda X: self.poisson(f, g, X),
        )

    # -- quadrature -----------------------------------------------------

    def liouville_quadrature(self, n: Optional[int] = None) -> Tuple[np.ndarray, np.ndarray]:
        """Product rule ``(nodes, weights)`` with weights summing to the total area."""
        n = n or self.quad_n
        if self.kind == "sphere":
            z, wz = np.polynomial.legendre.leggauss(n)
            phi = 2.0 * np.pi * (np.arange(2 * n) + 0.5) / (2 * n)
            Z, PHI = np.meshgrid(z, phi, indexing="ij")
            s = np.sqrt(1.0 - Z**2)
            nodes = np.stack([s * np.cos(PHI), s * np.sin(PHI), Z], axis=-1)
            weights = np.repeat(wz[:, None] / 2.0, 2 * n, axis=1) / (2 * n)
            return nodes.reshape(-1, 3), weights.ravel()
        p = self.p_range[0] + (self.p_range[1] - self.p_range[0]) * (np.arange(n) + 0.5) / n
        q = self.q_range[0] + (self.q_range[1] - self.q_range[0]) * (np.arange(n) + 0.5) / n
        P, Q = np.meshgrid(p, q, indexing="ij")
        nodes = np.stack([P, Q], axis=-1).reshape(-1, 2)
        return nodes, np.full(n * n, self.total_area / (n * n))

    def area_residual(self) -> float:
        _, w = self.liouville_quadrature()
        return float(abs(w.sum() - self.total_area))


def tangent_frame(model: PhaseModel, X: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Positively oriented orthonormal tangent pair at a single point."""
    if model.is_planar:
        return np.array([1.0, 0.0]), np.array([0.0, 1.0])
    n = model.project(X)
    a = np.array([1.0, 0.0, 0.0]) if abs(n[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = a - np.dot(a, n) * n
    e1 /= np.linalg.norm(e1)
    return e1, np.cross(n, e1)


def potential_residual(model: PhaseModel, rng: np.random.Generator, samples: int = 20,
                       radius: float = 1e-2, nodes: int = 256) -> float:
    """Relative mismatch between circulation of alpha and enclosed omega-area.

    Small circles of geodesic radius ``radius`` are placed at random points;
    the circulation is integrated spectrally.
    """
    worst = 0.0
    u = 2.0 * np.pi * np.arange(nodes) / nodes
    for _ in range(samples):
        if model.is_planar:
            lo = np.array([model.p_range[0], model.q_range[0]]) + radius
            hi = np.array([model.p_range[1], model.q_range[1]]) - radius
            c = lo + (hi - lo) * rng.random(2)
            X = c + radius * np.stack([np.cos(u), np.sin(u)], axis=-1)
            V = radius * np.stack([-np.sin(u), np.cos(u)], axis=-1)
            area = np.pi * radius**2
            circ = np.mean(model.potential(X, V)) * 2.0 * np.pi
            worst = max(worst, abs(circ - area) / area)
            continue
        c = rng.normal(size=3)
        c /= np.linalg.norm(c)
        chart = "north" if c[2] >= 0 else "south"
        e1, e2 = tangent_frame(model, c)
        X = np.cos(radius) * c + np.sin(radius) * (np.cos(u)[:, None] * e1 + np.sin(u)[:, None] * e2)
        V = np.sin(radius) * (-np.sin(u)[:, None] * e1 + np.cos(u)[:, None] * e2)
        area = (1.0 - np.cos(radius)) / 2.0
        circ = np.mean(model.potential(X, V, chart)) * 2.0 * np.pi
        worst = max(worst, abs(circ - area) / area)
    logger.debug(f"potential residual for {model.kind}: {worst:.3e}")
    return float(worst)


def poisson_bracket(f: ClassicalObservable, g: ClassicalObservable, x: PhasePoint,
                    model: PhaseModel) -> float:
    """``{f, g}(x)`` under ``{f, g} = omega(X_f, X_g)``."""
    X = model.embed(x)
    return float(model.poisson(f, g, X))


def _midpoint_step(model: PhaseModel, f: ClassicalObservable, X: np.ndarray,
                   dt: float, max_iter: int = 100, tol: float = 1e-14) -> Optional[np.ndarray]:
    Y = X + dt * model.hamiltonian_vector(f, X)
    for _ in range(max_iter):
        Y_new = X + dt * model.hamiltonian_vector(f, 0.5 * (X + Y))
        if np.max(np.abs(Y_new - Y)) <= tol * max(1.0, np.max(np.abs(Y_new))):
            return Y_new
        Y = Y_new
    return None


def _rk4_step(model: PhaseModel, f: ClassicalObservable, X: np.ndarray, dt: float) -> np.ndarray:
    k1 = model.hamiltonian_vector(f, X)
    k2 = model.hamiltonian_vector(f, X + 0.5 * dt * k1)
    k3 = model.hamiltonian_vector(f, X + 0.5 * dt * k2)
    k4 = model.hamiltonian_vector(f, X + dt * k3)
    return model.project(X + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4))


def integrate_flow(model: PhaseModel, f: ClassicalObservable, X: np.ndarray, t: float,
                   steps: int, method: Literal["midpoint", "rk4"] = "midpoint") -> np.ndarray:
    """Time-``t`` Hamiltonian flow of ambient points (vectorized over leading axes).

    Implicit midpoint keeps ``|X|`` exactly on the sphere since ``X_f`` is
    orthogonal to the midpoint. Steps whose fixed-point iteration stalls are
    redone with RK4.
    """
    if steps < 1:
        raise ValueError(f"steps must be >= 1, got {steps}")
    X = np.array(X, dtype=float)
    dt = t / steps
    for i in range(steps):
        if method == "midpoint":
            Y = _midpoint_step(model, f, X, dt)
            if Y is None:
                logger.warning(f"Midpoint iteration stalled at step {i}; using RK4")
                Y = _rk4_step(model, f, X, dt)
        else:
            Y = _rk4_step(model, f, X, dt)
        if model.kind == "darboux" and not np.all(model.inside_rectangle(Y)):
            raise FlowEscapeError(
                f"Flow of {f.name} left the Darboux rectangle at step {i + 1}", last_valid=X
            )
        X = Y
    return X


def hamiltonian_flow(f: ClassicalObservable, x: PhasePoint, t: float, steps: int,
                     model: PhaseModel) -> PhasePoint:
    """Integrate ``X_f`` for time ``t`` starting at ``x``."""
    X = model.embed(x)
    try:
        Y = integrate_flow(model, f, X, t, steps)
    except FlowEscapeError as e:
        e.last_valid = model.chart_point(e.last_valid)
        raise
    logger.debug(f"flow of {f.name} from {x.coords} for t={t}: drift {abs(f(Y) - f(X)):.2e}")
    return model.chart_point(Y, prefer=x.chart)


def liouville_integral(f: ClassicalObservable, model: PhaseModel, n: Optional[int] = None) -> float:
    """``int_M f d mu_L`` by product quadrature."""
    nodes, weights = model.liouville_quadrature(n)
    return float(np.dot(weights, f(nodes)))


def flow_symplectic_residual(f: ClassicalObservable, x: PhasePoint, t: float, steps: int,
                             model: PhaseModel, h: float = 1e-6) -> float:
    """Relative defect of ``Phi_t^* omega = omega`` from a finite-difference Jacobian."""
    X = model.embed(x)
    e1, e2 = tangent_frame(model, X)
    pushed = []
    for e in (e1, e2):
        plus = integrate_flow(model, f, model.project(X + h * e), t, steps)
        minus = integrate_flow(model, f, model.project(X - h * e), t, steps)
        pushed.append((plus - minus) / (2.0 * h))
    Y = integrate_flow(model, f, X, t, steps)
    before = model.omega(X, e1, e2)
    after = model.omega(Y, pushed[0], pushed[1])
    return float(abs(after - before) / abs(before))


def flow_liouville_residual(f: ClassicalObservable, g: ClassicalObservable, t: float,
                            steps: int, model: PhaseModel, n: int = 48) -> float:
    """``|int g o Phi_t - int g|`` on an ``n``-resolution product rule."""
    nodes, weights = model.liouville_quadrature(n)
    moved = integrate_flow(model, f, nodes, t, steps)
    if model.kind == "torus":
        moved = np.mod(moved, 1.0)
    return float(abs(np.dot(weights, g(moved)) - np.dot(weights, g(nodes))))


def jacobi_residual(model: PhaseModel, f: ClassicalObservable, g: ClassicalObservable,
                    h: ClassicalObservable, X: np.ndarray) -> np.ndarray:
    """Pointwise ``{f,{g,h}} + {g,{h,f}} + {h,{f,g}}``."""
    return (
        model.poisson(f, model.bracket_observable(g, h), X)
        + model.poisson(g, model.bracket_observable(h, f), X)
        + model.poisson(h, model.bracket_observable(f, g), X)
    )


def leibniz_residual(model: PhaseModel, f: ClassicalObservable, g: ClassicalObservable,
                     h: ClassicalObservable, X: np.ndarray) -> np.ndarray:
    """Pointwise ``{f, g h} - g {f, h} - h {f, g}``."""
    return (
        model.poisson(f, g * h, X)
        - g(X) * model.poisson(f, h, X)
        - h(X) * model.poisson(f, g, X)
    )


def random_points(model: PhaseModel, rng: np.random.Generator, count: int) -> np.ndarray:
    """Uniform ambient sample points on the model."""
    if model.kind == "sphere":
        X = rng.normal(size=(count, 3))
        return X / np.linalg.norm(X, axis=-1, keepdims=True)
    lo = np.array([model.p_range[0], model.q_range[0]])
    hi = np.array([model.p_range[1], model.q_range[1]])
    return lo + (hi - lo) * rng.random((count, 2))
