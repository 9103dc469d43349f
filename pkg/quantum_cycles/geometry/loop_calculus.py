"""Closed loops, half-weights and periodic calculus along the loop parameter.

A loop is sampled at ``u_i = i / N`` on ``[0, 1)``. Derivatives are Fourier
multipliers, either exact spectral (``i 2 pi m``, Nyquist dropped) or the
fourth-order centered stencil; both are skew-symmetric so every derivative
sums to zero around the loop.
"""

import io
from typing import Literal, Optional, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, model_validator

from quantum_cycles.geometry.errors import DomainError, HolonomyUndefinedError
from quantum_cycles.geometry.observables import ClassicalObservable
from quantum_cycles.geometry.phase_space import PhaseModel, PhasePoint, tangent_frame
from quantum_cycles.utils.logger import get_debug_logger

logger = get_debug_logger(__name__)

DerivativeKind = Literal["spectral", "fd4"]
MIN_VERTICES = 16


def derivative_symbol(n: int, kind: DerivativeKind = "spectral") -> np.ndarray:
    """Fourier symbol of d/du on ``n`` periodic samples of ``[0, 1)``."""
    m = np.fft.fftfreq(n, d=1.0 / n)
    if kind == "spectral":
        sym = 2j * np.pi * m
        if n % 2 == 0:
            sym[n // 2] = 0.0
        return sym
    h = 1.0 / n
    theta = 2.0 * np.pi * m * h
    return 1j * (8.0 * np.sin(theta) - np.sin(2.0 * theta)) / (6.0 * h)


def periodic_derivative(values: np.ndarray, kind: DerivativeKind = "spectral") -> np.ndarray:
    values = np.asarray(values)
    sym = derivative_symbol(values.shape[0], kind)
    sym = sym.reshape((-1,) + (1,) * (values.ndim - 1))
    out = np.fft.ifft(sym * np.fft.fft(values, axis=0), axis=0)
    return out if np.iscomplexobj(values) else out.real


def periodic_antiderivative(values: np.ndarray, kind: DerivativeKind = "spectral") -> np.ndarray:
    """Zero-mean ``F`` with ``D F = values``; the mean of ``values`` is ignored."""
    values = np.asarray(values, dtype=float)
    sym = derivative_symbol(values.shape[0], kind)
    inv = np.zeros_like(sym)
    nz = np.abs(sym) > 1e-12
    inv[nz] = 1.0 / sym[nz]
    inv = inv.reshape((-1,) + (1,) * (values.ndim - 1))
    return np.fft.ifft(inv * np.fft.fft(values, axis=0), axis=0).real


def fourier_interpolate(values: np.ndarray, u: np.ndarray, order: int = 0) -> np.ndarray:
    """Band-limited interpolant (or its ``order``-th derivative) at arbitrary ``u``.

    The Nyquist mode is dropped, matching the spectral derivative.
    """
    values = np.asarray(values, dtype=float)
    n = values.shape[0]
    coeffs = np.fft.fft(values, axis=0) / n
    if n % 2 == 0:
        coeffs[n // 2] = 0.0
    m = np.fft.fftfreq(n, d=1.0 / n)
    basis = np.exp(2j * np.pi * np.outer(np.atleast_1d(u), m)) * (2j * np.pi * m) ** order
    return np.real(basis @ coeffs)


class LagrangianLoop(BaseModel):
    """Closed oriented loop sampled at ``N`` vertices in ambient coordinates.

    Torus loops are stored unwrapped: vertex ``i + N`` is vertex ``i`` shifted
    by ``winding``. Sphere loops may pin the potential chart used for holonomy.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    model: PhaseModel
    points: np.ndarray
    winding: Tuple[int, int] = Field(default=(0, 0), description="Torus (m_p, m_q)")
    orientation: Literal[1, -1] = 1
    chart: Optional[Literal["north", "south"]] = None
    derivative: DerivativeKind = "spectral"

    @model_validator(mode="after")
    def _check(self) -> "LagrangianLoop":
        pts = self.points
        if pts.ndim != 2 or pts.shape[1] != self.model.ambient_dim:
            raise DomainError(f"Loop points must have shape (N, {self.model.ambient_dim})")
        if pts.shape[0] < MIN_VERTICES:
            raise DomainError(f"Loops need at least {MIN_VERTICES} vertices, got {pts.shape[0]}")
        if self.model.kind != "torus" and self.winding != (0, 0):
            raise DomainError("Winding numbers only apply to torus loops")
        if self.model.kind == "darboux" and not np.all(self.model.inside_rectangle(pts)):
            raise DomainError("Loop leaves the Darboux rectangle")
        return self

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def u(self) -> np.ndarray:
        return np.arange(self.n) / self.n

    @property
    def du(self) -> float:
        return 1.0 / self.n

    def with_points(self, points: np.ndarray, **changes) -> "LagrangianLoop":
        data = dict(model=self.model, points=points, winding=self.winding,
                    orientation=self.orientation, chart=self.chart, derivative=self.derivative)
        data.update(changes)
        return LagrangianLoop(**data)

    def periodic_part(self) -> np.ndarray:
        """Points minus the linear winding drift (periodic in ``u``)."""
        if self.model.kind != "torus":
            return self.points
        return self.points - np.outer(self.u, np.array(self.winding, dtype=float))

    def d(self, values: np.ndarray) -> np.ndarray:
        return periodic_derivative(values, self.derivative)

    def tangent(self) -> np.ndarray:
        gamma_dot = self.d(self.periodic_part())
        if self.model.kind == "torus":
            gamma_dot = gamma_dot + np.array(self.winding, dtype=float)
        return gamma_dot

    def normal(self, shear: Optional[np.ndarray] = None) -> np.ndarray:
        """Transversal ``nu = I gamma' / g(gamma', gamma')`` so that ``omega(gamma', nu) = 1``.

        ``shear`` adds ``c(u) gamma'``, giving another transversal with the same
        symplectic normalization.
        """
        t = self.tangent()
        nu = self.model.complex_structure(self.points, t)
        nu = nu / self.model.metric(self.points, t, t)[:, None]
        if shear is not None:
            nu = nu + shear[:, None] * t
        return nu

    def restrict(self, f: ClassicalObservable) -> np.ndarray:
        return f(self.points)

    def integrate(self, values: np.ndarray) -> float:
        return float(np.sum(values) * self.du)

    def euclidean_length(self) -> float:
        return float(self.integrate(np.linalg.norm(self.tangent(), axis=1)))

    def interpolate(self, u: np.ndarray, order: int = 0) -> np.ndarray:
        """Fourier interpolant of the loop (or its derivatives) at parameters ``u``."""
        out = fourier_interpolate(self.periodic_part(), u, order)
        if self.model.kind == "torus":
            w = np.array(self.winding, dtype=float)
            out = out + (np.outer(np.atleast_1d(u), w) if order == 0 else (w if order == 1 else 0.0))
        return out

    def nearest_parameter(self, X: np.ndarray, iterations: int = 30) -> np.ndarray:
        """Parameter of the nearest loop point for each ambient point in ``X``."""
        X = np.atleast_2d(X)
        d2 = np.sum((X[:, None, :] - self.points[None, :, :]) ** 2, axis=-1)
        u = self.u[np.argmin(d2, axis=1)]
        for _ in range(iterations):
            g0 = self.interpolate(u)
            g1 = self.interpolate(u, 1)
            g2 = self.interpolate(u, 2)
            r = X - g0
            num = np.sum(r * g1, axis=1)
            den = np.sum(g1 * g1, axis=1) - np.sum(r * g2, axis=1)
            step = num / den
            u = u + step
            if np.max(np.abs(step)) < 1e-15:
                break
        return np.mod(u, 1.0)

    def phase_points(self) -> list[PhasePoint]:
        return [self.model.chart_point(x, prefer=self.chart) for x in self.points]

    def is_embedded(self) -> bool:
        """No two non-adjacent vertices closer than half a mean edge."""
        diff = self.points[:, None, :] - self.points[None, :, :]
        if self.model.kind == "torus":
            diff = diff - np.round(diff)
        dist = np.linalg.norm(diff, axis=-1)
        edge = np.mean(np.linalg.norm(np.diff(self.points, axis=0), axis=1))
        idx = np.arange(self.n)
        sep = np.abs(idx[:, None] - idx[None, :])
        sep = np.minimum(sep, self.n - sep)
        return bool(np.all(dist[sep >= 2] > 0.5 * edge))

    def reversed(self) -> "LagrangianLoop":
        """Same loop traversed backwards from the same base vertex."""
        pts = self.points[(-np.arange(self.n)) % self.n].copy()
        if self.model.kind == "torus":
            pts[1:] -= np.array(self.winding, dtype=float)
        winding = (-self.winding[0], -self.winding[1])
        return self.with_points(pts, winding=winding, orientation=-self.orientation)

    def to_csv(self, weight: Optional["HalfWeight"] = None) -> str:
        """CSV with columns ``vertex, chart, coord1, coord2, density``."""
        rows = []
        density = weight.w if weight is not None else np.ones(self.n)
        for i, pt in enumerate(self.phase_points()):
            rows.append({"vertex": i, "chart": pt.chart, "coord1": pt.coords[0],
                         "coord2": pt.coords[1], "density": float(density[i])})
        return pd.DataFrame(rows).to_csv(index=False, float_format="%.17g")


class HalfWeight(BaseModel):
    """Positive half-weight ``theta`` on a loop; ``w = theta**2`` is a density in ``du``."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    theta: np.ndarray
    sign: Literal[1, -1] = 1

    @model_validator(mode="after")
    def _positive(self) -> "HalfWeight":
        if self.theta.ndim != 1 or not np.all(self.theta > 0):
            raise DomainError("Half-weights must be strictly positive on every vertex")
        return self

    @property
    def w(self) -> np.ndarray:
        return self.theta**2

    @property
    def volume(self) -> float:
        return float(np.mean(self.w))

    @classmethod
    def from_density(cls, w: np.ndarray, r: Optional[float] = None, sign: int = 1) -> "HalfWeight":
        """Half-weight with ``theta**2 = w``, rescaled to volume ``r`` when given."""
        w = np.asarray(w, dtype=float)
        if r is not None:
            w = w * (r / np.mean(w))
        return cls(theta=np.sqrt(w), sign=sign)

    @classmethod
    def uniform(cls, n: int, r: float) -> "HalfWeight":
        return cls.from_density(np.full(n, r))


def weighted_mean(values: np.ndarray, w: np.ndarray) -> float:
    return float(np.sum(values * w) / np.sum(w))


def loop_from_wrapped(model: PhaseModel, points: np.ndarray, **kwargs) -> LagrangianLoop:
    """Rebuild an unwrapped torus loop from wrapped ``[0, 1)^2`` samples."""
    points = np.asarray(points, dtype=float)
    if model.kind != "torus":
        return LagrangianLoop(model=model, points=points, **kwargs)
    steps = np.diff(np.vstack([points, points[:1]]), axis=0)
    steps = steps - np.round(steps)
    if np.any(np.abs(steps) > 0.4):
        raise HolonomyUndefinedError("Cannot infer cut crossings: a step is close to half a period")
    unwrapped = points[0] + np.vstack([np.zeros(2), np.cumsum(steps[:-1], axis=0)])
    winding = tuple(int(v) for v in np.round(np.sum(steps, axis=0)))
    return LagrangianLoop(model=model, points=unwrapped, winding=winding, **kwargs)


def loop_from_csv(model: PhaseModel, text: str, **kwargs) -> Tuple[LagrangianLoop, HalfWeight]:
    """Inverse of :meth:`LagrangianLoop.to_csv`."""
    df = pd.read_csv(io.StringIO(text))
    pts = [model.embed(PhasePoint(chart=c, coords=(a, b)))
           for c, a, b in zip(df["chart"], df["coord1"], df["coord2"])]
    loop = loop_from_wrapped(model, np.array(pts), **kwargs)
    return loop, HalfWeight.from_density(df["density"].to_numpy())


# -- constructors -------------------------------------------------------


def latitude(model: PhaseModel, area: float, n: int = 256, phase: float = 0.0,
             **kwargs) -> LagrangianLoop:
    """Sphere latitude bounding a north cap of omega-area ``area``, counter-clockwise."""
    if not 0.0 < area < 1.0:
        raise DomainError(f"Cap area must lie in (0, 1), got {area}")
    z0 = 1.0 - 2.0 * area
    s = np.sqrt(1.0 - z0**2)
    phi = 2.0 * np.pi * np.arange(n) / n + phase
    pts = np.stack([s * np.cos(phi), s * np.sin(phi), np.full(n, z0)], axis=-1)
    return LagrangianLoop(model=model, points=pts, **kwargs)


def rotation_matrix(axis: np.ndarray, angle: float) -> np.ndarray:
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    K = np.array([[0, -axis[2], axis[1]], [axis[2], 0, -axis[0]], [-axis[1], axis[0], 0]])
    return np.eye(3) + np.sin(angle) * K + (1.0 - np.cos(angle)) * K @ K


def tilted_latitude(model: PhaseModel, area: float, angle: float, n: int = 256,
                    axis: Tuple[float, float, float] = (1.0, 0.0, 0.0), **kwargs) -> LagrangianLoop:
    """Latitude rotated by ``angle`` about ``axis``; the enclosed area is unchanged."""
    base = latitude(model, area, n)
    return base.with_points(base.points @ rotation_matrix(np.array(axis), angle).T, **kwargs)


def torus_fiber(model: PhaseModel, p0: float, n: int = 256, **kwargs) -> LagrangianLoop:
    """The fiber ``{p = p0}`` traversed with increasing ``q``."""
    q = np.arange(n) / n
    pts = np.stack([np.full(n, p0), q], axis=-1)
    return LagrangianLoop(model=model, points=pts, winding=(0, 1), **kwargs)


def small_circle(model: PhaseModel, center: np.ndarray, radius: float, n: int = 64) -> LagrangianLoop:
    """Tiny contractible loop around ``center`` (geodesic radius on the sphere)."""
    u = 2.0 * np.pi * np.arange(n) / n
    if model.is_planar:
        pts = center + radius * np.stack([np.cos(u), np.sin(u)], axis=-1)
        return LagrangianLoop(model=model, points=pts)
    e1, e2 = tangent_frame(model, center)
    pts = np.cos(radius) * center + np.sin(radius) * (np.cos(u)[:, None] * e1 + np.sin(u)[:, None] * e2)
    return LagrangianLoop(model=model, points=pts)


def tangential_coefficient(loop: LagrangianLoop, f: ClassicalObservable,
                           shear: Optional[np.ndarray] = None) -> np.ndarray:
    """``a_f = df(nu)``: the tangential part of ``X_f`` is ``a_f gamma'``."""
    G = f.differential(loop.points)
    return np.einsum("ij,ij->i", G, loop.normal(shear))


def transport_density(loop: LagrangianLoop, f: ClassicalObservable, w: np.ndarray,
                      shear: Optional[np.ndarray] = None) -> np.ndarray:
    """Density of ``Lie_{W_f}(w du)`` in ``du``, i.e. ``(a_f w)'``."""
    return loop.d(tangential_coefficient(loop, f, shear) * w)
