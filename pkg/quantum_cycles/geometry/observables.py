"""Classical observables on the phase models.

Observables act on ambient coordinates: unit vectors ``(x, y, z)`` for the
sphere, ``(p, q)`` pairs for the torus and Darboux charts. Every callable is
vectorized over leading axes, so ``f(X)`` with ``X.shape == (..., dim)``
returns an array of shape ``X.shape[:-1]``.
"""

from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from quantum_cycles.utils.logger import get_debug_logger

logger = get_debug_logger(__name__)

ArrayFn = Callable[[np.ndarray], np.ndarray]

DEFAULT_H_FD = 1e-5


class ClassicalObservable(BaseModel):
    """A smooth real function with an exact or finite-difference differential."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    name: str = Field(description="Human-readable label used in reports")
    dim: int = Field(description="Ambient dimension: 3 for the sphere, 2 otherwise")
    func: ArrayFn = Field(description="Vectorized evaluation rule")
    grad: Optional[ArrayFn] = Field(
        default=None, description="Exact ambient gradient, finite differences if None"
    )
    h_fd: float = Field(default=DEFAULT_H_FD, gt=0, description="Relative FD step")

    def __call__(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        return np.broadcast_to(self.func(X), X.shape[:-1]).astype(float)

    @property
    def has_exact_differential(self) -> bool:
        return self.grad is not None

    def differential(self, X: np.ndarray) -> np.ndarray:
        """Ambient gradient at ``X`` (shape ``X.shape``)."""
        X = np.asarray(X, dtype=float)
        if self.grad is not None:
            return np.broadcast_to(self.grad(X), X.shape).astype(float)
        return self.fd_differential(X)

    def fd_differential(self, X: np.ndarray) -> np.ndarray:
        """Central-difference gradient; sphere observables are extended radially."""
        X = np.asarray(X, dtype=float)
        scale = np.maximum(1.0, np.linalg.norm(X, axis=-1, keepdims=True))
        h = self.h_fd * scale
        out = np.empty_like(X)
        for i in range(X.shape[-1]):
            e = np.zeros(X.shape[-1])
            e[i] = 1.0
            plus = self._extended(X + h * e)
            minus = self._extended(X - h * e)
            out[..., i] = (plus - minus) / (2.0 * h[..., 0])
        return out

    def _extended(self, X: np.ndarray) -> np.ndarray:
        if self.dim == 3:
            X = X / np.linalg.norm(X, axis=-1, keepdims=True)
        return self(X)

    def __add__(self, other: "ClassicalObservable") -> "ClassicalObservable":
        grad = None
        if self.grad is not None and other.grad is not None:
            grad = lambda X: self.grad(X) + other.grad(X)  # noqa: E731
        return ClassicalObservable(
            name=f"({self.name} + {other.name})",
            dim=self.dim,
            func=lambda X: self(X) + other(X),
            grad=grad,
            h_fd=self.h_fd,
        )

    def __mul__(self, other: "ClassicalObservable") -> "ClassicalObservable":
        grad = None
        if self.grad is not None and other.grad is not None:
            grad = lambda X: (  # noqa: E731
                self(X)[..., None] * other.grad(X) + other(X)[..., None] * self.grad(X)
            )
        return ClassicalObservable(
            name=f"{self.name}*{other.name}",
            dim=self.dim,
            func=lambda X: self(X) * other(X),
            grad=grad,
            h_fd=self.h_fd,
        )

    def scaled(self, c: float) -> "ClassicalObservable":
        grad = None
        if self.grad is not None:
            grad = lambda X: c * self.grad(X)  # noqa: E731
        return ClassicalObservable(
            name=f"{c:g}*{self.name}",
            dim=self.dim,
            func=lambda X: c * self(X),
            grad=grad,
            h_fd=self.h_fd,
        )

    def without_differential(self) -> "ClassicalObservable":
        """Same function, forced onto the finite-difference fallback."""
        return ClassicalObservable(
            name=self.name, dim=self.dim, func=self.func, grad=None, h_fd=self.h_fd
        )


def constant(c: float, dim: int) -> ClassicalObservable:
    return ClassicalObservable(
        name=f"{c:g}",
        dim=dim,
        func=lambda X: np.full(X.shape[:-1], float(c)),
        grad=lambda X: np.zeros_like(X),
    )


def coordinate(index: int, dim: int, name: Optional[str] = None) -> ClassicalObservable:
    """The ambient coordinate function ``X[..., index]``."""
    labels = "xyz" if dim == 3 else "pq"
    e = np.zeros(dim)
    e[index] = 1.0
    return ClassicalObservable(
        name=name or labels[index],
        dim=dim,
        func=lambda X: X[..., index],
        grad=lambda X: np.broadcast_to(e, X.shape),
    )


def height() -> ClassicalObservable:
    return coordinate(2, 3, name="z")


def linear(a: Sequence[float], c0: float = 0.0) -> ClassicalObservable:
    """``c0 + a . X`` on either model."""
    a = np.asarray(a, dtype=float)
    return ClassicalObservable(
        name=f"linear{tuple(np.round(a, 4))}",
        dim=a.size,
        func=lambda X: c0 + X @ a,
        grad=lambda X: np.broadcast_to(a, X.shape),
    )


def quadratic_form(
    c0: float, c: Sequence[float], A: np.ndarray, name: str = "quadratic"
) -> ClassicalObservable:
    """``c0 + c . x + x^T A x`` in ambient coordinates (A symmetrized)."""
    c = np.asarray(c, dtype=float)
    A = np.asarray(A, dtype=float)
    A = 0.5 * (A + A.T)
    return ClassicalObservable(
        name=name,
        dim=c.size,
        func=lambda X: c0 + X @ c + np.einsum("...i,ij,...j->...", X, A, X),
        grad=lambda X: c + 2.0 * X @ A,
    )


TrigTerm = Tuple[int, int, float, float]


def trig_polynomial(terms: Sequence[TrigTerm], name: str = "trig") -> ClassicalObservable:
    """``sum a cos 2pi(m p + n q) + b sin 2pi(m p + n q)`` on the torus."""
    terms = [(int(m), int(n), float(a), float(b)) for m, n, a, b in terms]

    def func(X: np.ndarray) -> np.ndarray:
        out = np.zeros(X.shape[:-1])
        for m, n, a, b in terms:
            arg = 2.0 * np.pi * (m * X[..., 0] + n * X[..., 1])
            out = out + a * np.cos(arg) + b * np.sin(arg)
        return out

    def grad(X: np.ndarray) -> np.ndarray:
        out = np.zeros(X.shape)
        for m, n, a, b in terms:
            arg = 2.0 * np.pi * (m * X[..., 0] + n * X[..., 1])
            d = 2.0 * np.pi * (-a * np.sin(arg) + b * np.cos(arg))
            out[..., 0] += m * d
            out[..., 1] += n * d
        return out

    return ClassicalObservable(name=name, dim=2, func=func, grad=grad)


def random_trig_polynomial(
    rng: np.random.Generator, max_mode: int = 2, n_terms: int = 3
) -> ClassicalObservable:
    terms = [
        (
            int(rng.integers(-max_mode, max_mode + 1)),
            int(rng.integers(-max_mode, max_mode + 1)),
            float(rng.normal()),
            float(rng.normal()),
        )
        for _ in range(n_terms)
    ]
    return trig_polynomial(terms, name="random_trig")


def random_sphere_polynomial(rng: np.random.Generator) -> ClassicalObservable:
    """Random polynomial of degree two in the embedding coordinates."""
    A = rng.normal(size=(3, 3))
    return quadratic_form(0.0, rng.normal(size=3), A, name="random_quadratic")


def bump(center: Sequence[float], radius: float) -> ClassicalObservable:
    """Smooth compactly supported bump in ambient distance (FD differential)."""
    center = np.asarray(center, dtype=float)

    def func(X: np.ndarray) -> np.ndarray:
        r2 = np.sum((X - center) ** 2, axis=-1) / radius**2
        out = np.zeros(r2.shape)
        inside = r2 < 1.0
        out[inside] = np.exp(1.0 - 1.0 / (1.0 - r2[inside]))
        return out

    return ClassicalObservable(name=f"bump{tuple(np.round(center, 3))}", dim=center.size, func=func)
