"""Geometric quantum mechanics on a finite-dimensional projective Hilbert space.

The Kahler data on ``C^d`` are ``G = 2h Re<,>`` and ``Omega = 2h Im<,>``
(inner product antilinear in the first slot). Tangent vectors at a ray are
represented by their horizontal lift, orthogonal to the unit representative.
"""

import json
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from quantum_cycles.geometry.errors import DomainError, UndefinedProjectionError
from quantum_cycles.utils.logger import get_debug_logger

logger = get_debug_logger(__name__)

HERMITIAN_TOL = 1e-12
TOL_FD = 1e-6


class KahlerConventions(BaseModel):
    model_config = ConfigDict(frozen=True)

    planck: float = Field(default=1.0, gt=0, description="h in <,> = G/2h + i Omega/2h")


class HermitianObservable(BaseModel):
    """A ``d x d`` Hermitian matrix, symmetrized on construction."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    matrix: np.ndarray

    @field_validator("matrix", mode="before")
    @classmethod
    def _hermitize(cls, m) -> np.ndarray:
        m = np.asarray(m, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 2:
            raise DomainError(f"Observable must be a square matrix of size >= 2, got {m.shape}")
        return 0.5 * (m + m.conj().T)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def to_json(self) -> str:
        """Row-major ``[re, im]`` pairs."""
        rows = [[[float(z.real), float(z.imag)] for z in row] for row in self.matrix]
        return json.dumps(rows)

    @classmethod
    def from_json(cls, text: str) -> "HermitianObservable":
        data = np.array(json.loads(text), dtype=float)
        return cls(matrix=data[..., 0] + 1j * data[..., 1])


class Ray(BaseModel):
    """Unit vector modulo phase, stored with its canonical representative."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    vector: np.ndarray

    @model_validator(mode="after")
    def _unit(self) -> "Ray":
        if abs(np.linalg.norm(self.vector) - 1.0) > 1e-10:
            raise DomainError("Ray representatives must have unit norm")
        return self

    @classmethod
    def from_vector(cls, v: Sequence[complex]) -> "Ray":
        v = np.asarray(v, dtype=complex)
        norm = np.linalg.norm(v)
        if norm < 1e-300:
            raise DomainError("The zero vector does not define a ray")
        v = v / norm
        lead = v[np.argmax(np.abs(v) > 1e-12)]
        return cls(vector=v * (abs(lead) / lead))

    @property
    def dim(self) -> int:
        return self.vector.size

    def overlap(self, other: "Ray") -> float:
        return float(abs(np.vdot(self.vector, other.vector)))

    def same_as(self, other: "Ray", tol: float = 1e-10) -> bool:
        return self.dim == other.dim and self.overlap(other) >= 1.0 - tol


def _check_dims(F: HermitianObservable, p: Ray) -> None:
    if F.dim != p.dim:
        raise DomainError(f"Dimension mismatch: observable {F.dim}, ray {p.dim}")


def symbol_value(F: HermitianObservable, p: Ray) -> float:
    """Expectation ``<psi, F psi>``."""
    _check_dims(F, p)
    return float(np.real(np.vdot(p.vector, F.matrix @ p.vector)))


def symbol_field(F: HermitianObservable, p: Ray, conv: KahlerConventions = KahlerConventions()) -> np.ndarray:
    """Horizontal lift of the Hamiltonian field of the symbol, ``-(i/h)(F - f) psi``."""
    f = symbol_value(F, p)
    return -1j / conv.planck * (F.matrix @ p.vector - f * p.vector)


def omega(u: np.ndarray, v: np.ndarray, conv: KahlerConventions = KahlerConventions()) -> float:
    return float(2.0 * conv.planck * np.imag(np.vdot(u, v)))


def metric(u: np.ndarray, v: np.ndarray, conv: KahlerConventions = KahlerConventions()) -> float:
    return float(2.0 * conv.planck * np.real(np.vdot(u, v)))


class SymbolBrackets(BaseModel):
    poisson: float
    riemann: float
    symmetric: float


def symbol_brackets(F: HermitianObservable, K: HermitianObservable, p: Ray,
                    conv: KahlerConventions = KahlerConventions()) -> SymbolBrackets:
    """Poisson, Riemann and symmetric brackets of two symbols at ``p``."""
    _check_dims(F, p)
    _check_dims(K, p)
    XF, XK = symbol_field(F, p, conv), symbol_field(K, p, conv)
    poisson = omega(XF, XK, conv)
    riemann = 0.5 * conv.planck * metric(XF, XK, conv)
    return SymbolBrackets(
        poisson=poisson,
        riemann=riemann,
        symmetric=riemann + symbol_value(F, p) * symbol_value(K, p),
    )


def commutator_symbol(F: HermitianObservable, K: HermitianObservable, p: Ray,
                      conv: KahlerConventions = KahlerConventions()) -> float:
    """Symbol of ``(1/ih)[F, K]``, computed directly from the operators."""
    C = (F.matrix @ K.matrix - K.matrix @ F.matrix) / (1j * conv.planck)
    return symbol_value(HermitianObservable(matrix=C), p)


class Uncertainty(BaseModel):
    delta_f2: float
    delta_k2: float
    lower_bound: float
    satisfied: bool


def uncertainty_relation(F: HermitianObservable, K: HermitianObservable, p: Ray,
                         conv: KahlerConventions = KahlerConventions()) -> Uncertainty:
    """Variances and the Robertson-Schrodinger lower bound."""
    f, k = symbol_value(F, p), symbol_value(K, p)
    dF = symbol_brackets(F, F, p, conv).symmetric - f**2
    dK = symbol_brackets(K, K, p, conv).symmetric - k**2
    fk = symbol_brackets(F, K, p, conv)
    bound = (0.5 * conv.planck * fk.poisson) ** 2 + fk.riemann**2
    return Uncertainty(delta_f2=dF, delta_k2=dK, lower_bound=bound, satisfied=bool(dF * dK >= bound - 1e-10))


def fubini_study_length(path: Callable[[float], np.ndarray], velocity: Callable[[float], np.ndarray],
                        conv: KahlerConventions = KahlerConventions(), nodes: int = 64) -> float:
    """Arc length of a path of unit vectors by Gauss-Legendre quadrature on ``[0, 1]``."""
    s, w = np.polynomial.legendre.leggauss(nodes)
    s, w = 0.5 * (s + 1.0), 0.5 * w
    total = 0.0
    for si, wi in zip(s, w):
        g, gd = path(si), velocity(si)
        horizontal = gd - g * np.vdot(g, gd)
        total += wi * np.sqrt(2.0 * conv.planck) * np.linalg.norm(horizontal)
    return float(total)


class Transition(BaseModel):
    prob: float
    geodesic_check: float
    distance: float


def transition_probability(p0: Ray, p: Ray, conv: KahlerConventions = KahlerConventions()) -> Transition:
    """``|<psi0, psi>|**2`` and the same quantity recovered from integrated FS distance."""
    if p0.dim != p.dim:
        raise DomainError(f"Dimension mismatch: {p0.dim} vs {p.dim}")
    psi0 = p0.vector
    c = np.vdot(psi0, p.vector)
    psi1 = p.vector * (np.conj(c) / abs(c) if abs(c) > 1e-15 else 1.0)

    def chord(s: float) -> np.ndarray:
        return (1.0 - s) * psi0 + s * psi1

    def path(s: float) -> np.ndarray:
        v = chord(s)
        return v / np.linalg.norm(v)

    def velocity(s: float) -> np.ndarray:
        v, vd = chord(s), psi1 - psi0
        n = np.linalg.norm(v)
        return vd / n - v * np.real(np.vdot(v, vd)) / n**3

    sigma = fubini_study_length(path, velocity, conv)
    return Transition(
        prob=float(abs(c) ** 2),
        geodesic_check=float(np.cos(sigma / np.sqrt(2.0 * conv.planck)) ** 2),
        distance=sigma,
    )


class SpectrumReport(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    is_critical: bool
    n_lambda_max: float
    projected: Ray


def n_lambda(F: HermitianObservable, lam: float, p: Ray) -> float:
    """``((Delta f)**2 + (f - lambda)**2)**-1``, i.e. ``<(F - lambda)**2>**-1``."""
    A = F.matrix - lam * np.eye(F.dim)
    value = float(np.real(np.vdot(A @ p.vector, A @ p.vector)))
    return np.inf if value == 0.0 else 1.0 / value


def spectral_projection(F: HermitianObservable, interval: Tuple[float, float], p: Ray) -> Ray:
    """Normalized projection of ``p`` onto the eigenspaces with eigenvalue in ``interval``."""
    lo, hi = interval
    if lo > hi:
        raise DomainError(f"Empty interval {interval}")
    evals, evecs = np.linalg.eigh(F.matrix)
    basis = evecs[:, (evals >= lo) & (evals <= hi)]
    proj = basis @ (basis.conj().T @ p.vector)
    if np.linalg.norm(proj) < 1e-12:
        raise UndefinedProjectionError(f"State has no component with eigenvalue in {interval}")
    return Ray.from_vector(proj)


def spectrum_tools(F: HermitianObservable, interval: Tuple[float, float], p: Ray,
                   sample: Optional[List[Ray]] = None, tol: float = 1e-10,
                   conv: KahlerConventions = KahlerConventions()) -> SpectrumReport:
    """Criticality, sampled sup of ``n_lambda`` at the interval midpoint, and spectral projection."""
    _check_dims(F, p)
    lam = 0.5 * (interval[0] + interval[1])
    states = [p] + list(sample or [])
    return SpectrumReport(
        is_critical=bool(np.linalg.norm(symbol_field(F, p, conv)) <= tol),
        n_lambda_max=max(n_lambda(F, lam, s) for s in states),
        projected=spectral_projection(F, interval, p),
    )


def approach_family(F: HermitianObservable, eigen_index: int, eps: Sequence[float]) -> List[Ray]:
    """States ``normalize(e_j + eps e_{j+1})`` approaching an eigenray."""
    _, evecs = np.linalg.eigh(F.matrix)
    e, f = evecs[:, eigen_index], evecs[:, (eigen_index + 1) % F.dim]
    return [Ray.from_vector(e + x * f) for x in eps]


def horizontal_basis(p: Ray) -> np.ndarray:
    """Orthonormal basis ``B`` (columns) of the complement of ``psi``."""
    q, _ = np.linalg.qr(np.column_stack([p.vector, np.eye(p.dim)]).astype(complex))
    return q[:, 1:p.dim]


RayFunction = Callable[[np.ndarray], float]


def killing_residual(f: RayFunction, sample: List[Ray], delta: float = 1e-4) -> float:
    """Largest ``||J H - H J||`` over the sample, ``H`` the FD Hessian in an affine chart.

    At the centre of the chart ``psi0 + B Z`` the Fubini-Study metric is flat to
    first order, so the coordinate Hessian is the covariant one, and ``X_f``
    is Killing exactly when that Hessian commutes with the complex structure.
    """
    worst = 0.0
    for p in sample:
        B = horizontal_basis(p)
        m = B.shape[1]

        def chart(x: np.ndarray) -> float:
            v = p.vector + B @ (x[:m] + 1j * x[m:])
            return f(v / np.linalg.norm(v))

        n = 2 * m
        H = np.empty((n, n))
        E = np.eye(n) * delta
        for i in range(n):
            for j in range(i, n):
                H[i, j] = H[j, i] = (
                    chart(E[i] + E[j]) - chart(E[i] - E[j]) - chart(-E[i] + E[j]) + chart(-E[i] - E[j])
                ) / (4.0 * delta**2)
        J = np.block([[np.zeros((m, m)), -np.eye(m)], [np.eye(m), np.zeros((m, m))]])
        worst = max(worst, float(np.linalg.norm(J @ H - H @ J)))
    logger.debug(f"killing residual over {len(sample)} rays: {worst:.3e}")
    return worst


def symbol_function(F: HermitianObservable) -> RayFunction:
    return lambda v: float(np.real(np.vdot(v, F.matrix @ v)))


def gradient_residual(F: HermitianObservable, p: Ray, rng: np.random.Generator, eps: float = 1e-6,
                      conv: KahlerConventions = KahlerConventions()) -> float:
    """``|d symbol(v) - Omega(X_F, v)|`` for a random horizontal ``v``."""
    v = rng.normal(size=p.dim) + 1j * rng.normal(size=p.dim)
    v = v - p.vector * np.vdot(p.vector, v)
    f = symbol_function(F)
    plus, minus = p.vector + eps * v, p.vector - eps * v
    fd = (f(plus / np.linalg.norm(plus)) - f(minus / np.linalg.norm(minus))) / (2.0 * eps)
    return float(abs(fd - omega(symbol_field(F, p, conv), v, conv)))


def hermitian_basis(d: int) -> List[HermitianObservable]:
    """The ``d**2`` generalized Gell-Mann matrices plus identity."""
    basis = [HermitianObservable(matrix=np.eye(d))]
    for i in range(d):
        for j in range(i + 1, d):
            m = np.zeros((d, d), dtype=complex)
            m[i, j] = m[j, i] = 1.0
            basis.append(HermitianObservable(matrix=m))
            m = np.zeros((d, d), dtype=complex)
            m[i, j], m[j, i] = -1j, 1j
            basis.append(HermitianObservable(matrix=m))
    for i in range(1, d):
        diag = np.zeros(d)
        diag[:i] = 1.0
        diag[i] = -i
        basis.append(HermitianObservable(matrix=np.diag(diag)))
    return basis


def quasi_symbol_rank(d: int, rng: np.random.Generator, samples: Optional[int] = None) -> int:
    """Rank of the span of symbols of a Hermitian basis, sampled on random rays."""
    rays = [random_ray(rng, d) for _ in range(samples or 2 * d * d)]
    values = np.array([[symbol_value(F, p) for F in hermitian_basis(d)] for p in rays])
    s = np.linalg.svd(values, compute_uv=False)
    return int(np.sum(s > 1e-9 * s[0]))


def random_hermitian(rng: np.random.Generator, d: int) -> HermitianObservable:
    A = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return HermitianObservable(matrix=A)


def random_ray(rng: np.random.Generator, d: int) -> Ray:
    return Ray.from_vector(rng.normal(size=d) + 1j * rng.normal(size=d))


PAULI_X = HermitianObservable(matrix=[[0, 1], [1, 0]])
PAULI_Y = HermitianObservable(matrix=[[0, -1j], [1j, 0]])
PAULI_Z = HermitianObservable(matrix=[[1, 0], [0, -1]])
