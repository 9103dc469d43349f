"""Berezin-Toeplitz quantization of the sphere at level ``k``.

Holomorphic sections of ``L^k`` are written in the spinor frame: a point with
polar angle ``theta`` and longitude ``phi`` lifts to
``(a, b) = (cos(theta/2), sin(theta/2) e^{i phi})`` and the monomials are
``m_j = b**j a**(k - j)``. Pointwise norms ``|s(x)|**2`` do not depend on the
lift. The Liouville measure has total mass one, so the monomials are
orthogonal with ``||m_j||**2 = B(j + 1, k - j + 1)``.
"""

from typing import List, Optional, Sequence

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field
from scipy.special import betaln

from quantum_cycles.geometry.errors import DomainError, ResolutionError
from quantum_cycles.geometry.observables import ClassicalObservable
from quantum_cycles.geometry.phase_space import PhaseModel, PhasePoint
from quantum_cycles.geometry.projective_qm import HermitianObservable, Ray, symbol_value
from quantum_cycles.utils.logger import get_debug_logger

logger = get_debug_logger(__name__)

GRAM_TOL = 1e-9
SPHERE = PhaseModel(kind="sphere")
# c(k) = KAPPA * k relates (1/i)[A_f, A_g] to A_{f,g}; fitted once on (z, x) by calibrate_kappa
KAPPA = -2.0 * np.pi
REFERENCE_LEVELS = (8, 16)


def spinor_lift(X: np.ndarray) -> np.ndarray:
    """``(a, b)`` per ambient sphere point, shape ``X.shape[:-1] + (2,)``."""
    X = SPHERE.project(np.asarray(X, dtype=float))
    a = np.sqrt(np.clip(0.5 * (1.0 + X[..., 2]), 0.0, 1.0))
    denom = np.sqrt(2.0 * np.clip(1.0 + X[..., 2], 0.0, None))
    safe = np.where(denom > 1e-150, denom, 1.0)
    b = np.where(denom > 1e-150, (X[..., 0] + 1j * X[..., 1]) / safe, 1.0 + 0j)
    return np.stack([a + 0j, b], axis=-1)


def monomial_norms(k: int) -> np.ndarray:
    """Closed-form ``||m_j||**2 = j! (k - j)! / (k + 1)!``."""
    j = np.arange(k + 1)
    return np.exp(betaln(j + 1, k - j + 1))


def orthonormal_sections(k: int, X: np.ndarray) -> np.ndarray:
    """Orthonormal basis ``m_j / ||m_j||`` evaluated at ``X``, shape ``X.shape[:-1] + (k + 1,)``."""
    ab = spinor_lift(X)
    j = np.arange(k + 1)
    a, b = ab[..., 0:1], ab[..., 1:2]
    scale = np.exp(-0.5 * betaln(j + 1, k - j + 1))
    return scale * b**j * a ** (k - j)


class HolomorphicModel(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    level: int = Field(ge=1)
    nodes: np.ndarray
    weights: np.ndarray
    basis: np.ndarray = Field(description="Orthonormal sections at the quadrature nodes")
    gram: np.ndarray = Field(description="Quadrature Gram matrix of the monomials")

    @property
    def dim(self) -> int:
        return self.level + 1

    def compress(self, values: np.ndarray) -> np.ndarray:
        """``B^dagger diag(w values) B`` for a function sampled on the nodes."""
        return self.basis.conj().T @ ((self.weights * values)[:, None] * self.basis)


def holomorphic_model(k: int, bands: Optional[int] = None) -> HolomorphicModel:
    """Level-``k`` model on ``bands`` Gauss-Legendre bands times ``2 * bands`` longitudes."""
    if k < 1:
        raise DomainError(f"Level must be >= 1, got {k}")
    bands = bands or k + 16
    nodes, weights = SPHERE.liouville_quadrature(bands)
    basis = orthonormal_sections(k, nodes)
    norms = monomial_norms(k)
    ortho_gram = basis.conj().T @ (weights[:, None] * basis)
    drift = float(np.max(np.abs(ortho_gram - np.eye(k + 1))))
    if drift > GRAM_TOL:
        raise ResolutionError(f"Quadrature with {bands} bands under-resolves level {k} (Gram drift {drift:.2e})")
    gram = np.sqrt(norms)[:, None] * ortho_gram * np.sqrt(norms)[None, :]
    logger.debug(f"holomorphic model k={k}: {len(weights)} nodes, gram drift {drift:.2e}")
    return HolomorphicModel(level=k, nodes=nodes, weights=weights, basis=basis, gram=gram)


def toeplitz_operator(f: ClassicalObservable, m: HolomorphicModel) -> HermitianObservable:
    """Matrix of ``Pi M_f Pi`` in the orthonormal monomial basis."""
    if f.dim != 3:
        raise DomainError("Toeplitz operators need an observable on the sphere")
    return HermitianObservable(matrix=m.compress(f(m.nodes)))


def _check_ray(p: Ray, m: HolomorphicModel) -> None:
    if p.dim != m.dim:
        raise DomainError(f"Ray of dimension {p.dim} is not a level-{m.level} section")


def coherent_kernel_values(X: np.ndarray, p: Ray, k: int) -> np.ndarray:
    """``u_k(x, p) = |s(x)|**2`` for the unit section with coefficients ``p``."""
    return np.abs(orthonormal_sections(k, X) @ p.vector) ** 2


def coherent_kernel(x: PhasePoint, p: Ray, m: HolomorphicModel) -> float:
    _check_ray(p, m)
    return float(coherent_kernel_values(SPHERE.embed(x), p, m.level))


def kernel_form(X: np.ndarray, k: int) -> HermitianObservable:
    """Rank-one form ``P_x`` with ``u_k(x, p) = <p, P_x p>``."""
    a = orthonormal_sections(k, X)
    return HermitianObservable(matrix=np.outer(np.conj(a), a))


class BerezinCheck(BaseModel):
    matrix_side: float
    integral_side: float


def berezin_symbol_check(f: ClassicalObservable, p: Ray, m: HolomorphicModel) -> BerezinCheck:
    """Symbol of the Toeplitz operator against an independent finer quadrature of ``f u_k``."""
    _check_ray(p, m)
    nodes, weights = SPHERE.liouville_quadrature(2 * (m.level + 16))
    integral = float(np.sum(weights * f(nodes) * coherent_kernel_values(nodes, p, m.level)))
    return BerezinCheck(matrix_side=symbol_value(toeplitz_operator(f, m), p), integral_side=integral)


class RawnsleyLambda(BaseModel):
    trace: float
    monte_carlo: float


def rawnsley_lambda(x: PhasePoint, m: HolomorphicModel, rng: Optional[np.random.Generator] = None,
                    samples: int = 10_000) -> RawnsleyLambda:
    """Average of ``u_k(x, .)`` over rays with the unitarily invariant probability measure.

    The average of ``<p, P_x p>`` is ``tr(P_x) / (k + 1)``; the Monte-Carlo
    estimate draws normalized complex Gaussian vectors.
    """
    a = orthonormal_sections(m.level, SPHERE.embed(x))
    rng = rng or np.random.default_rng(0)
    c = rng.normal(size=(samples, m.dim)) + 1j * rng.normal(size=(samples, m.dim))
    c /= np.linalg.norm(c, axis=1, keepdims=True)
    return RawnsleyLambda(
        trace=float(np.sum(np.abs(a) ** 2) / m.dim),
        monte_carlo=float(np.mean(np.abs(c @ a) ** 2)),
    )


def _commutator_and_bracket(f: ClassicalObservable, g: ClassicalObservable, m: HolomorphicModel):
    Af, Ag = toeplitz_operator(f, m).matrix, toeplitz_operator(g, m).matrix
    commutator = (Af @ Ag - Ag @ Af) / 1j
    bracket = toeplitz_operator(SPHERE.bracket_observable(f, g), m).matrix
    return commutator, bracket


def fitted_scale(f: ClassicalObservable, g: ClassicalObservable, m: HolomorphicModel) -> float:
    """Least-squares ``c`` in ``c (1/i)[A_f, A_g] ~ A_{f,g}``."""
    C, A = _commutator_and_bracket(f, g, m)
    denom = np.vdot(C, C).real
    return 0.0 if denom == 0.0 else float(np.vdot(C, A).real / denom)


def calibrate_kappa(f: ClassicalObservable, g: ClassicalObservable, levels: Sequence[int] = REFERENCE_LEVELS) -> float:
    """Frozen ``kappa`` from ``c(k) / k`` at two levels, Richardson-extrapolated in ``1/k``."""
    lo, hi = levels
    k_lo = fitted_scale(f, g, holomorphic_model(lo)) / lo
    k_hi = fitted_scale(f, g, holomorphic_model(hi)) / hi
    return float((hi * k_hi - lo * k_lo) / (hi - lo))


def _relative(C: np.ndarray, A: np.ndarray, c: float) -> float:
    scale = np.linalg.norm(A)
    diff = np.linalg.norm(c * C - A)
    return float(diff / scale) if scale > 0 else float(diff)


def asymptotic_residual(f: ClassicalObservable, g: ClassicalObservable, k_list: Sequence[int],
                        kappa: float = KAPPA) -> List[float]:
    """``||kappa k (1/i)[A_f, A_g] - A_{f,g}|| / ||A_{f,g}||`` for each level."""
    if list(k_list) != sorted(k_list) or min(k_list) < 2:
        raise DomainError("Levels must be ascending and at least 2")
    out = []
    for k in k_list:
        C, A = _commutator_and_bracket(f, g, holomorphic_model(k))
        out.append(_relative(C, A, kappa * k))
    return out


def proportionality_defect(f: ClassicalObservable, g: ClassicalObservable, k: int) -> float:
    """Residual after the best scalar fit; zero when ``f`` generates a holomorphic isometry."""
    m = holomorphic_model(k)
    C, A = _commutator_and_bracket(f, g, m)
    return _relative(C, A, fitted_scale(f, g, m))


def residual_table(k_list: Sequence[int], residuals: Sequence[float]) -> pd.DataFrame:
    """Per-level residuals with the log-log slope of the whole sweep."""
    slope = float(np.polyfit(np.log(k_list), np.log(residuals), 1)[0]) if len(k_list) > 1 else float("nan")
    return pd.DataFrame({"k": list(k_list), "residual": list(residuals), "fitted_slope": slope})
