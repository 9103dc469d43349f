"""Prequantum line bundle over the torus grid and Souriau-Kostant operators.

Sections are stored on the fundamental domain ``p_i = i/n, q_j = j/n`` and
extended by the twist ``s(p + 1, q) = exp(2 pi i k q) s(p, q)``,
``s(p, q + 1) = s(p, q)``. The connection is ``d - 2 pi i k alpha`` with
``alpha = p dq``, adjusted by ``1/2 d phi + i rho`` to be compatible with the
hermitian weight ``exp(phi)``. Link factors are exact integrals of the
connection form, so plaquette holonomies carry the enclosed area. An
optional ``extra_form`` perturbs the links: its real part breaks compatibility
with the weight and a non-closed imaginary part bends the curvature.
"""

import json
from typing import Callable, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from quantum_cycles.geometry.errors import DomainError, InvalidStructureError, ResolutionError
from quantum_cycles.geometry.observables import ClassicalObservable
from quantum_cycles.geometry.phase_space import PhaseModel
from quantum_cycles.utils.logger import get_debug_logger

logger = get_debug_logger(__name__)

TWIST_RULE = "s(p+1,q) = exp(2 pi i k q) s(p,q); s(p,q+1) = s(p,q)"


class PrequantumBundle(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    model: PhaseModel
    level: int = Field(ge=1)
    n: int = Field(ge=8, description="Grid points per direction")
    log_weight: Optional[np.ndarray] = Field(default=None, description="phi with hermitian weight exp(phi)")
    rho: Tuple[float, float] = Field(default=(0.0, 0.0), description="Closed imaginary part i(rho_p dp + rho_q dq)")
    extra_form: Optional[np.ndarray] = Field(
        default=None, description="Complex 1-form added to the connection on p- and q-links, shape (2, n, n)"
    )

    @model_validator(mode="after")
    def _check(self) -> "PrequantumBundle":
        if self.model.kind != "torus":
            raise DomainError("Prequantum grids are built on the torus model")
        if self.log_weight is not None:
            if self.log_weight.shape != (self.n, self.n):
                raise DomainError(f"Weight must be sampled on the {self.n}x{self.n} grid")
            if not np.all(np.isfinite(self.log_weight)):
                raise InvalidStructureError("Hermitian weight must be finite and strictly positive")
        if self.extra_form is not None and self.extra_form.shape != (2, self.n, self.n):
            raise DomainError(f"Extra connection form must have shape {(2, self.n, self.n)}")
        return self

    @classmethod
    def with_weight(cls, model: PhaseModel, level: int, n: int, weight: np.ndarray,
                    rho: Tuple[float, float] = (0.0, 0.0)) -> "PrequantumBundle":
        weight = np.asarray(weight, dtype=float)
        if np.any(weight <= 0.0):
            raise InvalidStructureError("Hermitian weight must be strictly positive")
        return cls(model=model, level=level, n=n, log_weight=np.log(weight), rho=rho)

    @property
    def h(self) -> float:
        return 1.0 / self.n

    @property
    def phi(self) -> np.ndarray:
        return np.zeros((self.n, self.n)) if self.log_weight is None else self.log_weight

    def grid(self) -> np.ndarray:
        """Grid points, shape ``(n, n, 2)`` indexed ``[i, j]``."""
        x = np.arange(self.n) * self.h
        P, Q = np.meshgrid(x, x, indexing="ij")
        return np.stack([P, Q], axis=-1)

    def twist(self) -> np.ndarray:
        return np.exp(2j * np.pi * self.level * np.arange(self.n) * self.h)

    def links(self) -> Tuple[np.ndarray, np.ndarray]:
        """Forward transport factors ``exp(int A)`` along p-links and q-links."""
        k, h, phi = self.level, self.h, self.phi
        p = self.grid()[..., 0]
        half_dp = 0.5 * (np.roll(phi, -1, axis=0) - phi)
        half_dq = 0.5 * (np.roll(phi, -1, axis=1) - phi)
        Lp = np.exp(half_dp + 1j * self.rho[0] * h)
        Lq = np.exp(half_dq + 1j * self.rho[1] * h - 2j * np.pi * k * p * h)
        if self.extra_form is not None:
            Lp, Lq = Lp * np.exp(h * self.extra_form[0]), Lq * np.exp(h * self.extra_form[1])
        return Lp, Lq

    def shift(self, s: np.ndarray, axis: int, step: int) -> np.ndarray:
        """Values of the neighbours ``s(x + step e_axis)`` written in the frame at ``x``."""
        out = np.roll(s, -step, axis=axis)
        if axis == 0:
            if step == 1:
                out[-1, :] = out[-1, :] * self.twist()
            else:
                out[0, :] = out[0, :] * np.conj(self.twist())
        return out

    def covariant(self, s: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Centered covariant differences ``(nabla_p s, nabla_q s)``."""
        out = []
        for axis, L in enumerate(self.links()):
            forward = L * self.shift(s, axis, 1)
            backward = self.shift(s, axis, -1) / np.roll(L, 1, axis=axis)
            out.append((forward - backward) / (2.0 * self.h))
        return out[0], out[1]

    def pairing(self, s1: np.ndarray, s2: np.ndarray) -> complex:
        """Liouville-weighted ``<s1, s2>``, antilinear in ``s1``."""
        return complex(np.sum(np.exp(self.phi) * np.conj(s1) * s2) * self.h**2)

    def norm(self, s: np.ndarray) -> float:
        return float(np.sqrt(self.pairing(s, s).real))


class DiscretizedSection(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    bundle: PrequantumBundle
    values: np.ndarray

    @model_validator(mode="after")
    def _shape(self) -> "DiscretizedSection":
        if self.values.shape != (self.bundle.n, self.bundle.n):
            raise DomainError(f"Section values must have shape {(self.bundle.n, self.bundle.n)}")
        return self

    def extended(self) -> np.ndarray:
        """Values on the closed grid ``[0, 1] x [0, 1]`` via the twist rule."""
        b, s = self.bundle, self.values
        top = s[:1, :] * b.twist()
        full = np.vstack([s, top])
        return np.hstack([full, full[:, :1]])

    def to_bytes(self) -> bytes:
        header = {
            "n": self.bundle.n,
            "level": self.bundle.level,
            "twist": TWIST_RULE,
            "dtype": "complex128",
            "endianness": "little",
        }
        return json.dumps(header).encode() + b"\n" + self.values.astype("<c16").tobytes()

    @classmethod
    def from_bytes(cls, data: bytes, bundle: PrequantumBundle) -> "DiscretizedSection":
        head, _, body = data.partition(b"\n")
        header = json.loads(head)
        if header["n"] != bundle.n or header["level"] != bundle.level:
            raise DomainError("Serialized section does not match the bundle grid or level")
        values = np.frombuffer(body, dtype="<c16").reshape(bundle.n, bundle.n)
        return cls(bundle=bundle, values=values.astype(complex))


SectionFn = Callable[[np.ndarray, np.ndarray], np.ndarray]


def smooth_section_function(level: int, rng: np.random.Generator, terms: int = 3, width: float = 0.2,
                            max_mode: int = 2) -> SectionFn:
    """Random smooth section ``sum_t c_t(q) sum_m g_t(p + m) exp(-2 pi i k m q)``.

    Each periodized Gaussian in ``p`` picks up exactly the twist factor.
    """
    centers = rng.uniform(0.0, 1.0, size=terms)
    coeffs = rng.normal(size=(terms, 2 * max_mode + 1)) + 1j * rng.normal(size=(terms, 2 * max_mode + 1))
    modes = np.arange(-max_mode, max_mode + 1)

    def section(P: np.ndarray, Q: np.ndarray) -> np.ndarray:
        out = np.zeros(np.broadcast(P, Q).shape, dtype=complex)
        for c, a in zip(centers, coeffs):
            envelope = np.exp(2j * np.pi * np.multiply.outer(Q, modes)) @ a
            theta = np.zeros_like(out)
            for m in range(-4, 5):
                theta += np.exp(-0.5 * ((P + m - c) / width) ** 2) * np.exp(-2j * np.pi * level * m * Q)
            out += envelope * theta
        return out

    return section


def random_section(bundle: PrequantumBundle, rng: np.random.Generator, normalized: bool = True) -> DiscretizedSection:
    X = bundle.grid()
    values = smooth_section_function(bundle.level, rng)(X[..., 0], X[..., 1])
    if normalized:
        values = values / bundle.norm(values)
    return DiscretizedSection(bundle=bundle, values=values)


class KostantOperator(BaseModel):
    """Matrix-free ``Q_f s = -nabla_{X_f} s + 2 pi i k f s`` and ``Q^_f = i Q_f``."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    bundle: PrequantumBundle
    observable: ClassicalObservable
    field: np.ndarray
    values: np.ndarray

    def apply(self, s: np.ndarray) -> np.ndarray:
        b = self.bundle
        Dp, Dq = b.covariant(s)
        return -(self.field[..., 0] * Dp + self.field[..., 1] * Dq) + 2j * np.pi * b.level * self.values * s

    def apply_hat(self, s: np.ndarray) -> np.ndarray:
        return 1j * self.apply(s)

    def adjoint(self, s: np.ndarray) -> np.ndarray:
        """Adjoint of ``Q_f`` for the weighted pairing, as an exact discrete transpose."""
        b = self.bundle
        weight = np.exp(b.phi)
        v = weight * s
        out = -2j * np.pi * b.level * self.values * v
        for axis, L in enumerate(b.links()):
            x = self.field[..., axis] * v
            forward_t = b.shift(np.conj(L) * x, axis, -1)
            backward_t = b.shift(np.conj(1.0 / np.roll(L, 1, axis=axis)) * x, axis, 1)
            out -= (forward_t - backward_t) / (2.0 * b.h)
        return out / weight

    def adjoint_hat(self, s: np.ndarray) -> np.ndarray:
        return -1j * self.adjoint(s)


def kostant_operator(f: ClassicalObservable, b: PrequantumBundle) -> KostantOperator:
    X = b.grid()
    field = b.model.hamiltonian_vector(f, X)
    displacement = float(np.max(np.abs(field))) * b.h
    if displacement >= 1.0 or 4 * b.level > b.n:
        raise ResolutionError(
            f"Grid n={b.n} too coarse for {f.name} at level {b.level} (per-cell displacement {displacement:.3f})"
        )
    return KostantOperator(bundle=b, observable=f, field=field, values=f(X))


def _batch(b: PrequantumBundle, rng: Optional[np.random.Generator], sections: Optional[List[np.ndarray]],
           count: int) -> List[np.ndarray]:
    if sections is not None:
        return sections
    rng = rng or np.random.default_rng(0)
    return [random_section(b, rng).values for _ in range(count)]


def commutator_residual(f: ClassicalObservable, g: ClassicalObservable, b: PrequantumBundle,
                        rng: Optional[np.random.Generator] = None, sections: Optional[List[np.ndarray]] = None,
                        count: int = 4) -> float:
    """Largest ``||[Q_f, Q_g] s - Q_{f,g} s|| / ||s||`` over a batch of smooth sections."""
    Qf, Qg = kostant_operator(f, b), kostant_operator(g, b)
    Qfg = kostant_operator(b.model.bracket_observable(f, g), b)
    worst = 0.0
    for s in _batch(b, rng, sections, count):
        r = Qf.apply(Qg.apply(s)) - Qg.apply(Qf.apply(s)) - Qfg.apply(s)
        worst = max(worst, b.norm(r) / b.norm(s))
    logger.debug(f"commutator residual n={b.n}: {worst:.3e}")
    return worst


def adjointness_residual(f: ClassicalObservable, b: PrequantumBundle, s1: np.ndarray, s2: np.ndarray) -> float:
    """``|<Q_f s1, s2> + <s1, Q_f s2>|``; zero for a skew-adjoint ``Q_f``."""
    Q = kostant_operator(f, b)
    return float(abs(b.pairing(Q.apply(s1), s2) + b.pairing(s1, Q.apply(s2))))


def hermiticity_residual(f: ClassicalObservable, b: PrequantumBundle, rng: Optional[np.random.Generator] = None,
                         count: int = 4) -> float:
    """Largest ``||(Q^_f - Q^_f^dagger) s|| / ||s||`` over smooth sections."""
    Q = kostant_operator(f, b)
    return max(
        b.norm(Q.apply_hat(s) - Q.adjoint_hat(s)) / b.norm(s) for s in _batch(b, rng, None, count)
    )


def plaquette_holonomy(b: PrequantumBundle) -> np.ndarray:
    """Holonomy around each grid cell, counterclockwise in ``(p, q)``."""
    Lp, Lq = b.links()
    H = Lq * np.roll(Lp, -1, axis=1) / (Lp * np.roll(Lq, -1, axis=0))
    H[-1, :] *= np.exp(2j * np.pi * b.level * b.h)
    return H


def curvature_residual(b: PrequantumBundle) -> float:
    """``max |arg(plaquette) - 2 pi k (cell area)|``."""
    return float(np.max(np.abs(np.angle(plaquette_holonomy(b)) - 2.0 * np.pi * b.level * b.h**2)))


def chern_number(b: PrequantumBundle) -> float:
    return float(np.sum(np.angle(plaquette_holonomy(b))) / (2.0 * np.pi))


def compatibility_residual(b: PrequantumBundle, s1: np.ndarray, s2: np.ndarray) -> float:
    """``max |d<s1,s2>_h - <nabla s1, s2>_h - <s1, nabla s2>_h|`` pointwise on the grid."""
    w = np.exp(b.phi)
    density = w * np.conj(s1) * s2
    D1, D2 = b.covariant(s1), b.covariant(s2)
    worst = 0.0
    for axis in range(2):
        d_density = (np.roll(density, -1, axis=axis) - np.roll(density, 1, axis=axis)) / (2.0 * b.h)
        rhs = w * (np.conj(D1[axis]) * s2 + np.conj(s1) * D2[axis])
        worst = max(worst, float(np.max(np.abs(d_density - rhs))))
    return worst


class HermitianComparison(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    phi: np.ndarray
    delta_connection: np.ndarray = Field(description="Difference of link 1-forms, shape (2, n, n)")
    real_residual: float = Field(description="max |Re delta - 1/2 d phi|")
    curl: float = Field(description="max |curl Im delta|")
    periods: Tuple[float, float] = Field(description="Im delta integrated around the p- and q-cycles")


def hermitian_compare(b1: PrequantumBundle, b2: PrequantumBundle) -> HermitianComparison:
    """Relate two connections through the ratio of their hermitian weights.

    Both are compatible with their weights exactly when ``real_residual``
    vanishes; ``curl`` then measures the curvature gap and ``periods`` the
    holonomy of the remaining imaginary part.
    """
    if (b1.n, b1.level) != (b2.n, b2.level):
        raise DomainError("Bundles must share grid and level")
    phi = b1.phi - b2.phi
    delta = np.stack([np.log(a / c) / b1.h for a, c in zip(b1.links(), b2.links())])
    half_dphi = np.stack([0.5 * (np.roll(phi, -1, axis=a) - phi) / b1.h for a in range(2)])
    im = delta.imag
    curl = (np.roll(im[1], -1, axis=0) - im[1]) - (np.roll(im[0], -1, axis=1) - im[0])
    return HermitianComparison(
        phi=phi,
        delta_connection=delta,
        real_residual=float(np.max(np.abs(delta.real - half_dphi))),
        curl=float(np.max(np.abs(curl))) / b1.h,
        periods=(float(np.sum(im[0][:, 0]) * b1.h), float(np.sum(im[1][0, :]) * b1.h)),
    )


class ContactLift(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    vertical: ClassicalObservable
    offset_spread: float = Field(description="Spread of g - f on the grid")
    lie_residual: float


def _grid_observable(values: np.ndarray, name: str) -> ClassicalObservable:
    """Trigonometric interpolant of samples on the ``n x n`` grid."""
    n = values.shape[0]
    coeffs = np.fft.fft2(values) / n**2
    modes = np.fft.fftfreq(n, d=1.0 / n)

    def func(X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        ep = np.exp(2j * np.pi * np.multiply.outer(X[..., 0], modes))
        eq = np.exp(2j * np.pi * np.multiply.outer(X[..., 1], modes))
        return np.einsum("...a,ab,...b->...", ep, coeffs, eq).real

    return ClassicalObservable(name=name, dim=2, func=func)


def contact_lift(f: ClassicalObservable, b: PrequantumBundle, c: float = 0.0) -> ContactLift:
    """Lift ``Y_f = X_f + v d/dt`` to the circle bundle with connection form ``A``.

    ``Lie_{Y_f} A = d(A(Y_f)) + iota_{X_f} dA`` and ``dA = -F omega``, with
    ``F`` the curvature density read off the plaquette holonomies (``F = k``
    for the prequantum connection). ``G = A(Y_f)`` is integrated from
    ``dG = F iota_{X_f} omega`` along grid paths out of the origin, the Lie
    derivative is measured by centered differences of ``G``, and the vertical
    part ``g = G / k + f(0) + c / k`` should differ from ``f`` by a constant.
    """
    X = b.grid()
    h, k = b.h, b.level
    field = b.model.hamiltonian_vector(f, X)
    cells = np.angle(plaquette_holonomy(b)) / (2.0 * np.pi * h**2)
    F = 0.25 * (cells + np.roll(cells, 1, axis=0) + np.roll(cells, 1, axis=1) + np.roll(cells, (1, 1), axis=(0, 1)))
    beta = np.stack([F * b.model.omega(X, field, np.broadcast_to(e, field.shape)) for e in np.eye(2)])
    G = np.zeros((b.n, b.n))
    G[0, 1:] = np.cumsum(0.5 * h * (beta[1, 0, :-1] + beta[1, 0, 1:]))
    G[1:, :] = G[0, :] + np.cumsum(0.5 * h * (beta[0, :-1, :] + beta[0, 1:, :]), axis=0)
    worst = 0.0
    for axis in range(2):
        dG = (np.roll(G, -1, axis=axis) - np.roll(G, 1, axis=axis)) / (2.0 * h)
        worst = max(worst, float(np.max(np.abs(dG - beta[axis]))))
    values = G / k + f(X[0, 0]) + c / k
    spread = float(np.ptp(values - f(X)))
    logger.debug(f"contact lift n={b.n}: Lie residual {worst / k:.3e}, offset spread {spread:.3e}")
    return ContactLift(vertical=_grid_observable(values, f"lift({f.name})"), offset_spread=spread,
                       lie_residual=worst / k)


def sk_functional(f: ClassicalObservable, s: DiscretizedSection, tau: float) -> float:
    """``tau * int f <s, s>_h dmu`` on the grid."""
    b = s.bundle
    density = np.exp(b.phi) * np.abs(s.values) ** 2
    return float(tau * np.sum(f(b.grid()) * density) * b.h**2)
