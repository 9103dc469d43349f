import numpy as np
import numpy.testing as npt
import pytest

from quantum_cycles.geometry.errors import DomainError, UndefinedProjectionError
from quantum_cycles.geometry.projective_qm import (
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    HermitianObservable,
    KahlerConventions,
    Ray,
    approach_family,
    commutator_symbol,
    gradient_residual,
    killing_residual,
    n_lambda,
    quasi_symbol_rank,
    random_hermitian,
    random_ray,
    spectrum_tools,
    symbol_brackets,
    symbol_field,
    symbol_function,
    symbol_value,
    transition_probability,
    uncertainty_relation,
)

UP = Ray.from_vector([1.0, 0.0])


def test_pauli_brackets_at_spin_up():
    b = symbol_brackets(PAULI_X, PAULI_Y, UP)
    assert b.poisson == pytest.approx(2.0, abs=1e-14)
    assert b.riemann == pytest.approx(0.0, abs=1e-14)
    assert symbol_value(PAULI_Z, UP) == pytest.approx(1.0)


@pytest.mark.parametrize("h", [1.0, 0.25])
def test_poisson_bracket_is_commutator_symbol(h):
    rng = np.random.default_rng(3)
    conv = KahlerConventions(planck=h)
    for _ in range(5):
        F, K, p = random_hermitian(rng, 4), random_hermitian(rng, 4), random_ray(rng, 4)
        assert symbol_brackets(F, K, p, conv).poisson == pytest.approx(commutator_symbol(F, K, p, conv), abs=1e-10)


def test_symbol_field_is_horizontal():
    rng = np.random.default_rng(4)
    F, p = random_hermitian(rng, 5), random_ray(rng, 5)
    assert abs(np.vdot(p.vector, symbol_field(F, p))) < 1e-12
    assert gradient_residual(F, p, rng) < 1e-6


def test_uncertainty_relation_holds_and_saturates_for_qubits():
    rng = np.random.default_rng(5)
    for _ in range(10):
        F, K, p = random_hermitian(rng, 3), random_hermitian(rng, 3), random_ray(rng, 3)
        assert uncertainty_relation(F, K, p).satisfied
    F, K, p = random_hermitian(rng, 2), random_hermitian(rng, 2), random_ray(rng, 2)
    u = uncertainty_relation(F, K, p, KahlerConventions(planck=0.5))
    assert u.delta_f2 * u.delta_k2 == pytest.approx(u.lower_bound, rel=1e-9)


@pytest.mark.parametrize("h", [1.0, 0.5])
def test_transition_probability_from_geodesic_length(h):
    rng = np.random.default_rng(6)
    conv = KahlerConventions(planck=h)
    for _ in range(5):
        p0, p = random_ray(rng, 4), random_ray(rng, 4)
        t = transition_probability(p0, p, conv)
        assert t.geodesic_check == pytest.approx(t.prob, abs=1e-10)
    t = transition_probability(Ray.from_vector([1, 0, 0]), Ray.from_vector([0, 1j, 0]), conv)
    assert t.prob == 0.0
    assert t.geodesic_check == pytest.approx(0.0, abs=1e-12)
    assert t.distance == pytest.approx(np.sqrt(2 * h) * np.pi / 2, rel=1e-12)


def test_rays_ignore_global_phase():
    v = np.array([0.3 - 0.2j, 1.0j, -0.5])
    npt.assert_allclose(Ray.from_vector(np.exp(0.7j) * v).vector, Ray.from_vector(v).vector, atol=1e-15)
    with pytest.raises(DomainError):
        Ray.from_vector([0.0, 0.0])
    with pytest.raises(DomainError):
        symbol_value(PAULI_X, Ray.from_vector([1, 0, 0]))


def test_eigenrays_are_critical_and_n_lambda_blows_up():
    rng = np.random.default_rng(7)
    F = random_hermitian(rng, 4)
    evals, evecs = np.linalg.eigh(F.matrix)
    eig = Ray.from_vector(evecs[:, 1])
    report = spectrum_tools(F, (evals[1] - 1e-6, evals[1] + 1e-6), eig)
    assert report.is_critical
    assert report.projected.same_as(eig)
    eps = np.array([1e-1, 1e-2, 1e-3])
    values = [n_lambda(F, evals[1], s) for s in approach_family(F, 1, eps)]
    assert np.polyfit(np.log(eps), np.log(values), 1)[0] == pytest.approx(-2.0, abs=0.01)
    with pytest.raises(UndefinedProjectionError):
        spectrum_tools(F, (evals[2] - 1e-6, evals[2] + 1e-6), eig)


def test_spectral_projection_is_the_nearest_ray_in_the_subspace():
    rng = np.random.default_rng(8)
    F, p = random_hermitian(rng, 5), random_ray(rng, 5)
    evals, evecs = np.linalg.eigh(F.matrix)
    projected = spectrum_tools(F, (evals[0], evals[2]), p).projected
    best = projected.overlap(p)
    for _ in range(200):
        c = rng.normal(size=3) + 1j * rng.normal(size=3)
        assert Ray.from_vector(evecs[:, :3] @ c).overlap(p) <= best + 1e-12


def test_symbols_are_killing_and_their_squares_are_not():
    rng = np.random.default_rng(9)
    F = random_hermitian(rng, 3)
    sample = [random_ray(rng, 3) for _ in range(3)]
    f = symbol_function(F)
    assert killing_residual(f, sample) < 1e-5
    assert killing_residual(lambda v: f(v) ** 2, sample) > 1e-4


@pytest.mark.parametrize("d", [2, 3])
def test_symbols_span_a_space_of_dimension_d_squared(d):
    assert quasi_symbol_rank(d, np.random.default_rng(d)) == d * d


def test_observable_json_round_trip():
    F = HermitianObservable(matrix=[[1, 2 - 1j], [2 + 1j, -3]])
    npt.assert_allclose(HermitianObservable.from_json(F.to_json()).matrix, F.matrix)
