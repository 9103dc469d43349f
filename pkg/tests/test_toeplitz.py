import numpy as np
import numpy.testing as npt
import pytest

from quantum_cycles.geometry.errors import ResolutionError
from quantum_cycles.geometry.observables import (
    bump,
    constant,
    coordinate,
    height,
    quadratic_form,
    random_sphere_polynomial,
)
from quantum_cycles.geometry.phase_space import PhaseModel, PhasePoint
from quantum_cycles.geometry.projective_qm import Ray, random_ray
from quantum_cycles.geometry.toeplitz import (
    KAPPA,
    asymptotic_residual,
    berezin_symbol_check,
    calibrate_kappa,
    coherent_kernel,
    coherent_kernel_values,
    holomorphic_model,
    kernel_form,
    monomial_norms,
    proportionality_defect,
    rawnsley_lambda,
    residual_table,
    toeplitz_operator,
)

SPHERE = PhaseModel(kind="sphere")
X = coordinate(0, 3)
NORTH = PhasePoint(chart="north", coords=(0.0, 0.0))
SOUTH = PhasePoint(chart="south", coords=(0.0, 0.0))


@pytest.mark.parametrize("k", [1, 5, 20])
def test_gram_is_diagonal_with_beta_entries(k):
    m = holomorphic_model(k)
    norms = monomial_norms(k)
    npt.assert_allclose(np.diag(m.gram).real, norms, rtol=1e-9)
    off = m.gram - np.diag(np.diag(m.gram))
    assert np.max(np.abs(off) / np.sqrt(np.outer(norms, norms))) < 1e-10
    assert np.all(np.linalg.eigvalsh(m.gram) > 0)


def test_under_resolved_quadrature_is_detected():
    with pytest.raises(ResolutionError):
        holomorphic_model(12, bands=4)


def test_toeplitz_operators_of_simple_functions():
    k = 6
    m = holomorphic_model(k)
    npt.assert_allclose(toeplitz_operator(constant(1.0, 3), m).matrix, np.eye(k + 1), atol=1e-12)
    Az = toeplitz_operator(height(), m).matrix
    j = np.arange(k + 1)
    npt.assert_allclose(Az, np.diag((k - 2 * j) / (k + 2)), atol=1e-12)
    npt.assert_allclose(np.diag(toeplitz_operator(X, m).matrix), 0.0, atol=1e-13)


def test_positive_functions_give_positive_operators():
    m = holomorphic_model(10)
    for f in (quadratic_form(0.0, np.zeros(3), np.diag([1.0, 0.0, 0.0])), bump([0.0, 0.6, 0.8], 0.7)):
        assert np.min(np.linalg.eigvalsh(toeplitz_operator(f, m).matrix)) >= -1e-10


def test_coherent_kernel_of_the_top_monomial_peaks_at_its_pole():
    k = 7
    m = holomorphic_model(k)
    top = Ray.from_vector(np.eye(k + 1)[k])
    nodes, weights = SPHERE.liouville_quadrature(40)
    values = coherent_kernel_values(nodes, top, k)
    assert coherent_kernel(SOUTH, top, m) == pytest.approx(k + 1)
    assert np.max(values) <= coherent_kernel(SOUTH, top, m)
    assert coherent_kernel(NORTH, top, m) == pytest.approx(0.0, abs=1e-14)
    p = random_ray(np.random.default_rng(0), k + 1)
    u = coherent_kernel_values(nodes, p, k)
    assert np.min(u) >= 0.0
    assert np.sum(weights * u) == pytest.approx(1.0, abs=1e-12)


def test_kernel_is_a_rank_one_positive_form():
    k = 5
    x = SPHERE.embed(PhasePoint(chart="north", coords=(1.1, 0.4)))
    evals = np.linalg.eigvalsh(kernel_form(x, k).matrix)
    npt.assert_allclose(evals[:-1], 0.0, atol=1e-12)
    assert evals[-1] == pytest.approx(k + 1)


@pytest.mark.parametrize("f", [constant(1.0, 3), height(), random_sphere_polynomial(np.random.default_rng(1))],
                         ids=["one", "z", "quadratic"])
def test_berezin_symbol_is_the_kernel_integral(f):
    k = 9
    m = holomorphic_model(k)
    for p in (Ray.from_vector(np.eye(k + 1)[k]), Ray.from_vector(np.ones(k + 1))):
        check = berezin_symbol_check(f, p, m)
        assert check.matrix_side == pytest.approx(check.integral_side, abs=1e-8)
    assert berezin_symbol_check(height(), Ray.from_vector(np.eye(k + 1)[k]), m).matrix_side == pytest.approx(-k / (k + 2))


def test_rawnsley_lambda_is_constant():
    m = holomorphic_model(8)
    assert rawnsley_lambda(NORTH, m).trace == pytest.approx(rawnsley_lambda(SOUTH, m).trace, abs=1e-12)
    rng = np.random.default_rng(2)
    for _ in range(5):
        x = PhasePoint(chart="north", coords=(float(rng.uniform(0, 3.1)), float(rng.uniform(-3, 3))))
        lam = rawnsley_lambda(x, m, rng=rng)
        assert lam.trace == pytest.approx(1.0, abs=1e-12)
        assert lam.monte_carlo == pytest.approx(lam.trace, abs=0.05)


def test_calibration_constant():
    assert calibrate_kappa(height(), X) == pytest.approx(KAPPA, rel=1e-9)


def test_correspondence_residual_decays_like_one_over_k():
    ks = [4, 8, 16, 32, 64]
    residuals = asymptotic_residual(height(), X, ks)
    npt.assert_allclose(residuals, [2 / (k + 2) for k in ks], atol=1e-10)
    table = residual_table(ks, residuals)
    assert list(table.columns) == ["k", "residual", "fitted_slope"]
    assert table["fitted_slope"].iloc[0] <= -0.8


def test_correspondence_residual_vanishes_for_trivial_pairs():
    assert max(asymptotic_residual(X, X, [2, 4])) == 0.0
    assert max(asymptotic_residual(constant(1.0, 3), constant(2.0, 3), [2, 4])) < 1e-12


def test_height_generates_an_exactly_quantizable_flow():
    rng = np.random.default_rng(3)
    f, g = random_sphere_polynomial(rng), random_sphere_polynomial(rng)
    assert proportionality_defect(height(), g, 8) < 1e-10
    assert proportionality_defect(f, g, 8) > 1e-4
