import numpy as np
import numpy.testing as npt
import pytest

from quantum_cycles.geometry.errors import DomainError, FlowEscapeError
from quantum_cycles.geometry.observables import (
    constant,
    coordinate,
    height,
    random_sphere_polynomial,
    random_trig_polynomial,
    trig_polynomial,
)
from quantum_cycles.geometry.phase_space import (
    PhaseModel,
    PhasePoint,
    flow_liouville_residual,
    flow_symplectic_residual,
    hamiltonian_flow,
    jacobi_residual,
    leibniz_residual,
    liouville_integral,
    poisson_bracket,
    potential_residual,
    random_points,
)

SPHERE = PhaseModel(kind="sphere")
TORUS = PhaseModel(kind="torus")


def test_torus_canonical_bracket():
    p, q = coordinate(0, 2), coordinate(1, 2)
    for coords in [(0.1, 0.2), (0.7, 0.4)]:
        assert poisson_bracket(p, q, PhasePoint(chart="torus", coords=coords), TORUS) == pytest.approx(1.0)


def test_bracket_is_antisymmetric():
    f = random_sphere_polynomial(np.random.default_rng(0))
    x = PhasePoint(chart="north", coords=(0.8, 1.1))
    assert poisson_bracket(f, f, x, SPHERE) == pytest.approx(0.0, abs=1e-12)


def test_sphere_bracket_constant_at_north_pole():
    x, y = coordinate(0, 3), coordinate(1, 3)
    pole = PhasePoint(chart="north", coords=(0.0, 0.0))
    assert poisson_bracket(x, y, pole, SPHERE) == pytest.approx(4.0 * np.pi)
    # finite-difference oracle agrees with the exact differentials
    fd = poisson_bracket(x.without_differential(), y.without_differential(), pole, SPHERE)
    assert fd == pytest.approx(4.0 * np.pi, rel=1e-8)


def test_point_outside_chart_raises():
    with pytest.raises(DomainError):
        poisson_bracket(coordinate(0, 2), coordinate(1, 2), PhasePoint(chart="torus", coords=(1.5, 0.0)), TORUS)
    with pytest.raises(DomainError):
        SPHERE.embed(PhasePoint(chart="torus", coords=(0.1, 0.1)))


def test_constant_flow_is_identity():
    x = PhasePoint(chart="north", coords=(0.6, 0.3))
    y = hamiltonian_flow(constant(2.0, 3), x, 0.7, 10, SPHERE)
    npt.assert_allclose(SPHERE.embed(y), SPHERE.embed(x), atol=1e-14)


def test_height_flow_has_period_one_half():
    x = PhasePoint(chart="north", coords=(1.0, 0.2))
    y = hamiltonian_flow(height(), x, 0.5, 2000, SPHERE)
    npt.assert_allclose(SPHERE.embed(y), SPHERE.embed(x), atol=1e-4)


def test_torus_momentum_flow_translates_q_backwards():
    x = PhasePoint(chart="torus", coords=(0.3, 0.6))
    y = hamiltonian_flow(coordinate(0, 2), x, 0.25, 5, TORUS)
    npt.assert_allclose(y.coords, (0.3, 0.35), atol=1e-12)


def test_flow_conserves_energy():
    f = random_sphere_polynomial(np.random.default_rng(3))
    x = PhasePoint(chart="north", coords=(0.9, 2.0))
    y = hamiltonian_flow(f, x, 0.2, 4000, SPHERE)
    assert abs(f(SPHERE.embed(y)) - f(SPHERE.embed(x))) < 1e-5


def test_darboux_flow_escape_reports_last_point():
    chart = PhaseModel(kind="darboux", p_range=(0.0, 1.0), q_range=(0.0, 1.0))
    x = PhasePoint(chart="darboux", coords=(0.5, 0.1))
    with pytest.raises(FlowEscapeError) as info:
        hamiltonian_flow(coordinate(0, 2), x, 0.5, 50, chart)
    assert info.value.last_valid.chart == "darboux"


def test_liouville_integrals():
    assert liouville_integral(constant(1.0, 3), SPHERE) == pytest.approx(1.0, abs=1e-12)
    assert liouville_integral(height(), SPHERE) == pytest.approx(0.0, abs=1e-12)
    cosq = trig_polynomial([(0, 1, 1.0, 0.0)])
    assert liouville_integral(cosq, TORUS) == pytest.approx(0.0, abs=1e-12)
    assert SPHERE.area_residual() <= 1e-10
    assert TORUS.area_residual() <= 1e-10


def test_potential_is_primitive_of_omega():
    rng = np.random.default_rng(1)
    assert potential_residual(SPHERE, rng) < 1e-4
    assert potential_residual(TORUS, rng) < 1e-10


@pytest.mark.parametrize("model", [SPHERE, TORUS], ids=["sphere", "torus"])
def test_jacobi_and_leibniz(model):
    rng = np.random.default_rng(7)
    make = random_sphere_polynomial if model.kind == "sphere" else random_trig_polynomial
    for _ in range(10):
        f, g, h = make(rng), make(rng), make(rng)
        X = random_points(model, rng, 20)
        scale = 1.0 + np.max(np.abs(model.poisson(f, g, X)))
        assert np.max(np.abs(jacobi_residual(model, f, g, h, X))) < 1e-4 * scale**2
        assert np.max(np.abs(leibniz_residual(model, f, g, h, X))) < 1e-8 * scale**2


def test_flow_preserves_omega_and_liouville():
    f = random_sphere_polynomial(np.random.default_rng(5))
    x = PhasePoint(chart="north", coords=(1.2, 0.4))
    assert flow_symplectic_residual(f, x, 0.05, 100, SPHERE) < 1e-5
    g = random_trig_polynomial(np.random.default_rng(6))
    f2 = random_trig_polynomial(np.random.default_rng(8))
    assert flow_liouville_residual(f2, g, 0.01, 10, TORUS, n=48) < 1e-2
