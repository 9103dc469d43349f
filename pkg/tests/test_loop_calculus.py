import numpy as np
import numpy.testing as npt
import pytest

from quantum_cycles.geometry.errors import DomainError, HolonomyUndefinedError
from quantum_cycles.geometry.loop_calculus import (
    HalfWeight,
    LagrangianLoop,
    fourier_interpolate,
    latitude,
    loop_from_csv,
    loop_from_wrapped,
    periodic_antiderivative,
    periodic_derivative,
    tilted_latitude,
    torus_fiber,
)
from quantum_cycles.geometry.phase_space import PhaseModel

SPHERE = PhaseModel(kind="sphere")
TORUS = PhaseModel(kind="torus")


def test_spectral_derivative_is_exact_on_trig_data():
    u = np.arange(64) / 64
    npt.assert_allclose(periodic_derivative(np.sin(2 * np.pi * 3 * u)), 6 * np.pi * np.cos(6 * np.pi * u), atol=1e-10)


def test_fd4_derivative_converges_at_fourth_order():
    errors = []
    for n in (32, 64, 128):
        u = np.arange(n) / n
        f = np.exp(np.sin(2 * np.pi * u))
        exact = 2 * np.pi * np.cos(2 * np.pi * u) * f
        errors.append(np.max(np.abs(periodic_derivative(f, "fd4") - exact)))
    slope = np.polyfit(np.log([32, 64, 128]), np.log(errors), 1)[0]
    assert slope < -3.7


@pytest.mark.parametrize("kind", ["spectral", "fd4"])
def test_derivatives_sum_to_zero_and_invert(kind):
    rng = np.random.default_rng(0)
    v = rng.normal(size=65)
    assert abs(np.sum(periodic_derivative(v, kind))) < 1e-10
    dv = periodic_derivative(periodic_antiderivative(v, kind), kind)
    npt.assert_allclose(dv, v - v.mean(), atol=1e-9)


def test_fourier_interpolation_between_vertices():
    u = np.arange(32) / 32
    values = np.cos(2 * np.pi * u) + 0.5 * np.sin(4 * np.pi * u)
    s = np.array([0.013, 0.5071, 0.9])
    npt.assert_allclose(fourier_interpolate(values, s), np.cos(2 * np.pi * s) + 0.5 * np.sin(4 * np.pi * s), atol=1e-12)
    npt.assert_allclose(fourier_interpolate(values, s, 1), -2 * np.pi * np.sin(2 * np.pi * s) + 2 * np.pi * np.cos(4 * np.pi * s), atol=1e-10)


@pytest.mark.parametrize("loop", [
    latitude(SPHERE, 0.3, 128),
    tilted_latitude(SPHERE, 0.4, 0.7, 128),
    torus_fiber(TORUS, 0.25, 64),
], ids=["latitude", "tilted", "torus"])
def test_normal_is_symplectically_dual_to_tangent(loop):
    t, nu = loop.tangent(), loop.normal()
    npt.assert_allclose(loop.model.omega(loop.points, t, nu), 1.0, atol=1e-10)
    shear = np.sin(2 * np.pi * loop.u)
    npt.assert_allclose(loop.model.omega(loop.points, t, loop.normal(shear)), 1.0, atol=1e-10)


def test_nearest_parameter_recovers_vertex_offsets():
    loop = tilted_latitude(SPHERE, 0.35, 0.5, 128)
    u = np.array([0.1234, 0.777])
    base = loop.interpolate(u)
    off = SPHERE.project(base + 1e-3 * np.cross(base, loop.interpolate(u, 1)))
    npt.assert_allclose(loop.nearest_parameter(off), u, atol=1e-10)


def test_loop_invariants():
    with pytest.raises(DomainError):
        latitude(SPHERE, 0.5, 8)
    assert latitude(SPHERE, 0.5, 64).is_embedded()
    doubled = np.vstack([latitude(SPHERE, 0.5, 32).points] * 2)
    assert not LagrangianLoop(model=SPHERE, points=doubled).is_embedded()
    with pytest.raises(DomainError):
        HalfWeight(theta=np.array([1.0, 0.0, 1.0]))


def test_half_weight_volume_normalization():
    w = HalfWeight.from_density(1.0 + 0.5 * np.sin(2 * np.pi * np.arange(64) / 64), r=2.0)
    assert w.volume == pytest.approx(2.0, abs=1e-12)


def test_wrapped_torus_loop_recovers_winding():
    n = 64
    u = np.arange(n) / n
    wrapped = np.mod(np.stack([0.3 + 0.05 * np.sin(2 * np.pi * u), 0.9 + u], axis=-1), 1.0)
    loop = loop_from_wrapped(TORUS, wrapped)
    assert loop.winding == (0, 1)
    assert np.max(np.abs(np.diff(loop.points[:, 1]))) < 0.1
    bad = np.stack([np.full(n, 0.2), np.where(u < 0.5, 0.0, 0.5)], axis=-1)
    with pytest.raises(HolonomyUndefinedError):
        loop_from_wrapped(TORUS, bad)


def test_csv_round_trip_keeps_loop_and_density():
    loop = tilted_latitude(SPHERE, 0.3, 0.4, 64)
    weight = HalfWeight.from_density(1.0 + 0.2 * np.cos(2 * np.pi * loop.u), r=2.0)
    text = loop.to_csv(weight)
    assert text.splitlines()[0] == "vertex,chart,coord1,coord2,density"
    back, back_weight = loop_from_csv(SPHERE, text)
    npt.assert_allclose(back.points, loop.points, atol=1e-12)
    npt.assert_allclose(back_weight.w, weight.w, rtol=1e-12)
