import numpy as np
import numpy.testing as npt
import pytest

from quantum_cycles.geometry.bpu import (
    bpu_map,
    eigenstate_check,
    fiber_table,
    flow_correspondence,
    latitudes_of_length,
    metric_weight,
    pairing_functional,
    planckian_lift,
)
from quantum_cycles.geometry.errors import ClosureError, DegenerateImageError, DomainError
from quantum_cycles.geometry.loop_calculus import HalfWeight, latitude, small_circle, tilted_latitude
from quantum_cycles.geometry.moduli import moduli_point
from quantum_cycles.geometry.observables import constant, height
from quantum_cycles.geometry.phase_space import PhaseModel
from quantum_cycles.geometry.projective_qm import Ray
from quantum_cycles.geometry.toeplitz import holomorphic_model

SPHERE = PhaseModel(kind="sphere")


def test_tiny_loop_lifts_to_constant_phases():
    lift = planckian_lift(small_circle(SPHERE, np.array([0.0, 0.6, 0.8]), 1e-6), 4)
    npt.assert_allclose(lift.phases, 1.0, atol=1e-8)


def test_latitude_lift_winds_at_the_transport_rate():
    k, n = 5, 64
    lift = planckian_lift(latitude(SPHERE, 2 / k, n), k)
    npt.assert_allclose(lift.phases, np.exp(2j * np.pi * 2 * np.arange(n) / n), atol=1e-12)
    assert lift.closure_defect < 1e-12
    assert lift.transport_residual < 1e-10


def test_non_bohr_sommerfeld_transport_does_not_close():
    with pytest.raises(ClosureError) as info:
        planckian_lift(latitude(SPHERE, 0.3, 64), 3)
    assert info.value.defect == pytest.approx(0.1, abs=1e-12)


@pytest.mark.parametrize("k,j", [(3, 1), (3, 2), (6, 4)])
def test_bohr_sommerfeld_latitude_maps_to_its_monomial(k, j):
    m = holomorphic_model(k)
    ray = bpu_map(moduli_point(latitude(SPHERE, j / k, 64), k), m)
    assert ray.overlap(Ray.from_vector(np.eye(k + 1)[j])) >= 1 - 1e-8


def test_ray_ignores_the_global_phase_and_rotations():
    k = 3
    m = holomorphic_model(k)
    pt = moduli_point(tilted_latitude(SPHERE, 1 / 3, 0.4, 64), k)
    lift = planckian_lift(pt.loop, k)
    ray = bpu_map(pt, m)
    assert bpu_map(pt, m, lift.with_global_phase(np.exp(0.7j))).same_as(ray)
    turned = moduli_point(latitude(SPHERE, 1 / 3, 64, phase=0.9), k)
    assert bpu_map(turned, m).same_as(bpu_map(moduli_point(latitude(SPHERE, 1 / 3, 64), k), m))


def test_perturbed_weight_keeps_the_dominant_monomial():
    k, n = 4, 64
    u = np.arange(n) / n
    weight = HalfWeight.from_density(1.0 + 0.1 * np.cos(2 * np.pi * u), r=2.0)
    v = bpu_map(moduli_point(latitude(SPHERE, 2 / k, n), k, weight=weight), holomorphic_model(k)).vector
    assert int(np.argmax(np.abs(v))) == 2
    assert np.abs(v[2]) ** 2 > 0.95


def test_critical_points_map_to_eigenstates():
    k = 3
    m = holomorphic_model(k)
    flat = eigenstate_check(height(), moduli_point(latitude(SPHERE, 1 / 3, 64), k), m)
    assert flat.is_critical
    assert flat.eigen_residual < 1e-8
    assert flat.expectation == pytest.approx((k - 2) / (k + 2), abs=1e-8)
    tilted = eigenstate_check(height(), moduli_point(tilted_latitude(SPHERE, 1 / 3, 0.4, 64), k), m)
    assert not tilted.is_critical
    assert tilted.eigen_residual > 1e-3
    anything = eigenstate_check(constant(1.0, 3), moduli_point(tilted_latitude(SPHERE, 1 / 3, 0.4, 64), k), m)
    assert anything.is_critical
    assert anything.eigen_residual < 1e-10


def test_mismatched_level_is_rejected():
    with pytest.raises(DomainError):
        pairing_functional(moduli_point(latitude(SPHERE, 1 / 3, 64), 3), holomorphic_model(4))


def test_isodrastic_flow_follows_the_quantum_flow():
    k = 4
    m = holomorphic_model(k)
    first = moduli_point(tilted_latitude(SPHERE, 1 / 4, 0.4, 64), k)
    fitted = flow_correspondence(height(), first, m)
    assert fitted.relative_error < 0.05
    second = moduli_point(tilted_latitude(SPHERE, 3 / 4, 0.3, 64, axis=(0.6, 0.8, 0.0)), k)
    assert flow_correspondence(height(), second, m, scale=fitted.scale).relative_error < 0.05


def test_round_length_weights():
    equator = latitude(SPHERE, 0.5, 64)
    mw = metric_weight(equator)
    assert mw.volume == pytest.approx(2 * np.pi, rel=1e-12)
    assert metric_weight(equator, "kahler").volume == pytest.approx(np.sqrt(np.pi), rel=1e-12)
    with pytest.raises(DomainError):
        metric_weight(equator, "flat")
    npt.assert_allclose(mw.adapted.w, mw.adapted.w[0], rtol=1e-12)
    assert len(latitudes_of_length(2 * np.pi)) == 2
    lifts = latitudes_of_length(np.pi)
    assert len(lifts) == 4
    assert sorted({lift[1].sign for lift in lifts}) == [-1, 1]
    zs = sorted({round(float(loop.points[0, 2]), 10) for loop, _ in lifts})
    npt.assert_allclose(zs, [-np.sqrt(0.75), np.sqrt(0.75)], atol=1e-9)
    with pytest.raises(DomainError):
        latitudes_of_length(7.0)


def test_fiber_table_covers_the_smooth_monomials():
    k = 5
    table = fiber_table(k, n=64)
    smooth = table[table["status"] == "smooth"]
    assert list(smooth["monomial"]) == list(range(1, k))
    assert smooth["overlap"].min() >= 1 - 1e-8
    assert smooth["eigen_residual"].max() < 1e-8
    assert list(table[table["status"] == "pole"]["fiber"]) == [0, k]


def test_degenerate_image_is_reported():
    k = 3
    pt = moduli_point(latitude(SPHERE, 1 / 3, 64), k)
    lift = planckian_lift(pt.loop, k)
    # five extra turns make every monomial pairing vanish
    killed = lift.model_copy(update={"phases": lift.phases * np.exp(2j * np.pi * 5 * pt.loop.u)})
    with pytest.raises(DegenerateImageError):
        bpu_map(pt, holomorphic_model(k), killed)
