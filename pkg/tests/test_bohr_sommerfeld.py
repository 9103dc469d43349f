import numpy as np
import numpy.testing as npt
import pytest

from quantum_cycles.geometry.bohr_sommerfeld import (
    bs_fibers,
    darboux_chart,
    flow_invariance_residual,
    holonomy_class,
    invariant_half_weight,
    reparametrize,
    root_isolation,
    sphere_fibration,
    torus_fibration,
)
from quantum_cycles.geometry.errors import ChartOverflowError, DegenerateFiberError, HolonomyUndefinedError
from quantum_cycles.geometry.loop_calculus import (
    HalfWeight,
    LagrangianLoop,
    latitude,
    small_circle,
    tilted_latitude,
    torus_fiber,
)
from quantum_cycles.geometry.observables import random_sphere_polynomial
from quantum_cycles.geometry.phase_space import PhaseModel, integrate_flow

SPHERE = PhaseModel(kind="sphere")
TORUS = PhaseModel(kind="torus")


def test_tiny_loop_has_trivial_holonomy():
    hc = holonomy_class(small_circle(SPHERE, np.array([0.0, 0.6, 0.8]), 1e-6), 5)
    assert hc.is_BS
    assert abs(hc.phase - 1.0) < 1e-8


@pytest.mark.parametrize("t,k", [(0.3, 3), (0.55, 7), (0.9, 2)])
def test_latitude_coordinate_is_level_times_area(t, k):
    hc = holonomy_class(latitude(SPHERE, t, 128), k)
    assert hc.jacobian_coordinate == pytest.approx(np.mod(k * t, 1.0), abs=1e-12)


def test_chart_choice_does_not_change_the_class():
    north = holonomy_class(latitude(SPHERE, 0.4, 128, chart="north"), 3)
    south = holonomy_class(latitude(SPHERE, 0.4, 128, chart="south"), 3)
    assert north.action - south.action == pytest.approx(1.0, abs=1e-12)
    assert north.jacobian_coordinate == pytest.approx(south.jacobian_coordinate, abs=1e-12)


def test_reversed_loop_inverts_holonomy():
    loop = tilted_latitude(SPHERE, 0.3, 0.6, 128)
    assert holonomy_class(loop.reversed(), 1).action == pytest.approx(-holonomy_class(loop, 1).action, abs=1e-12)


@pytest.mark.parametrize("m,k", [(1, 4), (3, 4), (2, 5)])
def test_torus_momentum_fibers_are_bohr_sommerfeld(m, k):
    assert holonomy_class(torus_fiber(TORUS, m / k, 64), k).is_BS
    assert not holonomy_class(torus_fiber(TORUS, (m + 0.5) / k, 64), k).is_BS


def test_torus_loop_with_winding_in_both_directions():
    n = 128
    u = np.arange(n) / n
    pts = np.stack([0.2 + u + 0.03 * np.sin(2 * np.pi * u), 0.1 + u], axis=-1)
    loop = LagrangianLoop(model=TORUS, points=pts, winding=(1, 1))
    # same path shifted along itself gives the same class
    shifted = LagrangianLoop(model=TORUS, points=np.roll(pts, -5, axis=0) + np.where(np.arange(n) >= n - 5, 1.0, 0.0)[:, None], winding=(1, 1))
    assert holonomy_class(loop, 3).jacobian_coordinate == pytest.approx(holonomy_class(shifted, 3).jacobian_coordinate, abs=1e-10)


def test_unrecorded_cut_crossing_is_rejected():
    n = 64
    pts = np.stack([np.full(n, 0.5), np.arange(n) / n], axis=-1)
    with pytest.raises(HolonomyUndefinedError):
        holonomy_class(LagrangianLoop(model=TORUS, points=pts), 2)


def test_sphere_fiber_census():
    fib = sphere_fibration(SPHERE, 64)
    npt.assert_allclose(bs_fibers(fib, 3), [1 / 3, 2 / 3], atol=1e-12)
    assert bs_fibers(fib, 1) == []
    for k in range(2, 13):
        roots = bs_fibers(fib, k)
        assert len(roots) + len(fib.degenerate_fibers()) == k + 1
        for m, t in enumerate(roots, start=1):
            assert t == pytest.approx(m / k, abs=1e-12)
            assert holonomy_class(fib.fiber(t), k).is_BS
        assert root_isolation(fib, k, roots)


def test_torus_fiber_census():
    fib = torus_fibration(TORUS, 32)
    npt.assert_allclose(bs_fibers(fib, 4), [0.0, 0.25, 0.5, 0.75], atol=1e-12)
    for k in (1, 2, 7):
        assert len(bs_fibers(fib, k)) == k


def test_invariant_half_weight_is_uniform_on_symmetric_fibers():
    fib = sphere_fibration(SPHERE, 128)
    w = invariant_half_weight(fib.fiber(0.25), fib, r=2.0)
    npt.assert_allclose(w.w, 2.0, rtol=1e-10)
    tfib = torus_fibration(TORUS, 64)
    npt.assert_allclose(invariant_half_weight(tfib.fiber(0.5), tfib, r=2.0).w, 2.0, rtol=1e-12)


def test_invariant_half_weight_on_unevenly_sampled_fiber():
    fib = sphere_fibration(SPHERE, 128)
    loop, _ = reparametrize(fib.fiber(1 / 3), None, 0.4, mode=2)
    weight = invariant_half_weight(loop, fib, r=2.0)
    assert np.ptp(weight.w) > 0.1
    assert weight.volume == pytest.approx(2.0, abs=1e-12)
    assert flow_invariance_residual(loop, weight, fib.action_observable) < 1e-8


def test_non_fiber_is_degenerate():
    fib = sphere_fibration(SPHERE, 64)
    with pytest.raises(DegenerateFiberError):
        invariant_half_weight(tilted_latitude(SPHERE, 0.3, 0.4, 64), fib)


def test_darboux_chart_deformations():
    base = latitude(SPHERE, 1 / 3, 256)
    npt.assert_allclose(darboux_chart(base, np.zeros(256)).points, base.points, atol=1e-15)
    npt.assert_allclose(darboux_chart(base, np.full(256, 3.0)).points, base.points, atol=1e-12)
    drifts = []
    for eps in (1e-3, 2e-3, 4e-3):
        moved = darboux_chart(base, eps * np.sin(2 * np.pi * 2 * base.u))
        drifts.append(abs(holonomy_class(moved, 3).action - 1 / 3))
    assert max(drifts) < 1e-3
    assert drifts[2] / drifts[0] == pytest.approx(16.0, rel=0.1)
    with pytest.raises(ChartOverflowError):
        darboux_chart(base, 0.5 * np.sin(2 * np.pi * base.u))


def test_bohr_sommerfeld_condition_is_dynamical():
    loop = latitude(SPHERE, 2 / 5, 256)
    f = random_sphere_polynomial(np.random.default_rng(11))
    moved = loop.with_points(integrate_flow(SPHERE, f, loop.points, 0.005, 100))
    before, after = holonomy_class(loop, 5), holonomy_class(moved, 5)
    assert holonomy_class(moved, 5, tol_hol=1e-6).is_BS
    assert abs(after.action - before.action) < 1e-7


def test_reparametrization_invariance():
    loop = tilted_latitude(SPHERE, 0.45, 0.3, 256)
    weight = HalfWeight.from_density(1.0 + 0.3 * np.cos(2 * np.pi * loop.u), r=2.0)
    new_loop, new_weight = reparametrize(loop, weight, 0.5, mode=1)
    assert holonomy_class(new_loop, 1).action == pytest.approx(holonomy_class(loop, 1).action, abs=1e-10)
    assert new_weight.volume == pytest.approx(2.0, abs=1e-10)
