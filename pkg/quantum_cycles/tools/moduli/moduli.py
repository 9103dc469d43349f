"""Suite for the isodrastic moduli space and its induced observables."""

import numpy as np

from quantum_cycles.geometry.bohr_sommerfeld import darboux_chart
from quantum_cycles.geometry.loop_calculus import HalfWeight, tilted_latitude, torus_fiber
from quantum_cycles.geometry.moduli import (
    bracket_check,
    central_identity_residual,
    dynamical_field,
    induced_function,
    isodrastic_flow,
    level_rescale,
    moduli_point,
    random_tangent,
    surjectivity_witness,
)
from quantum_cycles.geometry.observables import coordinate, height, random_sphere_polynomial, trig_polynomial
from quantum_cycles.geometry.phase_space import PhaseModel
from quantum_cycles.interfaces.tool import SuiteReport, Tool, evaluate
from quantum_cycles.utils.formatters import fitted_order
from quantum_cycles.utils.logger import get_debug_logger
from .models import ModuliSuiteInput

logger = get_debug_logger(__name__)

SPHERE = PhaseModel(kind="sphere")
TORUS = PhaseModel(kind="torus")
LEVEL = 3
TILT = 0.6
RESCALE_LEVELS = (2, 4, 8)
TORUS_PAIR = (trig_polynomial([(1, 1, 1.0, 0.0)]), trig_polynomial([(1, -1, 0.0, 1.0)]))


def _wavy_point(n: int, tau: float, **kwargs):
    loop = tilted_latitude(SPHERE, 1 / LEVEL, TILT, n, **kwargs)
    u = np.arange(n) / n
    weight = HalfWeight.from_density(1.0 + 0.3 * np.cos(2 * np.pi * u), r=2.0)
    return moduli_point(loop, LEVEL, weight=weight, tau=tau,
                        **({"tol_hol": 1e-3} if kwargs.get("derivative") == "fd4" else {}))


def _level_one_point(n: int, tau: float):
    """Wavy graph over the torus fiber ``p = 0``, Bohr-Sommerfeld at every level."""
    u = np.arange(n) / n
    loop = darboux_chart(torus_fiber(TORUS, 0.0, n), 0.02 * np.cos(2 * np.pi * u))
    weight = HalfWeight.from_density(1.0 + 0.3 * np.sin(2 * np.pi * u), r=2.0)
    return moduli_point(loop, 1, weight=weight, tau=tau)


class ModuliSuiteTool(Tool):
    """Induced functions F_f form a Poisson algebra on the moduli space."""

    name = "moduli_suite"
    description = (
        "Build the moduli space of half-weighted Bohr-Sommerfeld loops at a tilted latitude and check "
        "that X_{F_f} = 2 tau Theta_f, that Omega(X_{F_f}, X_{F_g}) = 2 tau F_{f,g}, that the "
        "isodrastic flow preserves F_f and the volume, that the level-k chart of a level-one torus loop "
        "divides brackets by k, and that every tangent vector is a dynamical field. "
        "Returns per-pair and per-resolution tables."
    )
    input_model = ModuliSuiteInput
    sweepable = {"N": "n", "tau": "tau"}

    def run(self, input_data: ModuliSuiteInput) -> SuiteReport:
        rng = np.random.default_rng(input_data.seed)
        scale = input_data.tol_scale
        pt = _wavy_point(input_data.n, input_data.tau)
        pairs = [(random_sphere_polynomial(rng), random_sphere_polynomial(rng)) for _ in range(input_data.pairs)]

        bracket_rows = []
        for i, (f, g) in enumerate(pairs):
            check = bracket_check(f, g, pt)
            bracket_rows.append({"pair": i, "lhs": check.lhs, "rhs": check.rhs,
                                 "relative_error": abs(check.lhs - check.rhs) / max(abs(check.rhs), 1e-12),
                                 "restricted_residual": check.restricted_residual})
        ladder_rows = []
        for n in input_data.resolutions:
            check = bracket_check(height(), coordinate(0, 3), _wavy_point(n, input_data.tau, derivative="fd4"))
            ladder_rows.append({"n": n, "relative_error": abs(check.lhs - check.rhs) / abs(check.rhs)})
        logger.debug(f"moduli suite fd4 ladder: {ladder_rows}")

        def flow_invariants() -> float:
            f = coordinate(0, 3)
            moved = isodrastic_flow(f, pt, input_data.flow_time, input_data.flow_steps)
            return max(abs(induced_function(f, moved) - induced_function(f, pt)), abs(moved.volume - pt.volume))

        def level_defect() -> float:
            base = _level_one_point(input_data.n, input_data.tau)
            return max(abs(level_rescale(*TORUS_PAIR, base, k).ratio * k - 1.0) for k in RESCALE_LEVELS)

        def surjectivity() -> float:
            worst = 0.0
            for _ in range(input_data.pairs):
                target = random_tangent(pt, rng)
                got = dynamical_field(surjectivity_witness(target, pt), pt)
                worst = max(worst, float(np.linalg.norm(got.stacked() - target.stacked()) / target.norm()))
            return worst

        checks = [
            evaluate("bracket", "Omega(X_F_f, X_F_g) = 2 tau F_{f,g}",
                     lambda: max(r["relative_error"] for r in bracket_rows), 1e-6 * scale),
            evaluate("restricted_bracket", "bracket restricted to the loop is tangential",
                     lambda: max(r["restricted_residual"] for r in bracket_rows), 1e-8 * scale),
            evaluate("central_identity", "X_F_f = 2 tau Theta_f",
                     lambda: max(central_identity_residual(f, pt) for f, _ in pairs), 1e-6 * scale),
            evaluate("flow_invariants", "isodrastic flow preserves F_f and volume", flow_invariants, 1e-6 * scale),
            evaluate("level_rescaling", "level-k brackets are 1/k of level-one brackets", level_defect, 1e-6 * scale),
            evaluate("surjectivity", "every tangent is a dynamical field", surjectivity, 1e-4 * scale),
        ]
        if len(ladder_rows) > 1:
            checks.append(evaluate(
                "fd4_order", "finite-difference bracket converges at the required order",
                lambda: -fitted_order(input_data.resolutions, [r["relative_error"] for r in ladder_rows]),
                input_data.min_order / scale, mode="at_least",
            ))
        return SuiteReport(suite=self.name, checks=checks, tables={"brackets": bracket_rows, "fd4_ladder": ladder_rows})
