"""Suite for Souriau-Kostant operators on the prequantized torus."""

import numpy as np

from quantum_cycles.geometry.observables import random_trig_polynomial
from quantum_cycles.geometry.phase_space import PhaseModel
from quantum_cycles.geometry.prequantum import PrequantumBundle, chern_number, commutator_residual, hermiticity_residual
from quantum_cycles.interfaces.tool import CheckResult, SuiteReport, Tool, evaluate
from quantum_cycles.utils.formatters import fitted_order
from quantum_cycles.utils.logger import get_debug_logger
from .models import PrequantumSuiteInput

logger = get_debug_logger(__name__)

TORUS = PhaseModel(kind="torus")
MIN_ORDER = 1.8


class PrequantumSuiteTool(Tool):
    """Discrete prequantum operators converge to a representation of the Poisson algebra."""

    name = "prequantum_suite"
    description = (
        "Build the level-k prequantum line bundle on the torus as a lattice of U(1) links and check "
        "that the Souriau-Kostant operators satisfy [Q_f, Q_g] = Q_{f,g} and are skew-adjoint up to "
        "second-order discretization error, and that the plaquette holonomies integrate to Chern "
        "number k. Returns per-grid residual tables and fitted convergence orders."
    )
    input_model = PrequantumSuiteInput
    sweepable = {"grid": "grids", "N": "grids", "k": "level"}

    def run(self, input_data: PrequantumSuiteInput) -> SuiteReport:
        rng = np.random.default_rng(input_data.seed)
        grids, k = input_data.grids, input_data.level
        bundles = [PrequantumBundle(model=TORUS, level=k, n=n) for n in grids]
        rows, commutator_orders, hermitian_orders = [], [], []
        for pair in range(input_data.pairs):
            f = random_trig_polynomial(rng, max_mode=1).scaled(input_data.amplitude)
            g = random_trig_polynomial(rng, max_mode=1).scaled(input_data.amplitude)
            comm = [commutator_residual(f, g, b, rng=np.random.default_rng(input_data.seed + pair)) for b in bundles]
            herm = [hermiticity_residual(f, b, rng=np.random.default_rng(input_data.seed + pair)) for b in bundles]
            rows.extend({"pair": pair, "grid": n, "commutator": c, "hermiticity": h}
                        for n, c, h in zip(grids, comm, herm))
            commutator_orders.append(-fitted_order(grids, comm))
            hermitian_orders.append(-fitted_order(grids, herm))
        logger.debug(f"prequantum suite orders: commutator {commutator_orders}, hermiticity {hermitian_orders}")

        checks = [
            evaluate("chern_number", "curvature of the prequantum connection",
                     lambda: max(abs(chern_number(b) - k) for b in bundles), 1e-9 * input_data.tol_scale),
        ]
        if len(grids) > 1:
            checks.append(evaluate("commutator_order", "[Q_f, Q_g] = Q_{f,g}", lambda: min(commutator_orders),
                                   MIN_ORDER / input_data.tol_scale, mode="at_least"))
            checks.append(evaluate("hermiticity_order", "Q_f skew-adjoint", lambda: min(hermitian_orders),
                                   MIN_ORDER / input_data.tol_scale, mode="at_least"))
        else:
            checks.append(CheckResult(name="commutator_residual", anchor="[Q_f, Q_g] = Q_{f,g}",
                                      value=max(r["commutator"] for r in rows), passed=True,
                                      message="single grid: residual recorded, no order fitted"))
        return SuiteReport(suite=self.name, checks=checks, tables={"residuals": rows})
