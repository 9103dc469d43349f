"""Suite counting Bohr-Sommerfeld fibers of the standard real polarizations."""

from quantum_cycles.geometry.bohr_sommerfeld import (
    bs_fibers,
    holonomy_class,
    root_isolation,
    sphere_fibration,
    torus_fibration,
    wrapped_distance,
)
from quantum_cycles.geometry.phase_space import PhaseModel
from quantum_cycles.interfaces.tool import SuiteReport, Tool, evaluate
from quantum_cycles.utils.logger import get_debug_logger
from .models import BohrSommerfeldSuiteInput

logger = get_debug_logger(__name__)


class BohrSommerfeldSuiteTool(Tool):
    """Latitudes of area m/k on the sphere, fibers p = m/k on the torus."""

    name = "bohr_sommerfeld_suite"
    description = (
        "Find the Lagrangian fibers with trivial level-k holonomy for the height fibration of the "
        "sphere and the momentum fibration of the torus. On the sphere there are k - 1 smooth ones at "
        "cap area m/k plus the two poles, on the torus k of them at p = m/k. Returns the census per "
        "level and the holonomy of every fiber found."
    )
    input_model = BohrSommerfeldSuiteInput
    sweepable = {"k": "levels", "N": "n"}

    def run(self, input_data: BohrSommerfeldSuiteInput) -> SuiteReport:
        sphere = sphere_fibration(PhaseModel(kind="sphere"), input_data.n)
        torus = torus_fibration(PhaseModel(kind="torus"), input_data.n)
        rows, count_errors, isolation_failures = [], 0, 0
        for k in input_data.levels:
            for label, fib, expected, offset in (("sphere", sphere, k - 1, 1), ("torus", torus, k, 0)):
                roots = bs_fibers(fib, k)
                count_errors += abs(len(roots) - expected)
                if not root_isolation(fib, k, roots):
                    isolation_failures += 1
                for m, t in enumerate(roots, start=offset):
                    hol = holonomy_class(fib.fiber(t), k)
                    rows.append({"model": label, "k": k, "m": m, "base": t, "position_error": abs(t - m / k),
                                 "holonomy_distance": wrapped_distance(k * hol.action)})
            logger.debug(f"bohr-sommerfeld census k={k}: {len(rows)} fibers so far")

        scale = input_data.tol_scale
        checks = [
            evaluate("fiber_count", "k - 1 sphere fibers and k torus fibers", lambda: float(count_errors), 0.0),
            evaluate("fiber_position", "fibers sit at base m/k",
                     lambda: max((r["position_error"] for r in rows), default=0.0), 1e-8 * scale),
            evaluate("holonomy", "trivial holonomy on every fiber found",
                     lambda: max((r["holonomy_distance"] for r in rows), default=0.0), 1e-8 * scale),
            evaluate("isolation", "Bohr-Sommerfeld fibers are isolated", lambda: float(isolation_failures), 0.0),
        ]
        return SuiteReport(suite=self.name, checks=checks, tables={"fibers": rows})
