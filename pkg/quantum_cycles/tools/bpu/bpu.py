"""Suite for the map from Bohr-Sommerfeld loops to rays of holomorphic sections."""

import pandas as pd

from quantum_cycles.geometry.bpu import fiber_table, flow_correspondence
from quantum_cycles.geometry.loop_calculus import tilted_latitude
from quantum_cycles.geometry.moduli import moduli_point
from quantum_cycles.geometry.observables import height
from quantum_cycles.geometry.phase_space import PhaseModel
from quantum_cycles.geometry.toeplitz import holomorphic_model
from quantum_cycles.interfaces.tool import SuiteReport, Tool, evaluate
from quantum_cycles.utils.logger import get_debug_logger
from .models import BpuSuiteInput

logger = get_debug_logger(__name__)

SPHERE = PhaseModel(kind="sphere")
FLOW_LEVEL = 4
MAX_FLOW_ERROR = 0.05


class BpuSuiteTool(Tool):
    """Latitudes map to monomials and isodrastic flows map to projective flows."""

    name = "bpu_suite"
    description = (
        "Pair the Planckian lift of each Bohr-Sommerfeld latitude with the holomorphic sections of "
        "O(k) and check that the latitude of area m/k lands on the monomial z^m, an eigenvector of "
        "the Toeplitz operator of the height. Also checks that isodrastic flows are carried to "
        "projective flows with one fitted constant. Returns the fiber table for every level."
    )
    input_model = BpuSuiteInput
    sweepable = {"k": "levels", "N": "n"}

    def run(self, input_data: BpuSuiteInput) -> SuiteReport:
        tables = []
        for k in input_data.levels:
            table = fiber_table(k, n=input_data.n, r=input_data.volume)
            tables.append(table.assign(k=k))
        fibers = pd.concat(tables, ignore_index=True)
        smooth = fibers[fibers["status"] == "smooth"]
        logger.debug(f"bpu suite: {len(smooth)} smooth fibers over levels {input_data.levels}")

        def flow_error() -> float:
            m = holomorphic_model(FLOW_LEVEL)
            first = moduli_point(tilted_latitude(SPHERE, 1 / 4, 0.4, input_data.n), FLOW_LEVEL)
            fitted = flow_correspondence(height(), first, m)
            second = moduli_point(tilted_latitude(SPHERE, 3 / 4, 0.3, input_data.n, axis=(0.6, 0.8, 0.0)), FLOW_LEVEL)
            reused = flow_correspondence(height(), second, m, scale=fitted.scale)
            return max(fitted.relative_error, reused.relative_error)

        scale = input_data.tol_scale
        checks = [
            evaluate("monomial", "latitude of area m/k maps to z^m",
                     lambda: float((smooth["monomial"] != smooth["fiber"]).sum()), 0.0),
            evaluate("overlap", "image ray is the monomial", lambda: float((1.0 - smooth["overlap"]).max()), 1e-8 * scale),
            evaluate("eigenstate", "image ray is an eigenvector of A_z",
                     lambda: float(smooth["eigen_residual"].max()), 1e-8 * scale),
            evaluate("flow_correspondence", "isodrastic flow maps to projective flow", flow_error,
                     MAX_FLOW_ERROR * scale),
        ]
        records = fibers.astype(object).where(fibers.notna(), None).to_dict(orient="records")
        return SuiteReport(suite=self.name, checks=checks, tables={"fibers": records})
