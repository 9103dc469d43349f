"""Suite for quantum mechanics on projective Hilbert space."""

import numpy as np

from quantum_cycles.geometry.projective_qm import (
    KahlerConventions,
    commutator_symbol,
    random_hermitian,
    random_ray,
    symbol_brackets,
    transition_probability,
    uncertainty_relation,
)
from quantum_cycles.interfaces.tool import SuiteReport, Tool, evaluate
from quantum_cycles.utils.logger import get_debug_logger
from .models import ProjectiveSuiteInput

logger = get_debug_logger(__name__)


class ProjectiveSuiteTool(Tool):
    """Symbols of Hermitian operators as functions on projective space."""

    name = "projective_qm_suite"
    description = (
        "Check that Hermitian operators become Hamiltonian Killing functions on projective Hilbert "
        "space: the Poisson bracket of two symbols equals the symbol of (1/ih)[F, K], the uncertainty "
        "relation holds on random rays, and transition probabilities follow from Fubini-Study "
        "distance. Returns a report with one entry per property and a per-dimension table."
    )
    input_model = ProjectiveSuiteInput

    def run(self, input_data: ProjectiveSuiteInput) -> SuiteReport:
        rng = np.random.default_rng(input_data.seed)
        conv = KahlerConventions(planck=input_data.planck)
        rows = []
        for d in input_data.dims:
            bracket_err, deficit, transition_err = 0.0, 0.0, 0.0
            for _ in range(input_data.pairs):
                F, K = random_hermitian(rng, d), random_hermitian(rng, d)
                p = random_ray(rng, d)
                exact = commutator_symbol(F, K, p, conv)
                err = abs(symbol_brackets(F, K, p, conv).poisson - exact) / max(1.0, abs(exact))
                bracket_err = max(bracket_err, err)
            F, K = random_hermitian(rng, d), random_hermitian(rng, d)
            for _ in range(input_data.rays):
                p, q = random_ray(rng, d), random_ray(rng, d)
                u = uncertainty_relation(F, K, p, conv)
                deficit = max(deficit, (u.lower_bound - u.delta_f2 * u.delta_k2) / max(1.0, u.lower_bound))
                t = transition_probability(p, q, conv)
                transition_err = max(transition_err, abs(t.geodesic_check - t.prob))
            rows.append({"dim": d, "bracket_error": bracket_err, "uncertainty_deficit": deficit,
                         "transition_error": transition_err})
            logger.debug(f"projective suite d={d}: {rows[-1]}")

        scale = input_data.tol_scale
        worst = {key: max(r[key] for r in rows) for key in ("bracket_error", "uncertainty_deficit", "transition_error")}
        checks = [
            evaluate("symbol_bracket", "symbols are a Lie algebra homomorphism",
                     lambda: worst["bracket_error"], 1e-10 * scale),
            evaluate("uncertainty", "Robertson-Schrodinger relation", lambda: worst["uncertainty_deficit"], 1e-10 * scale),
            evaluate("transition_probability", "transition probability from geodesic distance",
                     lambda: worst["transition_error"], 1e-8 * scale),
        ]
        return SuiteReport(suite=self.name, checks=checks, tables={"dimensions": rows})
