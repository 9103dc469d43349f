import pandas as pd
from fastmcp import FastMCP

from quantum_cycles.resources import ScenarioIndexResource, ScenarioResource
from quantum_cycles.services.resource_service import ResourceService
from quantum_cycles.services.tool_service import ToolService
from quantum_cycles.tools import all_suites
from quantum_cycles.utils.middleware import RequestLoggingMiddleware

mcp = FastMCP(
    "Quantum-Cycles",
    instructions="""
    Numerical lab for geometric quantization. Each tool is a verification suite that builds a
    discretized model and returns a report: one check per property with the measured value, its
    tolerance and pass/fail, plus convergence tables.

    Suites:
    - projective_qm_suite: Hermitian operators as Hamiltonian functions on projective space
    - prequantum_suite: Souriau-Kostant operators on the level-k line bundle over the torus
    - toeplitz_suite: Berezin-Toeplitz quantization of the sphere and the 1/k commutator law
    - bohr_sommerfeld_suite: census of Bohr-Sommerfeld fibers on sphere and torus
    - moduli_suite: Kahler moduli space of half-weighted Bohr-Sommerfeld loops
    - bpu_suite: map from Bohr-Sommerfeld loops to rays of holomorphic sections

    Bundled scenario files are available as resources under scenario://{name}; the list is at
    scenarios://index. Every suite accepts seed and tol_scale; keep resolutions small for quick answers.
    """,
)

mcp.add_middleware(RequestLoggingMiddleware())

tool_service = ToolService()
tool_service.register_tools(all_suites())

resource_service = ResourceService()
resource_service.register_resources([ScenarioResource(), ScenarioIndexResource()])

pd.set_option("future.no_silent_downcasting", True)

tool_service.register_mcp_handlers(mcp)
resource_service.register_mcp_handlers(mcp)


def serve(transport: str = "stdio", host: str = "127.0.0.1", port: int = 8000) -> None:
    if transport == "http":
        mcp.run(transport="http", host=host, port=port, path="/mcp")
    else:
        mcp.run(transport="stdio")


if __name__ == "__main__":
    serve("http", host="0.0.0.0")
