"""Command line: run scenarios, sweep a parameter, or serve the suites over MCP.

Exit codes: 0 when every check passes, 1 when a check fails, 2 when the
scenario or the arguments cannot be used.
"""

import argparse
import sys
from pathlib import Path
from typing import List, Optional

from quantum_cycles.geometry.errors import ScenarioError
from quantum_cycles.services.scenario_service import (
    ScenarioService,
    bundled_scenarios,
    default_jobs,
    load_scenario,
    parse_sweep_value,
)
from quantum_cycles.services.tool_service import ToolService
from quantum_cycles.tools import all_suites
from quantum_cycles.utils.formatters import to_clean_csv
from quantum_cycles.utils.logger import get_debug_logger
from quantum_cycles.utils.validators import SWEEP_PARAMETERS

logger = get_debug_logger(__name__)

EXIT_OK, EXIT_FAILED, EXIT_USAGE = 0, 1, 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="quantum-cycles", description="Geometric quantization verification lab.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", type=Path, default=Path("results"), help="Directory for report.json and CSV tables")
    common.add_argument("--seed", type=int, default=None, help="Override the scenario seed")
    common.add_argument("--tol-scale", type=float, default=None, help="Multiply every tolerance")
    common.add_argument("--jobs", type=int, default=default_jobs(), help="Suites run in parallel")

    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", parents=[common], help="Run a scenario file or bundled scenario")
    run.add_argument("scenario", help=f"Path or bundled name ({', '.join(bundled_scenarios())})")

    sweep = sub.add_parser("sweep", parents=[common], help="Re-run a scenario once per parameter value")
    sweep.add_argument("parameter", choices=SWEEP_PARAMETERS)
    sweep.add_argument("values", help="Comma-separated values, e.g. 4,8,16")
    sweep.add_argument("scenario")

    serve = sub.add_parser("serve", help="Serve the suites as an MCP server")
    serve.add_argument("--transport", choices=["stdio", "http"], default="stdio")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    return parser


def _service(jobs: int) -> ScenarioService:
    tools = ToolService()
    tools.register_tools(all_suites())
    return ScenarioService(tools, jobs=max(1, jobs))


def run_command(args: argparse.Namespace) -> int:
    service = _service(args.jobs)
    report = service.run(load_scenario(args.scenario), seed=args.seed, tol_scale=args.tol_scale)
    service.write_report(report, args.out)
    for suite in report.reports:
        if suite.error:
            print(f"{suite.suite}: ERROR {suite.error}")
        for check in suite.checks:
            status = "ok" if check.passed else "FAILED"
            print(f"{suite.suite}.{check.name}: {check.value} (tolerance {check.tolerance}) {status}")
    print(f"Report written to {args.out / 'report.json'}")
    return EXIT_OK if report.passed else EXIT_FAILED


def sweep_command(args: argparse.Namespace) -> int:
    values = [parse_sweep_value(v) for v in args.values.split(",") if v.strip()]
    service = _service(args.jobs)
    table = service.sweep(args.parameter, values, load_scenario(args.scenario), seed=args.seed,
                          tol_scale=args.tol_scale)
    args.out.mkdir(parents=True, exist_ok=True)
    path = args.out / f"sweep-{args.parameter}.csv"
    path.write_text(to_clean_csv(table), encoding="utf-8")
    print(f"Sweep table written to {path}")
    return EXIT_OK if bool(table["passed"].all()) else EXIT_FAILED


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "serve":
        from quantum_cycles.server import serve

        serve(args.transport, host=args.host, port=args.port)
        return EXIT_OK
    try:
        return run_command(args) if args.command == "run" else sweep_command(args)
    except ScenarioError as e:
        logger.debug(f"Scenario rejected: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
